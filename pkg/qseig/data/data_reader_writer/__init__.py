from qseig.data.data_reader_writer.filebase import \
    FileBasedDataReader  # noqa: F401
from qseig.data.data_reader_writer.filebase import \
    FileBasedDataWriter  # noqa: F401
from qseig.data.data_reader_writer.base import DataReader  # noqa: F401
from qseig.data.data_reader_writer.base import DataWriter  # noqa: F401
