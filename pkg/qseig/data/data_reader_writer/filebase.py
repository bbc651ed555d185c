import os
import tempfile

from qseig.config.exceptions import FileNotExisted
from qseig.data.data_reader_writer.base import DataReader, DataWriter


def _join(parent_dir: str, path: str) -> str:
    if not os.path.isabs(path) and len(parent_dir) > 0:
        return os.path.join(parent_dir, path)
    return path


class FileBasedDataReader(DataReader):
    def __init__(self, parent_dir: str = ''):
        """Initialisation avec parent_dir.

        Args:
            parent_dir (str, optional): répertoire auquel sont joints les chemins relatifs. Par défaut ''.
        """
        self._parent_dir = parent_dir

    def read_at(self, path: str, offset: int = 0, limit: int = -1) -> bytes:
        fn_path = _join(self._parent_dir, path)
        if not os.path.isfile(fn_path):
            raise FileNotExisted(fn_path)

        with open(fn_path, 'rb') as f:
            f.seek(offset)
            if limit == -1:
                return f.read()
            else:
                return f.read(limit)


class FileBasedDataWriter(DataWriter):
    def __init__(self, parent_dir: str = '') -> None:
        """Initialisation avec parent_dir.

        Args:
            parent_dir (str, optional): répertoire auquel sont joints les chemins relatifs. Par défaut ''.
        """
        self._parent_dir = parent_dir

    def write(self, path: str, data: bytes) -> None:
        """Écriture atomique : fichier temporaire dans le répertoire cible puis os.replace.

        Args:
            path (str): chemin du fichier, joint à parent_dir s'il est relatif
            data (bytes): données à écrire
        """
        fn_path = _join(self._parent_dir, path)
        target_dir = os.path.dirname(os.path.abspath(fn_path))
        os.makedirs(target_dir, exist_ok=True)

        fd, tmp_path = tempfile.mkstemp(dir=target_dir, prefix='.tmp-', suffix=os.path.basename(fn_path))
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(data)
            os.replace(tmp_path, fn_path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
