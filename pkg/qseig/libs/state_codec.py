import struct

import numpy as np

from qseig.config.constants import STATE_MAGIC
from qseig.config.exceptions import InvalidParams
from qseig.operators.blockvec import BlockState

_HEADER = struct.Struct('<5sQQ')


class StateCodec:
    """Format binaire des états-blocs.

    Magic QSEV1, puis Ng et N en u64 little-endian, puis Ng*N float64 little-endian en ordre colonne.
    """

    @staticmethod
    def encode(state: BlockState) -> bytes:
        header = _HEADER.pack(STATE_MAGIC, state.ng, state.n)
        return header + state.data.astype('<f8').tobytes(order='F')

    @staticmethod
    def decode(raw: bytes) -> BlockState:
        if len(raw) < _HEADER.size:
            raise InvalidParams(f"fichier d'état tronqué ({len(raw)} octets)")
        magic, ng, n = _HEADER.unpack_from(raw)
        if magic != STATE_MAGIC:
            raise InvalidParams(f"magic {magic!r} inattendu, {STATE_MAGIC!r} attendu")
        expected = _HEADER.size + 8 * ng * n
        if len(raw) != expected:
            raise InvalidParams(f"fichier d'état de {len(raw)} octets, {expected} attendus pour {ng}x{n}")
        data = np.frombuffer(raw, dtype='<f8', offset=_HEADER.size).reshape((ng, n), order='F')
        return BlockState(data.astype(np.float64))
