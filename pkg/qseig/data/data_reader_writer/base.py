from abc import ABC, abstractmethod

from qseig.config.exceptions import InvalidConfig


class DataReader(ABC):
    """Source des entrées d'un run : fichiers de configuration et fichiers d'état (.qsev)."""

    def read(self, path: str) -> bytes:
        """Contenu complet d'un fichier d'état ou de configuration.

        Raises:
            FileNotExisted: le fichier n'existe pas
        """
        return self.read_at(path)

    def read_text(self, path: str) -> str:
        """Contenu d'un fichier de configuration, décodé en UTF-8.

        Raises:
            InvalidConfig: le fichier n'est pas en UTF-8
        """
        try:
            return self.read(path).decode('utf-8')
        except UnicodeDecodeError as e:
            raise InvalidConfig(f'{path}: encodage non UTF-8 ({e})')

    @abstractmethod
    def read_at(self, path: str, offset: int = 0, limit: int = -1) -> bytes:
        """Lecture partielle, par exemple l'en-tête d'un fichier d'état sans ses coefficients.

        Args:
            path (str): chemin du fichier
            offset (int, optional): octets ignorés en tête. Par défaut 0.
            limit (int, optional): octets lus, -1 pour tout le reste. Par défaut -1.
        """
        raise NotImplementedError


class DataWriter(ABC):
    """Destination des sorties : rapports JSON, historiques et balayages CSV, états de référence."""

    @abstractmethod
    def write(self, path: str, data: bytes) -> None:
        """Écrit un fichier complet ; un lecteur ne doit jamais voir un rapport ou un état tronqué.

        Args:
            path (str): fichier cible
            data (bytes): contenu, par exemple un état encodé par StateCodec
        """
        raise NotImplementedError

    def write_string(self, path: str, data: str) -> None:
        """Écrit un rapport JSON ou un CSV, encodé en UTF-8."""
        self.write(path, data.encode('utf-8'))
