"""Lecture et écriture des fichiers de configuration d'expérience et des fichiers d'état."""

import enum
import re
from typing import Optional

from pydantic import ValidationError

from qseig.config.exceptions import InvalidConfig
from qseig.data.data_reader_writer import (DataWriter, FileBasedDataReader,
                                           FileBasedDataWriter)
from qseig.data.schemas import RunConfig
from qseig.libs.state_codec import StateCodec
from qseig.operators.blockvec import BlockState

# Clés dont la valeur est toujours une liste séparée par des virgules
LIST_KEYS = {'problem.lower', 'problem.upper', 'problem.points'}

# Champs optionnels : `none` ou une valeur vide donnent None. Les énumérations gardent la chaîne.
OPTIONAL_KEYS = {'problem.sigma', 'scheme.initial_state', 'reference.path', 'outputs.history_csv',
                 'outputs.report', 'outputs.reference_state', 'outputs.sweep_csv'}

# Un commentaire commence en début de ligne ou après un blanc
_COMMENT = re.compile(r'(?:^|\s)#')

SECTIONS = ('problem', 'solver', 'scheme', 'outputs', 'reference')


def parse_run_config(text: str, source: str = '<texte>') -> RunConfig:
    """Analyse le format `cle = valeur` ; les clés pointées désignent une section.

    Args:
        text (str): contenu du fichier
        source (str): nom affiché dans les erreurs

    Raises:
        InvalidConfig: ligne mal formée, clé dupliquée ou inconnue, valeur invalide
    """
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _COMMENT.split(line, maxsplit=1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise InvalidConfig(f'{source}:{lineno}: `cle = valeur` attendu, reçu {line!r}')
        key, value = (part.strip() for part in line.split('=', 1))
        parts = key.split('.')
        if not key or len(parts) > 2 or not all(parts):
            raise InvalidConfig(f'{source}:{lineno}: clé invalide {key!r}')
        if len(parts) == 2 and parts[0] not in SECTIONS:
            raise InvalidConfig(f'{source}:{lineno}: section inconnue {parts[0]!r}')
        if key in LIST_KEYS:
            value = [item.strip() for item in value.split(',') if item.strip()]
        elif key in OPTIONAL_KEYS and value.lower() in ('none', ''):
            value = None

        target = raw if len(parts) == 1 else raw.setdefault(parts[0], {})
        if parts[-1] in target:
            raise InvalidConfig(f'{source}:{lineno}: clé {key!r} dupliquée')
        target[parts[-1]] = value

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise InvalidConfig(f'{source}: {e}')


def _format_value(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (list, tuple)):
        return ', '.join(_format_value(v) for v in value)
    return str(value)


def dump_run_config(config: RunConfig) -> str:
    """Forme canonique : parse_run_config(dump_run_config(c)) == c."""
    lines = []
    for key, value in config.model_dump(exclude_none=True).items():
        if isinstance(value, dict):
            lines.append(f'# {key}')
            for sub_key, sub_value in value.items():
                lines.append(f'{key}.{sub_key} = {_format_value(sub_value)}')
        else:
            lines.append(f'{key} = {_format_value(value)}')
    return '\n'.join(lines) + '\n'


def read_run_config(path: str) -> RunConfig:
    return parse_run_config(FileBasedDataReader('').read_text(path), source=path)


def read_state(path: str) -> BlockState:
    return StateCodec.decode(FileBasedDataReader('').read(path))


def write_state(path: str, state: BlockState, writer: Optional[DataWriter] = None) -> None:
    writer = writer if writer is not None else FileBasedDataWriter('')
    writer.write(path, StateCodec.encode(state))
