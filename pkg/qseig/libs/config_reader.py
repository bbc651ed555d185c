"""Lecture de la configuration globale ~/QSEIG-CONFIG.json et des surcharges d'environnement."""

import json
import os

from loguru import logger

from qseig.config.constants import DENSE_MAX_DOFS, DIRECT_SOLVER_MAX_DOFS

# Définition de la constante du nom du fichier de configuration
CONFIG_FILE_NAME = os.getenv('QSEIG_CONFIG_JSON', 'QSEIG-CONFIG.json')

THREADS_ENV = 'QSEIG_THREADS'

# Positionné par l'option --serial de la CLI
__force_serial__ = False


def read_config():
    if os.path.isabs(CONFIG_FILE_NAME):
        config_file = CONFIG_FILE_NAME
    else:
        home_dir = os.path.expanduser('~')
        config_file = os.path.join(home_dir, CONFIG_FILE_NAME)

    if not os.path.exists(config_file):
        return {}

    with open(config_file, 'r', encoding='utf-8') as f:
        config = json.load(f)
    return config


def set_serial(serial: bool):
    global __force_serial__
    __force_serial__ = serial


def get_thread_count() -> int:
    """Nombre de workers pour les résolutions colonne par colonne.

    Ordre de priorité : --serial, puis QSEIG_THREADS, puis la clé 'threads' du fichier global.
    """
    if __force_serial__:
        return 1
    env_threads = os.getenv(THREADS_ENV)
    if env_threads:
        try:
            return max(1, int(env_threads))
        except ValueError:
            logger.warning(f"{THREADS_ENV}={env_threads!r} n'est pas un entier, utilisation de 1 par défaut")
            return 1
    threads = read_config().get('threads')
    if threads is None:
        return 1
    return max(1, int(threads))


def get_direct_solver_max_dofs() -> int:
    config = read_config()
    max_dofs = config.get('direct-solver-max-dofs')
    if max_dofs is None:
        logger.debug(f"'direct-solver-max-dofs' non trouvé dans {CONFIG_FILE_NAME}, utilisation de {DIRECT_SOLVER_MAX_DOFS} par défaut")
        return DIRECT_SOLVER_MAX_DOFS
    else:
        return int(max_dofs)


def get_dense_max_dofs() -> int:
    config = read_config()
    max_dofs = config.get('dense-max-dofs')
    if max_dofs is None:
        logger.debug(f"'dense-max-dofs' non trouvé dans {CONFIG_FILE_NAME}, utilisation de {DENSE_MAX_DOFS} par défaut")
        return DENSE_MAX_DOFS
    else:
        return int(max_dofs)
