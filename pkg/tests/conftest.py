import sys

import pytest
from loguru import logger

from qseig.config.enums import PotentialKind, SolverMethod
from qseig.data.schemas import DomainSpec, GridSpec, PotentialSpec
from qseig.operators.discretize import assemble, estimate_lambda1
from qseig.operators.greens import prepare


@pytest.fixture(autouse=True)
def reset_logger():
    # CliRunner remplace sys.stderr ; chaque test repart d'un puits propre.
    logger.remove()
    logger.add(sys.stderr, level='INFO')
    yield
    logger.remove()


@pytest.fixture
def lap1d():
    """-u'' sur (0, 1), 20 points intérieurs : valeurs propres proches de (k pi)^2."""
    return assemble(DomainSpec(dim=1, lower=(0.0,), upper=(1.0,)), GridSpec(points_per_dim=(20,)),
                    PotentialSpec(kind=PotentialKind.ZERO), c_lap=1.0)


@pytest.fixture
def g1d(lap1d):
    g = prepare(lap1d, method=SolverMethod.DIRECT)
    estimate_lambda1(lap1d, g)
    return g


@pytest.fixture
def harmonic2d():
    """Oscillateur harmonique 2D grossier : valeurs propres proches de 1, 2, 2, 3, 3, 3."""
    return assemble(DomainSpec(dim=2, lower=(-5.5, -5.5), upper=(5.5, 5.5)), GridSpec(points_per_dim=(26, 26)),
                    PotentialSpec(kind=PotentialKind.HARMONIC, coeff=0.5), c_lap=0.5)


@pytest.fixture
def g2d(harmonic2d):
    g = prepare(harmonic2d, method=SolverMethod.DIRECT)
    estimate_lambda1(harmonic2d, g)
    return g


CONFIG_TEXT = """\
# petit problème 1D
n_eig = 2

problem.dim = 1
problem.lower = 0
problem.upper = 1
problem.points = 20
problem.potential = zero

solver.method = direct

scheme.tau = 1.0
scheme.eps = 1e-8
scheme.max_steps = 5000
scheme.seed = 1
"""


@pytest.fixture
def config_text():
    return CONFIG_TEXT


@pytest.fixture
def config_file(tmp_path):
    def _write(extra: str = '') -> str:
        path = tmp_path / 'run.conf'
        path.write_text(CONFIG_TEXT + extra, encoding='utf-8')
        return str(path)
    return _write
