"""Points d'entrée de haut niveau : construction du problème, de G, de l'état initial et de la référence.

Les pipes et la CLI passent par ces fonctions ; aucune n'écrit de fichier.
"""

from typing import Optional

from loguru import logger

from qseig.analysis.eigen_report import extract_eigenvalues
from qseig.analysis.reference import reference_subspace_iteration
from qseig.config.enums import InitMode, ReferenceKind
from qseig.config.exceptions import InvalidConfig
from qseig.data.read_api import read_state
from qseig.data.schemas import EigenReport, ProblemConfig, RunConfig, SolverConfig
from qseig.libs.version import __version__
from qseig.operators.blockvec import BlockState
from qseig.operators.discretize import Discretization, assemble, estimate_lambda1
from qseig.operators.greens import InverseOperator, prepare
from qseig.scheme.init_state import init_state


def build_discretization(problem: ProblemConfig) -> Discretization:
    return assemble(problem.domain_spec(), problem.grid_spec(), problem.potential_spec(),
                    problem.c_lap, problem.sigma)


def prepare_operator(d: Discretization, solver: SolverConfig, with_lambda1: bool = True) -> InverseOperator:
    """Prépare G et, par défaut, estime lambda1 du pinceau décalé."""
    g = prepare(d, method=solver.method, tol=solver.inner_tol, max_iter=solver.max_iter,
                preconditioner=solver.preconditioner)
    if with_lambda1:
        estimate_lambda1(d, g)
    return g


def initial_state(d: Discretization, config: RunConfig, seed: Optional[int] = None) -> BlockState:
    scheme = config.scheme
    state = None
    if scheme.init_mode == InitMode.FROM_STATE:
        if not scheme.initial_state:
            raise InvalidConfig('scheme.initial_state est requis avec init_mode = from_state')
        state = read_state(scheme.initial_state)
    return init_state(d, config.n_eig, scheme.init_mode, seed=scheme.seed if seed is None else seed,
                      state=state)


def compute_reference(d: Discretization, g: InverseOperator, config: RunConfig,
                      force_oracle: bool = False) -> Optional[tuple[EigenReport, BlockState]]:
    """Référence selon reference.kind : oracle, fichier d'état, ou aucune.

    Args:
        force_oracle (bool): calcule l'oracle même si reference.kind = none
    """
    ref = config.reference
    if ref.kind == ReferenceKind.FILE:
        block = read_state(ref.path)
        logger.info(f'référence lue depuis {ref.path}: {block.shape}')
        return extract_eigenvalues(d, g, block), block
    if ref.kind == ReferenceKind.NONE and not force_oracle:
        return None
    return reference_subspace_iteration(d, g, config.n_eig, tol=ref.tol, max_iter=ref.max_iter,
                                        seed=config.scheme.seed)


def report_header(config: RunConfig, d: Discretization) -> dict:
    """En-tête commun des rapports JSON."""
    header = {
        '_version_name': __version__,
        'problem': config.problem.model_dump(mode='json'),
        'n_eig': config.n_eig,
        'ng': d.ng,
    }
    if d.lambda1_est is not None:
        header['lambda1_shifted'] = d.lambda1_est
        header['lambda1'] = d.lambda1_est - d.sigma
    return header
