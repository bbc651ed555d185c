"""Itération quasi-orthogonale : prédicteur de Cayley exact puis correcteur vers la variété de Stiefel."""

import time
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError

from qseig.analysis.diagnostics import energy, grassmann_gradient, subspace_gradient
from qseig.config.constants import (DIVERGENCE_RTOL, DIVERGENCE_STREAK, STALL_GRAD_FLOOR, STALL_RTOL,
                                    STALL_WINDOW)
from qseig.config.enums import EnforceBounds, TerminationReason
from qseig.config.exceptions import (DimensionMismatch, InvalidParams, MissingLambda1, NonFinite,
                                     NotPositiveDefinite, SmallSolveSingular, StepSizeRejected)
from qseig.data.schemas import SchemeConfig, StepBounds, StepDiagnostics
from qseig.operators.blockvec import (BlockState, block_norm_a, block_norm_l2,
                                      combine, gram_l2, sym_eig)
from qseig.operators.discretize import Discretization
from qseig.operators.greens import InverseOperator
from qseig.scheme.step_bounds import compute_step_bounds

# Conditionnement au-delà duquel le système 2N x 2N est déclaré singulier
SMALL_SOLVE_COND_MAX = 1e14


class RunHistory(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    records: list[StepDiagnostics]
    terminated_by: TerminationReason
    final_state: BlockState
    tau: float
    initial_energy: float
    initial_orth_error: float
    initial_lambda_min_gram: float
    initial_lambda_max_gram: float
    bounds: Optional[StepBounds] = None

    @property
    def steps(self) -> int:
        return len(self.records)

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)


class StepTrace(NamedTuple):
    """Tous les états intermédiaires d'un pas, pour les diagnostics et les vérifications."""
    u_hat: BlockState
    gu_hat: BlockState
    u_next: BlockState
    gu_next: BlockState
    diagnostics: StepDiagnostics


def _check_pair(u: BlockState, gu: BlockState):
    if u.shape != gu.shape:
        raise DimensionMismatch(f'U {u.shape} et GU {gu.shape}')


def skew_apply(d: Discretization, g: InverseOperator, u: BlockState, gu: BlockState,
               v: BlockState) -> BlockState:
    """A_U V = GU <U,V> - U <GU,V>, antisymétrique pour le produit L2.

    GU doit être apply_green(g, u), fourni par l'appelant.
    """
    _check_pair(u, gu)
    return combine(gu, gram_l2(d, u, v)) - combine(u, gram_l2(d, gu, v))


def cayley_step(d: Discretization, g: InverseOperator, u_n: BlockState, gu_n: BlockState,
                tau: float) -> BlockState:
    """Prédicteur point-milieu implicite, résolu exactement.

    A_{U_n} V = W <Z,V> avec W = [GU_n, -U_n] et Z = [U_n, GU_n] ; avec c = tau/2,
    (I - c A)^{-1} B = B + c W (I_2N - c <Z,W>)^{-1} <Z,B>, où B = U_n + c A U_n.

    Raises:
        SmallSolveSingular: le système 2N x 2N est numériquement singulier
    """
    _check_pair(u_n, gu_n)
    if tau <= 0:
        raise InvalidParams(f'tau doit être > 0, reçu {tau}')
    c = 0.5 * tau
    n = u_n.n
    z = np.hstack([u_n.data, gu_n.data])
    w = np.hstack([gu_n.data, -u_n.data])
    mz = d.m[:, None] * z
    zw = mz.T @ w
    b = u_n.data + c * (w @ (mz.T @ u_n.data))
    small = np.eye(2 * n) - c * zw
    cond = np.linalg.cond(small)
    if not np.isfinite(cond) or cond > SMALL_SOLVE_COND_MAX:
        raise SmallSolveSingular(f'conditionnement {cond:.3e} pour tau={tau}')
    return BlockState(b + c * (w @ np.linalg.solve(small, mz.T @ b)))


def corrector_step(d: Discretization, g: InverseOperator, u_hat: BlockState, tau: float,
                   gu_hat: Optional[BlockState] = None) -> BlockState:
    """U_{n+1} = Û - tau GÛ (<Û,Û> - I)."""
    if tau <= 0:
        raise InvalidParams(f'tau doit être > 0, reçu {tau}')
    if gu_hat is None:
        gu_hat = g.apply(u_hat)
    o = gram_l2(d, u_hat, u_hat).minus_identity()
    return u_hat - tau * combine(gu_hat, o)


def advance(d: Discretization, g: InverseOperator, u_n: BlockState, gu_n: BlockState,
            tau: float, step_index: int, solves_base: int = 0) -> StepTrace:
    """Un pas complet ; GU_{n+1} est calculé pour les diagnostics et resservira au pas suivant."""
    gram_n = gram_l2(d, u_n, u_n)
    predictor_norm_a = block_norm_a(d, skew_apply(d, g, u_n, gu_n, u_n))

    u_hat = cayley_step(d, g, u_n, gu_n, tau)
    drift = float(np.linalg.norm(gram_l2(d, u_hat, u_hat).data - gram_n.data, 'fro')) / gram_n.frobenius()

    gu_hat = g.apply(u_hat)
    u_next = corrector_step(d, g, u_hat, tau, gu_hat=gu_hat)
    gu_next = g.apply(u_next)

    gram_next = gram_l2(d, u_next, u_next)
    w, _ = sym_eig(gram_next)
    r = grassmann_gradient(d, u_next, gu_next)
    diagnostics = StepDiagnostics(
        step_index=step_index,
        energy=energy(d, u_next),
        energy_unshifted=energy(d, u_next, shifted=False),
        orth_error=gram_next.minus_identity().frobenius(),
        grad_norm=block_norm_l2(d, r),
        grad_norm_a=block_norm_a(d, r),
        subspace_grad_norm=block_norm_l2(d, subspace_gradient(d, u_next, gu_next)),
        lambda_min_gram=float(w[0]),
        lambda_max_gram=float(w[-1]),
        predictor_gram_drift=drift,
        predictor_norm_a=predictor_norm_a,
        green_solves=g.solve_count - solves_base,
    )
    return StepTrace(u_hat, gu_hat, u_next, gu_next, diagnostics)


def step(d: Discretization, g: InverseOperator, u_n: BlockState, tau: float,
         gu_n: Optional[BlockState] = None, step_index: int = 1) -> tuple[BlockState, StepDiagnostics]:
    if gu_n is None:
        gu_n = g.apply(u_n)
    trace = advance(d, g, u_n, gu_n, tau, step_index)
    return trace.u_next, trace.diagnostics


def stalled(grads: Sequence[float], window: int = STALL_WINDOW, rtol: float = STALL_RTOL,
            earlier_min: Optional[float] = None) -> bool:
    """Vrai si les `window` derniers gradients n'améliorent plus le minimum antérieur d'un facteur (1 - rtol).

    Il faut au moins 2 * window valeurs. earlier_min évite de recalculer min(grads[:-window]).
    """
    if window < 1 or len(grads) < 2 * window:
        return False
    if earlier_min is None:
        earlier_min = min(grads[:-window])
    return min(grads[-window:]) > (1.0 - rtol) * earlier_min


def check_step_size(d: Discretization, config: SchemeConfig, u0: BlockState) -> Optional[StepBounds]:
    """Compare tau aux bornes théoriques ; avertit ou rejette selon enforce_bounds."""
    if d.lambda1_est is None:
        if config.enforce_bounds == EnforceBounds.REJECT:
            raise MissingLambda1('enforce_bounds=reject exige lambda1')
        logger.warning('lambda1 non estimé, bornes de pas non vérifiées')
        return None
    bounds = compute_step_bounds(d, u0)
    exceeded = bounds.violations(config.tau)
    if exceeded:
        detail = ', '.join(f'{name}={getattr(bounds, name):.4g}' for name in exceeded)
        if config.enforce_bounds == EnforceBounds.REJECT:
            raise StepSizeRejected(f'tau={config.tau} dépasse {detail}')
        logger.warning(f'tau={config.tau} dépasse les bornes théoriques: {detail} (tau_energy est une estimation)')
    return bounds


def run(d: Discretization, g: InverseOperator, config: SchemeConfig, u0: BlockState,
        on_step: Optional[Callable[[int, BlockState], None]] = None) -> RunHistory:
    """Boucle principale : itère jusqu'à ||grad|| < eps, épuisement du budget ou divergence.

    Si ||grad|| stagne alors que le gradient du sous-espace est sous eps (ou au plancher d'arrondi),
    l'arrêt est subspace_converged : seule la contrainte oscille encore.

    Au moins un pas est toujours tenté ; green_solves est compté depuis le début du run.
    on_step(n, U_n) est appelé après chaque pas accepté.
    """
    bounds = check_step_size(d, config, u0)
    run_start = time.time()
    solves_base = g.solve_count

    u, gu = u0, g.apply(u0)
    gram0 = gram_l2(d, u0, u0)
    w0, _ = sym_eig(gram0)
    initial_energy = energy(d, u0)
    e_prev = initial_energy
    records: list[StepDiagnostics] = []
    grads: list[float] = []
    prefix_min: list[float] = []
    increases = 0
    terminated_by = TerminationReason.MAX_STEPS

    for n in range(1, config.max_steps + 1):
        try:
            trace = advance(d, g, u, gu, config.tau, n, solves_base=solves_base)
        except (NonFinite, NotPositiveDefinite, SmallSolveSingular, ValidationError) as e:
            logger.warning(f'pas {n}: {e}, arrêt sur divergence')
            terminated_by = TerminationReason.DIVERGED
            break
        diag = trace.diagnostics
        records.append(diag)
        u, gu = trace.u_next, trace.gu_next
        if on_step is not None:
            on_step(n, u)

        if n % 100 == 0:
            logger.debug(f'pas {n}: E={diag.energy:.10g}, ||O||={diag.orth_error:.3e}, '
                         f'||grad||={diag.grad_norm:.3e}')
        if diag.grad_norm < config.eps:
            terminated_by = TerminationReason.TOLERANCE_MET
            break
        grads.append(diag.grad_norm)
        prefix_min.append(min(prefix_min[-1], diag.grad_norm) if prefix_min else diag.grad_norm)
        if (diag.subspace_grad_norm < max(config.eps, STALL_GRAD_FLOOR) and len(grads) > STALL_WINDOW
                and stalled(grads, earlier_min=prefix_min[-STALL_WINDOW - 1])):
            logger.warning(f'pas {n}: ||grad|| stagne à {diag.grad_norm:.3e} avec un sous-espace convergé '
                           f'(||grad_Y||={diag.subspace_grad_norm:.3e}, ||O||={diag.orth_error:.3e})')
            terminated_by = TerminationReason.SUBSPACE_CONVERGED
            break
        if diag.energy > e_prev + DIVERGENCE_RTOL * abs(e_prev):
            increases += 1
            if increases >= DIVERGENCE_STREAK:
                logger.warning(f'pas {n}: énergie croissante sur {increases} pas consécutifs, divergence')
                terminated_by = TerminationReason.DIVERGED
                break
        else:
            increases = 0
        e_prev = diag.energy

    logger.info(f'itération terminée ({terminated_by.value}) après {len(records)} pas, '
                f'temps={round(time.time() - run_start, 2)}s, solves={g.solve_count - solves_base}')
    return RunHistory(records=records, terminated_by=terminated_by, final_state=u, tau=config.tau,
                      initial_energy=initial_energy,
                      initial_orth_error=gram0.minus_identity().frobenius(),
                      initial_lambda_min_gram=float(w0[0]), initial_lambda_max_gram=float(w0[-1]),
                      bounds=bounds)
