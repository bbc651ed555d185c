"""Oracle classique : itération de sous-espace inverse avec orthonormalisation explicite."""

import time
from typing import Optional

import numpy as np
from loguru import logger

from qseig.analysis.diagnostics import energy
from qseig.analysis.eigen_report import residual_norms
from qseig.config.exceptions import DimensionMismatch, GapTooSmall, InvalidParams, NoConvergence
from qseig.data.schemas import EigenReport
from qseig.operators.blockvec import BlockState, combine, gram_a, gram_l2, inv_sqrt, sym_eig
from qseig.operators.discretize import Discretization
from qseig.operators.greens import InverseOperator

# Colonnes supplémentaires de l'espace de travail, pour accélérer et détecter l'écart spectral
GUARD_COLUMNS = 2
GAP_RTOL = 1e-12


def _initial_workspace(d: Discretization, n: int, k: int, seed: int,
                       x0: Optional[BlockState]) -> BlockState:
    rng = np.random.default_rng(seed)
    if x0 is None:
        return BlockState(rng.standard_normal((d.ng, k)))
    if x0.ng != d.ng or x0.n > k:
        raise DimensionMismatch(f'bloc initial {x0.shape} pour Ng={d.ng}, N={n}')
    extra = rng.standard_normal((d.ng, k - x0.n))
    return BlockState(np.hstack([x0.data, extra]))


def reference_subspace_iteration(d: Discretization, g: InverseOperator, n: int, tol: float = 1e-10,
                                 max_iter: int = 5000, seed: int = 0, strict_gap: bool = False,
                                 x0: Optional[BlockState] = None) -> tuple[EigenReport, BlockState]:
    """Les N plus petits couples propres du pinceau (A, M).

    Chaque itération : X <- G X, X <- X <X,X>^{-1/2}, rotation de Rayleigh-Ritz.
    Convergence quand tous les résidus relatifs des N premières colonnes sont < tol.

    Args:
        n (int): nombre de couples
        tol (float): tolérance sur les résidus
        max_iter (int): nombre maximal d'itérations
        seed (int): graine du bloc initial aléatoire
        strict_gap (bool): lever GapTooSmall au lieu d'avertir
        x0 (BlockState, optional): bloc de départ, complété par des colonnes aléatoires

    Returns:
        tuple[EigenReport, BlockState]: rapport (valeurs non décalées) et bloc M-orthonormé des N vecteurs

    Raises:
        NoConvergence: tolérance non atteinte en max_iter itérations
    """
    if not 1 <= n <= d.ng:
        raise InvalidParams(f'N doit être dans [1, {d.ng}], reçu {n}')
    if tol <= 0:
        raise InvalidParams(f'tol doit être > 0, reçu {tol}')
    k = min(n + GUARD_COLUMNS, d.ng)
    x = _initial_workspace(d, n, k, seed, x0)
    x = combine(x, inv_sqrt(gram_l2(d, x, x)))

    ref_start = time.time()
    for it in range(1, max_iter + 1):
        x = g.apply(x)
        x = combine(x, inv_sqrt(gram_l2(d, x, x)))
        mu, q = sym_eig(gram_a(d, x, x))
        x = combine(x, q)
        head = BlockState(x.data[:, :n])
        residuals = residual_norms(d, head, mu[:n])
        if max(residuals) < tol:
            break
    else:
        raise NoConvergence(f'itération de sous-espace: résidu {max(residuals):.3e} > {tol} '
                            f'après {max_iter} itérations')

    if k > n and mu[n - 1] / mu[n] >= 1.0 - GAP_RTOL:
        msg = f'mu_N={mu[n - 1]:.15g}, mu_N+1={mu[n]:.15g}'
        if strict_gap:
            raise GapTooSmall(msg)
        logger.warning(f'écart spectral trop petit, sous-espace non unique: {msg}')

    logger.info(f'référence: {n} couples en {it} itérations, résidu max={max(residuals):.3e}, '
                f'temps={round(time.time() - ref_start, 2)}s')
    report = EigenReport(
        eigenvalues=[float(lam - d.sigma) for lam in mu[:n]],
        energy=energy(d, head, shifted=False),
        residual_norms=residuals,
    )
    return report, head
