"""Extraction de Rayleigh-Ritz et erreurs relatives sur les valeurs propres."""

from typing import Optional, Sequence

import numpy as np

from qseig.analysis.diagnostics import energy
from qseig.config.constants import RANK_RTOL
from qseig.config.exceptions import (DimensionMismatch, NotPositiveDefinite, RankDeficient,
                                     ZeroReference)
from qseig.data.schemas import EigenReport
from qseig.operators.blockvec import BlockState, combine, gram_l2, sym_eig
from qseig.operators.discretize import Discretization, apply_mass, apply_stiffness
from qseig.operators.greens import InverseOperator


def ritz_pairs(d: Discretization, u: BlockState, gu: BlockState) -> tuple[np.ndarray, BlockState]:
    """Paires de Ritz du pinceau décalé restreint à span(U).

    Résout <U,GU> y = (1/rho) <U,U> y via S^{-1/2} <U,GU> S^{-1/2}, S = <U,U>.

    Returns:
        tuple[np.ndarray, BlockState]: rho croissants (pinceau décalé) et vecteurs M-orthonormés
    """
    s = gram_l2(d, u, u)
    ws, qs = sym_eig(s)
    if ws[-1] <= 0 or ws[0] < RANK_RTOL * ws[-1]:
        raise RankDeficient(f'lambda_min(<U,U>)={ws[0]:.3e}, lambda_max={ws[-1]:.3e}')
    s_inv_half = (qs / np.sqrt(ws)) @ qs.T
    ugu = gram_l2(d, u, gu).data
    t = s_inv_half @ (0.5 * (ugu + ugu.T)) @ s_inv_half
    wt, qt = sym_eig(t)
    if wt[0] <= 0:
        raise NotPositiveDefinite(f'<U,GU> restreint non défini positif (min={wt[0]:.3e})')
    # Les plus grandes valeurs de G donnent les plus petites valeurs du pinceau.
    order = np.argsort(-wt, kind='stable')
    rho = 1.0 / wt[order]
    return rho, combine(u, s_inv_half @ qt[:, order])


def residual_norms(d: Discretization, v: BlockState, rho: np.ndarray) -> list[float]:
    """||A v_i - rho_i M v_i|| / ||M v_i|| pour chaque colonne."""
    av = apply_stiffness(d, v).data
    mv = apply_mass(d, v).data
    r = av - mv * rho[None, :]
    return [float(x) for x in np.linalg.norm(r, axis=0) / np.linalg.norm(mv, axis=0)]


def relative_errors(values: Sequence[float], reference: Sequence[float]) -> list[float]:
    """err_i = |lambda_i - lambda_i^*| / |lambda_i^*|."""
    if len(values) != len(reference):
        raise DimensionMismatch(f'{len(values)} valeurs contre {len(reference)} de référence')
    errors = []
    for lam, ref in zip(values, reference):
        if abs(ref) < 1e-14:
            raise ZeroReference(f'valeur propre de référence {ref:.3e}')
        errors.append(abs(lam - ref) / abs(ref))
    return errors


def extract_eigenvalues(d: Discretization, g: InverseOperator, u: BlockState,
                        gu: Optional[BlockState] = None,
                        reference: Optional[Sequence[float]] = None) -> EigenReport:
    """Valeurs propres (non décalées) extraites d'un bloc U de rang plein.

    Args:
        d (Discretization): discrétisation
        g (InverseOperator): G préparé
        u (BlockState): bloc courant, pas forcément orthonormé
        gu (BlockState, optional): G U déjà calculé
        reference (Sequence[float], optional): valeurs de référence non décalées, pour err_i

    Returns:
        EigenReport: valeurs croissantes, erreurs relatives, énergie et résidus
    """
    if gu is None:
        gu = g.apply(u)
    rho, v = ritz_pairs(d, u, gu)
    eigenvalues = [float(x - d.sigma) for x in rho]
    return EigenReport(
        eigenvalues=eigenvalues,
        relative_errors=relative_errors(eigenvalues, reference) if reference is not None else None,
        energy=energy(d, u, shifted=False),
        residual_norms=residual_norms(d, v, rho),
    )
