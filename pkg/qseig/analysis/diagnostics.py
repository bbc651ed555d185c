
from typing import Optional

import numpy as np

from qseig.config.exceptions import DimensionMismatch, ZeroReference
from qseig.operators.blockvec import (BlockState, block_norm_a, block_norm_l2, combine,
                                      gram_a, gram_l2, inv_sqrt)
from qseig.operators.discretize import Discretization
from qseig.operators.greens import InverseOperator


def energy(d: Discretization, u: BlockState, shifted: bool = True) -> float:
    """E(U) = 1/2 tr <U,U>_a ; la version non décalée retire (sigma/2) tr <U,U>."""
    e = 0.5 * float(np.trace(gram_a(d, u, u).data))
    if shifted or d.sigma == 0.0:
        return e
    return e - 0.5 * d.sigma * float(np.trace(gram_l2(d, u, u).data))


def orthogonality_error(d: Discretization, u: BlockState) -> float:
    """||<U,U> - I||_F."""
    return gram_l2(d, u, u).minus_identity().frobenius()


def grassmann_gradient(d: Discretization, u: BlockState, gu: BlockState) -> BlockState:
    """GU - U <GU,U>."""
    return gu - combine(u, gram_l2(d, gu, u))


def subspace_gradient(d: Discretization, u: BlockState, gu: BlockState) -> BlockState:
    """Gradient de Grassmann au représentant orthonormé Y = U P^{-1/2}, P = <U,U>.

    (GU - U P^{-1} <GU,U>) P^{-1/2} ; ne dépend que du sous-espace engendré par U,
    sans application supplémentaire de G.
    """
    p = gram_l2(d, u, u)
    p_inv_sqrt = inv_sqrt(p)
    coeff = np.linalg.solve(p.data, gram_l2(d, gu, u).data)
    return combine(gu - combine(u, coeff), p_inv_sqrt)


def grad_norms(d: Discretization, g: InverseOperator, u: BlockState,
               gu: Optional[BlockState] = None) -> tuple[float, float]:
    """Normes L2 et a du gradient de Grassmann de E_G.

    Args:
        gu (BlockState, optional): G U déjà calculé, sinon une application de G est faite.

    Returns:
        tuple[float, float]: (norme L2, norme a)
    """
    if gu is None:
        gu = g.apply(u)
    r = grassmann_gradient(d, u, gu)
    return block_norm_l2(d, r), block_norm_a(d, r)


def eigenvector_error(u_n: BlockState, u_end: BlockState, d: Discretization) -> float:
    """err_{U_n} = ||U_n - U_end|| / ||U_end|| en norme L2 pondérée."""
    if u_n.shape != u_end.shape:
        raise DimensionMismatch(f'{u_n.shape} contre {u_end.shape}')
    ref = block_norm_l2(d, u_end)
    if ref < 1e-14:
        raise ZeroReference(f'||U_end|| = {ref:.3e}')
    return block_norm_l2(d, u_n - u_end) / ref
