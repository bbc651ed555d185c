"""Algèbre des états-blocs : N-uplets de fonctions de grille et matrices de Gram."""

from typing import TYPE_CHECKING, Union

import numpy as np
import scipy.linalg

from qseig.config.constants import SPD_RTOL
from qseig.config.exceptions import (DimensionMismatch, NoConvergence, NonFinite,
                                     NotPositiveDefinite)

if TYPE_CHECKING:
    from qseig.operators.discretize import Discretization


class BlockState:
    """Matrice dense Ng x N ; la colonne j porte les coefficients de u_j."""

    __slots__ = ('data',)

    def __init__(self, data):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise DimensionMismatch(f'un état-bloc est une matrice, reçu ndim={data.ndim}')
        if not np.all(np.isfinite(data)):
            raise NonFinite('état-bloc contenant NaN/Inf')
        self.data = data

    @property
    def ng(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def copy(self) -> 'BlockState':
        return BlockState(self.data.copy())

    def __add__(self, other: 'BlockState') -> 'BlockState':
        _check_same_shape(self, other)
        return BlockState(self.data + other.data)

    def __sub__(self, other: 'BlockState') -> 'BlockState':
        _check_same_shape(self, other)
        return BlockState(self.data - other.data)

    def __mul__(self, scalar: float) -> 'BlockState':
        return BlockState(self.data * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> 'BlockState':
        return BlockState(-self.data)

    def __repr__(self):
        return f'BlockState(ng={self.ng}, n={self.n})'


class GramMatrix:
    """Matrice k x k de produits scalaires entre colonnes de blocs.

    Les appariements d'un bloc avec lui-même sont symétrisés à la construction.
    """

    __slots__ = ('data', 'symmetric')

    def __init__(self, data, symmetric: bool = False):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionMismatch(f'une matrice de Gram est 2D, reçu ndim={data.ndim}')
        if not np.all(np.isfinite(data)):
            raise NonFinite('matrice de Gram contenant NaN/Inf')
        if symmetric:
            if data.shape[0] != data.shape[1]:
                raise DimensionMismatch(f'matrice symétrique non carrée {data.shape}')
            data = 0.5 * (data + data.T)
        self.data = data
        self.symmetric = symmetric

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def T(self) -> 'GramMatrix':
        return GramMatrix(self.data.T, symmetric=self.symmetric)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.data, 'fro'))

    def minus_identity(self) -> 'GramMatrix':
        return GramMatrix(self.data - np.eye(self.data.shape[0]), symmetric=self.symmetric)

    def __repr__(self):
        return f'GramMatrix(shape={self.shape}, symmetric={self.symmetric})'


def _check_same_shape(u: BlockState, v: BlockState):
    if u.shape != v.shape:
        raise DimensionMismatch(f'{u.shape} contre {v.shape}')


def _check_rows(d: 'Discretization', u: BlockState):
    if u.ng != d.ng:
        raise DimensionMismatch(f'le bloc a {u.ng} lignes, la discrétisation {d.ng}')


def _as_array(coeff: Union[GramMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(coeff, GramMatrix):
        return coeff.data
    return np.asarray(coeff, dtype=np.float64)


def gram_l2(d: 'Discretization', u: BlockState, v: BlockState) -> GramMatrix:
    """Gram L2 pondéré par la masse : C_U^T diag(M) C_V."""
    _check_rows(d, u)
    _check_rows(d, v)
    same = u is v
    return GramMatrix(u.data.T @ (d.m[:, None] * v.data), symmetric=same)


def gram_a(d: 'Discretization', u: BlockState, v: BlockState) -> GramMatrix:
    """Gram de la forme bilinéaire a : C_U^T A C_V."""
    _check_rows(d, u)
    _check_rows(d, v)
    same = u is v
    return GramMatrix(u.data.T @ (d.a @ v.data), symmetric=same)


def combine(u: BlockState, coeff: Union[GramMatrix, np.ndarray]) -> BlockState:
    """Combinaison à droite U * coeff."""
    c = _as_array(coeff)
    if c.ndim != 2 or c.shape[0] != u.n:
        raise DimensionMismatch(f'bloc à {u.n} colonnes, coefficients {c.shape}')
    return BlockState(u.data @ c)


def sym_eig(s: Union[GramMatrix, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Décomposition spectrale d'une petite matrice symétrique.

    Valeurs propres croissantes ; chaque vecteur propre a son coefficient de plus grand module positif.
    """
    a = _as_array(s)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f'matrice carrée attendue, reçu {a.shape}')
    a = 0.5 * (a + a.T)
    try:
        w, q = scipy.linalg.eigh(a)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(f'eigh: {e}')
    idx = np.argmax(np.abs(q), axis=0)
    signs = np.sign(q[idx, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return w, q * signs


def inv_sqrt(s: Union[GramMatrix, np.ndarray]) -> GramMatrix:
    """S^{-1/2} d'une matrice symétrique définie positive."""
    w, q = sym_eig(s)
    if w[-1] <= 0 or w[0] <= SPD_RTOL * w[-1]:
        raise NotPositiveDefinite(f'lambda_min={w[0]:.3e}, lambda_max={w[-1]:.3e}')
    return GramMatrix((q / np.sqrt(w)) @ q.T, symmetric=True)


def block_norm_l2(d: 'Discretization', u: BlockState) -> float:
    return float(np.sqrt(max(np.trace(gram_l2(d, u, u).data), 0.0)))


def block_norm_a(d: 'Discretization', u: BlockState) -> float:
    return float(np.sqrt(max(np.trace(gram_a(d, u, u).data), 0.0)))


def subspace_distance_a(d: 'Discretization', u: BlockState, v: BlockState) -> float:
    """min_Q ||U - V Q||_a sur les matrices orthogonales Q.

    Le Q optimal est le facteur polaire de <V,U>_a ; la distance est ensuite évaluée
    directement sur U - V Q, ce qui vaut sqrt(||U||_a^2 + ||V||_a^2 - 2 ||<V,U>_a||_*).
    """
    _check_same_shape(u, v)
    b = gram_a(d, v, u).data
    p, _, rt = np.linalg.svd(b)
    return block_norm_a(d, u - combine(v, p @ rt))
