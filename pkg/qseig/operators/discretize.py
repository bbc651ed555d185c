"""Assemblage de l'opérateur de Schrödinger discret -c_lap * Laplacien + V (Dirichlet homogène)."""

import math
import time
from functools import reduce
from typing import TYPE_CHECKING, Optional

import numpy as np
import scipy.sparse as sps
from loguru import logger

from qseig.config.constants import COULOMB_ORIGIN_RADIUS
from qseig.config.enums import PotentialKind
from qseig.config.exceptions import (DimensionMismatch, GridTooSmall, InvalidParams,
                                     NoConvergence, SingularPotential)
from qseig.data.schemas import DomainSpec, GridSpec, PotentialSpec
from qseig.operators.blockvec import BlockState

if TYPE_CHECKING:
    from qseig.operators.greens import InverseOperator


class Discretization:
    """Paire (A, M) : A creuse symétrique, M poids de quadrature diagonaux.

    Immuable après assemblage, à l'exception de lambda1_est renseigné par estimate_lambda1.
    """

    def __init__(self, a: sps.csr_matrix, m: np.ndarray, sigma: float, c_lap: float,
                 grid: GridSpec, domain: DomainSpec, potential: PotentialSpec, nodes: np.ndarray):
        self.a = a
        self.m = m
        self.sigma = sigma
        self.c_lap = c_lap
        self.grid = grid
        self.domain = domain
        self.potential = potential
        self.nodes = nodes
        self.lambda1_est: Optional[float] = None

    @property
    def ng(self) -> int:
        return self.a.shape[0]

    @property
    def spacing(self) -> tuple[float, ...]:
        return self.grid.spacing(self.domain)

    def dense_a(self) -> np.ndarray:
        return self.a.toarray()

    def __repr__(self):
        return (f'Discretization(dim={self.domain.dim}, points={self.grid.points_per_dim}, '
                f'potential={self.potential.kind.value}, sigma={self.sigma})')


def grid_nodes(domain: DomainSpec, grid: GridSpec) -> np.ndarray:
    """Coordonnées des noeuds intérieurs, (Ng, dim), axe 0 le plus lent."""
    axes = [lo + h * np.arange(1, n + 1)
            for lo, h, n in zip(domain.lower, grid.spacing(domain), grid.points_per_dim)]
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([x.ravel() for x in mesh], axis=1)


def evaluate_potential(pot: PotentialSpec, nodes: np.ndarray) -> np.ndarray:
    r2 = np.sum(nodes * nodes, axis=1)
    if pot.kind == PotentialKind.ZERO:
        return np.zeros(nodes.shape[0])
    elif pot.kind == PotentialKind.HARMONIC:
        return pot.coeff * r2
    elif pot.kind == PotentialKind.SOFT_COULOMB:
        if pot.softening == 0.0 and np.any(np.sqrt(r2) < COULOMB_ORIGIN_RADIUS):
            raise SingularPotential("un noeud coïncide avec l'origine, softening > 0 requis")
        return -pot.charge / np.sqrt(r2 + pot.softening ** 2)
    else:
        raise InvalidParams(f'potentiel inconnu {pot.kind}')


def _second_difference(n: int, h: float) -> sps.csr_matrix:
    return sps.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1],
                     format='csr') / (h * h)


def fd_laplacian(grid: GridSpec, spacing: tuple[float, ...]) -> sps.csr_matrix:
    """Laplacien (2d+1) points (signe positif, -Delta_h) par sommes de Kronecker."""
    sizes = grid.points_per_dim
    lap = None
    for k, (n, h) in enumerate(zip(sizes, spacing)):
        factors = [sps.identity(s, format='csr') for s in sizes]
        factors[k] = _second_difference(n, h)
        term = reduce(lambda x, y: sps.kron(x, y, format='csr'), factors)
        lap = term if lap is None else lap + term
    return lap.tocsr()


def assemble(domain: DomainSpec, grid: GridSpec, pot: PotentialSpec, c_lap: float,
             sigma: float = 0.0) -> Discretization:
    """Assemble A = c_lap * L_h * w + diag(V * w) + sigma * diag(w), avec w = prod(h).

    Args:
        domain (DomainSpec): boîte du domaine
        grid (GridSpec): points intérieurs par axe
        pot (PotentialSpec): potentiel
        c_lap (float): coefficient du Laplacien (> 0)
        sigma (float): décalage spectral (>= 0)

    Returns:
        Discretization: les valeurs propres du pinceau (A, M) approchent lambda_i + sigma
    """
    if c_lap <= 0:
        raise InvalidParams(f'c_lap doit être > 0, reçu {c_lap}')
    if sigma < 0:
        raise InvalidParams(f'sigma doit être >= 0, reçu {sigma}')
    if len(grid.points_per_dim) != domain.dim:
        raise DimensionMismatch(f'grille {grid.points_per_dim} pour un domaine de dimension {domain.dim}')
    if min(grid.points_per_dim) < 2 or grid.ng < 4:
        raise GridTooSmall(f'{grid.points_per_dim} (au moins 2 points par axe et 4 au total)')

    assemble_start = time.time()
    spacing = grid.spacing(domain)
    weight = math.prod(spacing)
    nodes = grid_nodes(domain, grid)
    v = evaluate_potential(pot, nodes)

    m = np.full(grid.ng, weight)
    a = ((c_lap * weight) * fd_laplacian(grid, spacing)
         + sps.diags(v * m, format='csr')
         + sigma * sps.diags(m, format='csr'))
    a = a.tocsr()
    a.sort_indices()

    logger.info(f"assemblage: Ng={grid.ng}, h={tuple(round(h, 6) for h in spacing)}, "
                f"nnz={a.nnz}, temps={round(time.time() - assemble_start, 3)}s")
    return Discretization(a, m, float(sigma), float(c_lap), grid, domain, pot, nodes)


def apply_stiffness(d: Discretization, u: BlockState) -> BlockState:
    if u.ng != d.ng:
        raise DimensionMismatch(f'le bloc a {u.ng} lignes, la discrétisation {d.ng}')
    return BlockState(d.a @ u.data)


def apply_mass(d: Discretization, u: BlockState) -> BlockState:
    if u.ng != d.ng:
        raise DimensionMismatch(f'le bloc a {u.ng} lignes, la discrétisation {d.ng}')
    return BlockState(d.m[:, None] * u.data)


def estimate_lambda1(d: Discretization, g: 'InverseOperator', tol: float = 1e-10,
                     max_iter: int = 2000) -> float:
    """Plus petite valeur propre du pinceau décalé (A, M) par itération inverse.

    Le résultat est stocké dans d.lambda1_est ; il inclut sigma.
    """
    if tol <= 0:
        raise InvalidParams(f'tol doit être > 0, reçu {tol}')
    # L'état fondamental est de signe constant : le vecteur constant le recouvre toujours.
    x = BlockState(np.ones((d.ng, 1)))
    rho_prev = None
    for it in range(1, max_iter + 1):
        x = g.apply(x)
        norm = math.sqrt(float(x.data[:, 0] @ (d.m * x.data[:, 0])))
        x = BlockState(x.data / norm)
        rho = float(x.data[:, 0] @ (d.a @ x.data[:, 0]))
        if rho_prev is not None and abs(rho - rho_prev) < tol * abs(rho):
            d.lambda1_est = rho
            logger.info(f'lambda1 (pinceau décalé) = {rho:.12g} après {it} itérations')
            return rho
        rho_prev = rho
    raise NoConvergence(f'itération inverse pour lambda1 après {max_iter} itérations')
