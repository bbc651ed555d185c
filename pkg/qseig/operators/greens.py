"""Opérateur inverse G = A^{-1} diag(M), le seul noyau coûteux de la méthode."""

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from loguru import logger

from qseig.config.constants import CG_TOL_MAX, INNER_TOL_DEFAULT
from qseig.config.enums import Preconditioner, SolverMethod
from qseig.config.exceptions import (DimensionMismatch, InvalidParams, NoConvergence,
                                     NotPositiveDefinite)
from qseig.libs.config_reader import get_direct_solver_max_dofs, get_thread_count
from qseig.operators.blockvec import BlockState
from qseig.operators.discretize import Discretization

SIGMA_HINT = 'augmenter problem.sigma pour rendre le pinceau décalé défini positif'


class InverseOperator:
    """État préparé pour appliquer G à des états-blocs.

    Partageable en lecture seule après préparation ; seul solve_count est modifié, sous verrou.
    """

    def __init__(self, d: Discretization, method: SolverMethod, tol: float = INNER_TOL_DEFAULT,
                 max_iter: int = 10000, preconditioner: Preconditioner = Preconditioner.JACOBI,
                 threads: Optional[int] = None):
        if method == SolverMethod.AUTO:
            method = SolverMethod.DIRECT if d.ng <= get_direct_solver_max_dofs() else SolverMethod.CG
        if method == SolverMethod.CG and not 0 < tol <= CG_TOL_MAX:
            raise InvalidParams(f'tolérance CG dans (0, {CG_TOL_MAX}], reçu {tol}')
        self.d = d
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.preconditioner = preconditioner
        self.threads = threads if threads is not None else get_thread_count()
        self.solve_count = 0
        self._lock = threading.Lock()
        self._lu = None
        self._precond = None

    def prepare(self) -> 'InverseOperator':
        prepare_start = time.time()
        if self.method == SolverMethod.DIRECT:
            self._factorize()
        else:
            self._init_cg()
        logger.info(f'préparation de G ({self.method.value}): Ng={self.d.ng}, '
                    f'temps={round(time.time() - prepare_start, 3)}s')
        return self

    def _factorize(self):
        # LU symétrique sans pivotage numérique : U = D L^T, l'inertie de A se lit sur diag(U).
        try:
            lu = spla.splu(self.d.a.tocsc(), permc_spec='MMD_AT_PLUS_A', diag_pivot_thresh=0.0,
                           options=dict(SymmetricMode=True))
        except RuntimeError as e:
            raise NotPositiveDefinite(f'factorisation impossible ({e})', hint=SIGMA_HINT)
        if np.array_equal(lu.perm_r, lu.perm_c):
            pivots = lu.U.diagonal()
            if np.any(pivots <= 0):
                n_neg = int(np.sum(pivots <= 0))
                raise NotPositiveDefinite(f'{n_neg} pivot(s) non positif(s)', hint=SIGMA_HINT)
        else:
            logger.warning('permutations ligne/colonne distinctes, contrôle de positivité par Lanczos')
            self._check_lowest_eigenvalue()
        self._lu = lu

    def _check_lowest_eigenvalue(self):
        lowest = spla.eigsh(self.d.a, k=1, which='SA', tol=1e-6, return_eigenvectors=False)[0]
        if lowest <= 0:
            raise NotPositiveDefinite(f'valeur propre minimale de A = {lowest:.3e}', hint=SIGMA_HINT)

    def _init_cg(self):
        self._check_lowest_eigenvalue()
        if self.preconditioner == Preconditioner.JACOBI:
            self._precond = sps.diags(1.0 / self.d.a.diagonal(), format='csr')

    def _count(self, n: int):
        with self._lock:
            self.solve_count += n

    def _cg_column(self, b: np.ndarray) -> np.ndarray:
        if not np.any(b):
            return np.zeros_like(b)
        x, info = spla.cg(self.d.a, b, rtol=self.tol, atol=0.0, maxiter=self.max_iter, M=self._precond)
        if info > 0:
            raise NoConvergence(f'CG après {info} itérations (tol={self.tol})')
        elif info < 0:
            raise NotPositiveDefinite(f'rupture du CG (info={info})', hint=SIGMA_HINT)
        return x

    def apply(self, u: BlockState) -> BlockState:
        """Résout A X = diag(M) U colonne par colonne."""
        if u.ng != self.d.ng:
            raise DimensionMismatch(f'le bloc a {u.ng} lignes, G attend {self.d.ng}')
        rhs = self.d.m[:, None] * u.data
        if self.method == SolverMethod.DIRECT:
            x = self._lu.solve(rhs)
        elif self.threads > 1 and u.n > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                columns = list(pool.map(self._cg_column, rhs.T))
            x = np.stack(columns, axis=1)
        else:
            x = np.stack([self._cg_column(b) for b in rhs.T], axis=1)
        self._count(u.n)
        return BlockState(x)

    def __repr__(self):
        return f'InverseOperator(method={self.method.value}, tol={self.tol}, solves={self.solve_count})'


def prepare(d: Discretization, method: SolverMethod = SolverMethod.AUTO, tol: float = INNER_TOL_DEFAULT,
            max_iter: int = 10000, preconditioner: Preconditioner = Preconditioner.JACOBI,
            threads: Optional[int] = None) -> InverseOperator:
    """Prépare G pour une discrétisation.

    Raises:
        NotPositiveDefinite: A n'est pas définie positive, sigma est trop petit
    """
    return InverseOperator(d, method, tol=tol, max_iter=max_iter, preconditioner=preconditioner,
                           threads=threads).prepare()


def apply_green(g: InverseOperator, u: BlockState) -> BlockState:
    return g.apply(u)
