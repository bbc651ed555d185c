"""Modèle continu dU/dt = GU - U <GU,U> : solution exacte dense et intégrateur RK4 de référence."""

import math

import numpy as np
import scipy.linalg
from loguru import logger

from qseig.analysis.diagnostics import grassmann_gradient
from qseig.config.exceptions import BracketNotSPD, InvalidParams, NotPositiveDefinite
from qseig.operators.blockvec import BlockState, GramMatrix, combine, gram_l2, inv_sqrt, sym_eig
from qseig.operators.discretize import Discretization
from qseig.operators.greens import InverseOperator
from qseig.utils.annotations import DenseOnly


def _pencil_eigh(d: Discretization) -> tuple[np.ndarray, np.ndarray]:
    try:
        mu, phi = scipy.linalg.eigh(d.dense_a(), np.diag(d.m))
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f'décomposition dense du pinceau impossible ({e})')
    if mu[0] <= 0:
        raise NotPositiveDefinite(f'plus petite valeur du pinceau {mu[0]:.3e}')
    return mu, phi


@DenseOnly
def closed_form_solution(d: Discretization, u0: BlockState, t: float) -> BlockState:
    """U(t) = exp(Gt) U0 [I - <U0,U0> + <U0, exp(2Gt) U0>]^{-1/2}, représentant avec Q(t) = I.

    G = A^{-1} M a pour valeurs propres 1/mu_i sur les vecteurs M-orthonormés du pinceau ;
    le résultat n'est défini qu'à un facteur orthogonal à droite près.

    Raises:
        BracketNotSPD: le crochet n'est pas défini positif à cet instant
    """
    mu, phi = _pencil_eigh(d)
    c = phi.T @ (d.m[:, None] * u0.data)
    growth = np.exp(t / mu)
    exp_u0 = BlockState(phi @ (growth[:, None] * c))
    bracket = np.eye(u0.n) + c.T @ ((growth ** 2 - 1.0)[:, None] * c)
    bracket = GramMatrix(bracket, symmetric=True)
    w, _ = sym_eig(bracket)
    if w[0] <= 0:
        raise BracketNotSPD(f't={t}, lambda_min={w[0]:.3e}')
    return combine(exp_u0, inv_sqrt(bracket))


def rk4_integrate(d: Discretization, g: InverseOperator, u0: BlockState, t_end: float,
                  dt: float) -> BlockState:
    """Runge-Kutta classique d'ordre 4 à pas fixe sur le flot de gradient.

    Le dernier pas est ajusté pour atteindre exactement t_end ; chaque étage coûte N résolutions.
    """
    if dt <= 0 or t_end < dt:
        raise InvalidParams(f'dt > 0 et t_end >= dt requis, reçu dt={dt}, t_end={t_end}')
    n_steps = math.ceil(t_end / dt - 1e-9)
    h = t_end / n_steps

    def rhs(u: BlockState) -> BlockState:
        return grassmann_gradient(d, u, g.apply(u))

    u = u0
    for _ in range(n_steps):
        k1 = rhs(u)
        k2 = rhs(u + (0.5 * h) * k1)
        k3 = rhs(u + (0.5 * h) * k2)
        k4 = rhs(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    logger.debug(f'RK4: {n_steps} pas de {h:.3e} jusqu\'à t={t_end}')
    return u


def orthogonality_envelope(d: Discretization, u0: BlockState, t: float, energy0: float) -> float:
    """||<U0,U0> - I||_F exp(-t / E(U0)), majorant continu de l'erreur d'orthogonalité."""
    return gram_l2(d, u0, u0).minus_identity().frobenius() * math.exp(-t / energy0)
