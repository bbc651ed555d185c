"""Bornes de pas garantissant stabilité, décroissance d'énergie et contraction de l'orthogonalité."""

import math

from qseig.analysis.diagnostics import energy
from qseig.data.schemas import StepBounds
from qseig.operators.blockvec import BlockState, gram_l2, sym_eig
from qseig.operators.discretize import Discretization
from qseig.utils.annotations import RequireLambda1


def energy_decay_constant(energy0: float, n: int, lambda1: float, lambda_max: float,
                          c_omega: float) -> float:
    """c_e = 2 (sqrt(2) E0 / lambda1 + c_omega^2 sqrt(E0 lambda_max)) sqrt(N E0 lambda_max) + 1/2."""
    return (2.0 * (math.sqrt(2.0) * energy0 / lambda1 + c_omega ** 2 * math.sqrt(energy0 * lambda_max))
            * math.sqrt(n * energy0 * lambda_max) + 0.5)


def bounds_from_scalars(lambda1: float, lambda_max: float, energy0: float, n: int) -> StepBounds:
    # Constante de Poincaré approchée par 1/sqrt(lambda1) : ||u||^2 <= ||u||_a^2 / lambda1.
    c_omega = 1.0 / math.sqrt(lambda1)
    c_e = energy_decay_constant(energy0, n, lambda1, lambda_max, c_omega)
    return StepBounds(
        lambda1=lambda1,
        lambda_max_gram=lambda_max,
        energy0=energy0,
        c_omega=c_omega,
        c_e=c_e,
        tau_nonexpansion=2.0 * lambda1 / lambda_max,
        tau_quasi_stiefel=lambda1 / (2.0 * lambda_max),
        tau_contraction=min(lambda1 / (3.0 * lambda_max), energy0),
        tau_energy=min(lambda1 / (2.0 * c_e * lambda_max),
                       lambda1 / (2.0 * math.sqrt(2.0 * energy0 * lambda_max))),
    )


@RequireLambda1
def compute_step_bounds(d: Discretization, u0: BlockState) -> StepBounds:
    """Évalue les quatre bornes de tau pour l'état initial U_0 (pinceau décalé)."""
    w, _ = sym_eig(gram_l2(d, u0, u0))
    return bounds_from_scalars(d.lambda1_est, float(w[-1]), energy(d, u0), u0.n)
