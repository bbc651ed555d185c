import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qseig.config.enums import PotentialKind, SolverMethod
from qseig.config.exceptions import (DimensionMismatch, GridTooSmall, InvalidParams,
                                     SingularPotential)
from qseig.data.schemas import DomainSpec, GridSpec, PotentialSpec
from qseig.operators.blockvec import BlockState
from qseig.operators.discretize import (apply_mass, apply_stiffness, assemble, estimate_lambda1,
                                        grid_nodes)
from qseig.operators.greens import prepare


def _domain1d():
    return DomainSpec(dim=1, lower=(0.0,), upper=(1.0,))


def test_assemble_1d_laplacian_entries(lap1d):
    h = 1.0 / 21
    a = lap1d.a.toarray()
    assert lap1d.ng == 20
    assert_allclose(np.diag(a), 2.0 / h, rtol=1e-13)
    assert_allclose(np.diag(a, 1), -1.0 / h, rtol=1e-13)
    assert_allclose(lap1d.m, h, rtol=1e-13)


def test_assemble_is_exactly_symmetric(harmonic2d):
    diff = harmonic2d.a - harmonic2d.a.T
    assert diff.count_nonzero() == 0


def test_lowest_eigenvalue_matches_discrete_formula(lap1d, g1d):
    h = 1.0 / 21
    expected = 4.0 / h ** 2 * math.sin(math.pi * h / 2) ** 2
    assert lap1d.lambda1_est == pytest.approx(expected, rel=1e-9)


def test_shift_moves_the_pencil_by_sigma():
    pot = PotentialSpec(kind=PotentialKind.ZERO)
    base = assemble(_domain1d(), GridSpec(points_per_dim=(20,)), pot, c_lap=1.0)
    shifted = assemble(_domain1d(), GridSpec(points_per_dim=(20,)), pot, c_lap=1.0, sigma=2.5)
    g0 = prepare(base, method=SolverMethod.DIRECT)
    g1 = prepare(shifted, method=SolverMethod.DIRECT)
    assert estimate_lambda1(shifted, g1) == pytest.approx(estimate_lambda1(base, g0) + 2.5, rel=1e-9)


def test_second_order_consistency():
    # Erreur sur lambda1 = pi^2 divisée par ~4 quand h est divisé par ~2.
    pot = PotentialSpec(kind=PotentialKind.ZERO)
    errors = []
    for n in (19, 39):
        d = assemble(_domain1d(), GridSpec(points_per_dim=(n,)), pot, c_lap=1.0)
        g = prepare(d, method=SolverMethod.DIRECT)
        errors.append(abs(estimate_lambda1(d, g) - math.pi ** 2))
    assert 3.5 < errors[0] / errors[1] < 4.5


def test_grid_nodes_axis_zero_slowest():
    domain = DomainSpec(dim=2, lower=(0.0, 0.0), upper=(3.0, 3.0))
    nodes = grid_nodes(domain, GridSpec(points_per_dim=(2, 2)))
    assert_allclose(nodes, [[1, 1], [1, 2], [2, 1], [2, 2]])


def test_harmonic_potential_on_diagonal():
    domain = DomainSpec(dim=1, lower=(-2.5,), upper=(2.5,))
    d = assemble(domain, GridSpec(points_per_dim=(4,)), PotentialSpec(kind=PotentialKind.HARMONIC, coeff=0.5),
                 c_lap=0.5)
    h = 1.0
    x = np.array([-1.5, -0.5, 0.5, 1.5])
    expected = 0.5 * 2.0 / h + 0.5 * x ** 2 * h
    assert_allclose(d.a.diagonal(), expected, rtol=1e-13)


def test_coulomb_at_origin_needs_softening():
    domain = DomainSpec(dim=1, lower=(-1.0,), upper=(1.0,))
    with pytest.raises(SingularPotential):
        assemble(domain, GridSpec(points_per_dim=(5,)), PotentialSpec(kind=PotentialKind.SOFT_COULOMB),
                 c_lap=0.5, sigma=1.0)
    d = assemble(domain, GridSpec(points_per_dim=(5,)),
                 PotentialSpec(kind=PotentialKind.SOFT_COULOMB, softening=0.1), c_lap=0.5, sigma=1.0)
    assert np.all(np.isfinite(d.a.data))


@pytest.mark.parametrize('points', [(1,), (3,)])
def test_grid_too_small(points):
    with pytest.raises(GridTooSmall):
        assemble(_domain1d(), GridSpec(points_per_dim=points), PotentialSpec(), c_lap=1.0)


def test_invalid_parameters():
    grid = GridSpec(points_per_dim=(10,))
    with pytest.raises(InvalidParams):
        assemble(_domain1d(), grid, PotentialSpec(), c_lap=0.0)
    with pytest.raises(InvalidParams):
        assemble(_domain1d(), grid, PotentialSpec(), c_lap=1.0, sigma=-1.0)
    with pytest.raises(DimensionMismatch):
        assemble(_domain1d(), GridSpec(points_per_dim=(10, 10)), PotentialSpec(), c_lap=1.0)


def test_domain_spec_validation():
    with pytest.raises(ValueError):
        DomainSpec(dim=1, lower=(1.0,), upper=(0.0,))
    with pytest.raises(ValueError):
        DomainSpec(dim=2, lower=(0.0,), upper=(1.0,))


def test_apply_stiffness_and_mass(lap1d):
    u = BlockState(np.ones((lap1d.ng, 2)))
    assert_allclose(apply_mass(lap1d, u).data, lap1d.m[:, None] * np.ones((20, 2)))
    assert_allclose(apply_stiffness(lap1d, u).data, lap1d.a @ np.ones((20, 2)))
    with pytest.raises(DimensionMismatch):
        apply_mass(lap1d, BlockState(np.ones((5, 2))))
