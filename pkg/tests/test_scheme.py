import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qseig.analysis.diagnostics import energy, orthogonality_error
from qseig.analysis.eigen_report import extract_eigenvalues
from qseig.analysis.rate_fit import fit_exponential_rate
from qseig.analysis.reference import reference_subspace_iteration
from qseig.config.enums import EnforceBounds, InitMode, PotentialKind, TerminationReason
from qseig.config.exceptions import (DimensionMismatch, InvalidParams, MissingLambda1,
                                     StepSizeRejected)
from qseig.data.schemas import DomainSpec, GridSpec, PotentialSpec, SchemeConfig
from qseig.operators.blockvec import BlockState, gram_l2, sym_eig
from qseig.operators.discretize import assemble
from qseig.operators.greens import apply_green
from qseig.scheme.init_state import init_state
from qseig.scheme.quasi_orthogonal import (advance, cayley_step, check_step_size, corrector_step,
                                           run, skew_apply, stalled, step)
from qseig.scheme.step_bounds import bounds_from_scalars, compute_step_bounds


def _discrete_laplace_1d(k, n=20):
    h = 1.0 / (n + 1)
    return 4.0 / h ** 2 * math.sin(k * math.pi * h / 2) ** 2


class TestInitState:

    def test_quasi_stiefel_scaled(self, lap1d):
        u0 = init_state(lap1d, 3, InitMode.QUASI_STIEFEL_SCALED, seed=4)
        w, _ = sym_eig(gram_l2(lap1d, u0, u0))
        assert w[0] == pytest.approx(1.0, rel=1e-12)
        assert w[-1] > 1.0

    def test_orthonormal(self, lap1d):
        u0 = init_state(lap1d, 3, InitMode.ORTHONORMAL, seed=4)
        assert orthogonality_error(lap1d, u0) < 1e-12

    def test_seed_is_reproducible(self, lap1d):
        a = init_state(lap1d, 2, InitMode.RAW_RANDOM, seed=9)
        b = init_state(lap1d, 2, InitMode.RAW_RANDOM, seed=9)
        assert np.array_equal(a.data, b.data)

    def test_from_state(self, lap1d):
        state = BlockState(np.ones((lap1d.ng, 2)))
        assert init_state(lap1d, 2, InitMode.FROM_STATE, state=state) is state
        with pytest.raises(DimensionMismatch):
            init_state(lap1d, 3, InitMode.FROM_STATE, state=state)
        with pytest.raises(InvalidParams):
            init_state(lap1d, 2, InitMode.FROM_STATE)

    @pytest.mark.parametrize('n', [0, 21])
    def test_block_size_out_of_range(self, lap1d, n):
        with pytest.raises(InvalidParams):
            init_state(lap1d, n, InitMode.RAW_RANDOM)


class TestSingleStep:

    def test_skew_apply_is_antisymmetric(self, harmonic2d, g2d):
        u = init_state(harmonic2d, 3, InitMode.RAW_RANDOM, seed=1)
        v = init_state(harmonic2d, 3, InitMode.RAW_RANDOM, seed=2)
        gu = apply_green(g2d, u)
        lhs = gram_l2(harmonic2d, skew_apply(harmonic2d, g2d, u, gu, v), v).data
        assert_allclose(lhs + lhs.T, 0.0, atol=1e-10 * np.abs(lhs).max())

    def test_cayley_preserves_gram(self, harmonic2d, g2d):
        u = init_state(harmonic2d, 3, InitMode.QUASI_STIEFEL_SCALED, seed=1)
        gu = apply_green(g2d, u)
        for tau in (0.01, 0.1, 1.0, 10.0):
            u_hat = cayley_step(harmonic2d, g2d, u, gu, tau)
            assert_allclose(gram_l2(harmonic2d, u_hat, u_hat).data, gram_l2(harmonic2d, u, u).data,
                            rtol=1e-10, atol=1e-10)

    def test_cayley_rejects_non_positive_tau(self, lap1d, g1d):
        u = init_state(lap1d, 2, InitMode.ORTHONORMAL)
        with pytest.raises(InvalidParams):
            cayley_step(lap1d, g1d, u, apply_green(g1d, u), 0.0)

    def test_cayley_matches_the_implicit_midpoint_fixed_point(self, lap1d, g1d):
        u = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=7)
        gu = apply_green(g1d, u)
        tau = 0.1
        v = u
        for _ in range(200):
            v = u + tau * skew_apply(lap1d, g1d, u, gu, 0.5 * (v + u))
        expected = cayley_step(lap1d, g1d, u, gu, tau)
        assert_allclose(expected.data, v.data, rtol=0, atol=1e-12 * np.abs(u.data).max())

    def test_eigenvector_block_is_a_fixed_point(self, lap1d, g1d):
        x = lap1d.nodes[:, 0]
        u = BlockState(np.sqrt(2.0) * np.stack([np.sin(math.pi * x), np.sin(2.0 * math.pi * x)], axis=1))
        assert orthogonality_error(lap1d, u) < 1e-12
        u_next, diag = step(lap1d, g1d, u, 0.5)
        assert_allclose(u_next.data, u.data, rtol=0, atol=1e-12)
        assert diag.grad_norm < 1e-12
        assert diag.subspace_grad_norm < 1e-12

    def test_corrector_is_identity_on_orthonormal_blocks(self, lap1d, g1d):
        u = init_state(lap1d, 2, InitMode.ORTHONORMAL, seed=3)
        assert_allclose(corrector_step(lap1d, g1d, u, 0.5).data, u.data, atol=1e-12)

    def test_orthonormal_blocks_stay_orthonormal(self, harmonic2d, g2d):
        u = init_state(harmonic2d, 3, InitMode.ORTHONORMAL, seed=5)
        for n in range(1, 6):
            u, diag = step(harmonic2d, g2d, u, 0.1, step_index=n)
            assert diag.orth_error < 1e-10
            assert diag.predictor_gram_drift < 1e-11

    def test_corrector_shrinks_the_gram_towards_identity(self, harmonic2d, g2d):
        u = init_state(harmonic2d, 3, InitMode.QUASI_STIEFEL_SCALED, seed=5)
        trace = advance(harmonic2d, g2d, u, apply_green(g2d, u), 0.05, 1)
        assert trace.diagnostics.orth_error < orthogonality_error(harmonic2d, trace.u_hat)
        assert trace.diagnostics.energy < energy(harmonic2d, u)


class TestStepBounds:

    def test_bounds_from_scalars(self):
        b = bounds_from_scalars(lambda1=4.0, lambda_max=2.0, energy0=10.0, n=2)
        assert b.c_omega == pytest.approx(0.5)
        assert b.tau_nonexpansion == pytest.approx(4.0)
        assert b.tau_quasi_stiefel == pytest.approx(1.0)
        assert b.tau_contraction == pytest.approx(4.0 / 6.0)
        c_e = 2.0 * (math.sqrt(2.0) * 10.0 / 4.0 + 0.25 * math.sqrt(20.0)) * math.sqrt(40.0) + 0.5
        assert b.c_e == pytest.approx(c_e)
        assert b.tau_energy == pytest.approx(min(4.0 / (4.0 * c_e), 4.0 / (2.0 * math.sqrt(40.0))))
        assert b.violations(0.9) == ['tau_contraction', 'tau_energy']

    def test_contraction_bound_capped_by_energy(self):
        b = bounds_from_scalars(lambda1=30.0, lambda_max=1.0, energy0=2.0, n=1)
        assert b.tau_contraction == pytest.approx(2.0)

    def test_compute_step_bounds_needs_lambda1(self):
        d = assemble(DomainSpec(dim=1, lower=(0.0,), upper=(1.0,)), GridSpec(points_per_dim=(10,)),
                     PotentialSpec(kind=PotentialKind.ZERO), c_lap=1.0)
        u0 = init_state(d, 2, InitMode.QUASI_STIEFEL_SCALED)
        with pytest.raises(MissingLambda1):
            compute_step_bounds(d, u0)
        with pytest.raises(MissingLambda1):
            check_step_size(d, SchemeConfig(tau=0.1, enforce_bounds=EnforceBounds.REJECT), u0)
        assert check_step_size(d, SchemeConfig(tau=0.1), u0) is None

    def test_reject_mode(self, lap1d, g1d):
        u0 = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED)
        bounds = compute_step_bounds(lap1d, u0)
        with pytest.raises(StepSizeRejected):
            check_step_size(lap1d, SchemeConfig(tau=2.0 * bounds.tau_nonexpansion,
                                                enforce_bounds=EnforceBounds.REJECT), u0)
        tau = 0.5 * bounds.tau_energy
        assert check_step_size(lap1d, SchemeConfig(tau=tau, enforce_bounds=EnforceBounds.REJECT), u0) == bounds


class TestRun:

    def test_converges_to_the_discrete_laplacian(self, lap1d, g1d):
        u0 = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=1)
        history = run(lap1d, g1d, SchemeConfig(tau=1.0, eps=1e-8, max_steps=5000), u0)
        assert history.terminated_by == TerminationReason.TOLERANCE_MET
        assert history.records[-1].grad_norm < 1e-8
        report = extract_eigenvalues(lap1d, g1d, history.final_state)
        assert_allclose(report.eigenvalues, [_discrete_laplace_1d(1), _discrete_laplace_1d(2)], rtol=1e-9)
        assert history.records[-1].orth_error < 1e-6

    def test_green_solve_accounting(self, lap1d, g1d):
        u0 = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=1)
        history = run(lap1d, g1d, SchemeConfig(tau=1.0, max_steps=4), u0)
        assert [r.green_solves for r in history.records] == [6, 10, 14, 18]

    def test_max_steps(self, lap1d, g1d):
        u0 = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=1)
        history = run(lap1d, g1d, SchemeConfig(tau=1.0, max_steps=3), u0)
        assert history.terminated_by == TerminationReason.MAX_STEPS
        assert history.steps == 3
        assert [r.step_index for r in history.records] == [1, 2, 3]

    def test_on_step_callback(self, lap1d, g1d):
        u0 = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=1)
        seen = []
        history = run(lap1d, g1d, SchemeConfig(tau=1.0, max_steps=5), u0, on_step=lambda n, u: seen.append(n))
        assert seen == [1, 2, 3, 4, 5]
        assert history.steps == 5

    def test_harmonic_matches_oracle(self, harmonic2d, g2d):
        u0 = init_state(harmonic2d, 3, InitMode.QUASI_STIEFEL_SCALED, seed=42)
        history = run(harmonic2d, g2d, SchemeConfig(tau=0.1, eps=1e-7, max_steps=20000), u0)
        assert history.terminated_by == TerminationReason.TOLERANCE_MET
        ref, _ = reference_subspace_iteration(harmonic2d, g2d, 3)
        report = extract_eigenvalues(harmonic2d, g2d, history.final_state, reference=ref.eigenvalues)
        assert max(report.relative_errors) < 1e-8
        assert_allclose(report.eigenvalues, [1.0, 2.0, 2.0], atol=0.1)
        assert history.records[-1].orth_error < 1e-6

    def test_huge_step_does_not_raise(self, lap1d, g1d):
        u0 = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=1)
        bounds = compute_step_bounds(lap1d, u0)
        history = run(lap1d, g1d, SchemeConfig(tau=100.0 * bounds.tau_nonexpansion, max_steps=50), u0)
        assert history.terminated_by in (TerminationReason.DIVERGED, TerminationReason.MAX_STEPS,
                                         TerminationReason.TOLERANCE_MET)

    def test_runs_are_bitwise_reproducible(self, lap1d, g1d):
        config = SchemeConfig(tau=1.0, max_steps=30, seed=3)
        first = run(lap1d, g1d, config, init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=3))
        second = run(lap1d, g1d, config, init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=3))
        assert [r.model_dump() for r in first.records] == [r.model_dump() for r in second.records]
        assert np.array_equal(first.final_state.data, second.final_state.data)

    def test_gradient_decays_exponentially(self, lap1d, g1d):
        u0 = init_state(lap1d, 2, InitMode.QUASI_STIEFEL_SCALED, seed=1)
        history = run(lap1d, g1d, SchemeConfig(tau=1.0, eps=1e-10, max_steps=5000), u0)
        assert history.terminated_by == TerminationReason.TOLERANCE_MET
        fit = fit_exponential_rate(history.series('grad_norm_a'), series_name='grad_norm_a')
        assert fit.slope_per_step < 0
        assert fit.r_squared >= 0.98
        orth = fit_exponential_rate(history.series('orth_error'), series_name='orth_error')
        assert orth.slope_per_step <= 0.5 * math.log(1.0 - history.tau / history.initial_energy) + 0.05

    def test_stalled_gradient_with_converged_subspace(self, harmonic2d, g2d):
        # tau * mu_1 ~ 1 : l'erreur d'orthogonalité oscille avec une période 2 et ||grad|| ne descend plus
        u0 = init_state(harmonic2d, 3, InitMode.QUASI_STIEFEL_SCALED, seed=42)
        history = run(harmonic2d, g2d, SchemeConfig(tau=1.0, eps=1e-7, max_steps=3000), u0)
        assert history.terminated_by in (TerminationReason.SUBSPACE_CONVERGED, TerminationReason.TOLERANCE_MET)
        assert history.steps < 3000
        assert history.records[-1].subspace_grad_norm < 1e-7
        ref, _ = reference_subspace_iteration(harmonic2d, g2d, 3)
        report = extract_eigenvalues(harmonic2d, g2d, history.final_state, reference=ref.eigenvalues)
        assert max(report.relative_errors) < 1e-8


class TestStall:

    def test_needs_two_windows(self):
        assert not stalled([1.0] * 99, window=50)
        assert stalled([1.0] * 100, window=50)

    def test_decreasing_series_is_not_stalled(self):
        grads = [0.9 ** k for k in range(200)]
        assert not stalled(grads, window=50)

    def test_oscillation_at_a_floor_is_stalled(self):
        grads = [0.5 ** k for k in range(15)] + [1e-6, 2e-6] * 45
        assert stalled(grads, window=50)

    def test_relative_tolerance(self):
        grads = [1.0] * 50 + [0.9995] * 50
        assert stalled(grads, window=50, rtol=1e-3)
        assert not stalled(grads, window=50, rtol=1e-4)

    def test_earlier_minimum_shortcut(self):
        grads = [1.0] * 100
        assert stalled(grads, window=50, earlier_min=1.0)
        assert not stalled(grads, window=50, earlier_min=0.5)
