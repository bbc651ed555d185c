import math

from loguru import logger

from qseig.analysis import invariants
from qseig.analysis.reference import reference_subspace_iteration
from qseig.config.constants import (EXIT_CODE, VERIFY_CONVERGENCE_EPS, VERIFY_CONVERGENCE_STEPS,
                                    VERIFY_DETERMINISM_STEPS, VERIFY_MAX_STEPS, VERIFY_SAMPLED_STEPS,
                                    VERIFY_SAMPLES, VERIFY_TAU_FACTOR)
from qseig.config.enums import InitMode, SolverMethod
from qseig.data.data_reader_writer import DataWriter
from qseig.data.schemas import InvariantResult, ProblemConfig, RunConfig, SchemeConfig, SolverConfig
from qseig.libs.config_reader import get_dense_max_dofs
from qseig.pipe.AbsPipe import AbsPipe
from qseig.scheme.init_state import init_state
from qseig.scheme.quasi_orthogonal import run
from qseig.scheme.step_bounds import compute_step_bounds
from qseig.user_api import build_discretization, initial_state, prepare_operator


def dense_problem(problem: ProblemConfig, max_dofs: int) -> ProblemConfig:
    """Version grossière du problème pour le chemin dense ; nombre pair de points par axe (origine évitée)."""
    if math.prod(problem.points) <= max_dofs:
        return problem
    p = int(max_dofs ** (1.0 / problem.dim) + 1e-9)
    p = max(p - p % 2, 2)
    return problem.model_copy(update={'points': tuple([p] * problem.dim)})


class VerifyPipe(AbsPipe):
    """Exécute toutes les suites d'invariants sur le problème configuré, avec un tau épinglé dans les bornes."""

    def __init__(self, config: RunConfig, writer: DataWriter):
        super().__init__(config, writer)
        self.results: list[InvariantResult] = []
        self.pinned_tau = None
        self.convergence_tau = None

    def pipe_run(self):
        d, g, n = self.d, self.g, self.config.n_eig
        u0 = initial_state(d, self.config)
        bounds = compute_step_bounds(d, u0)
        self.pinned_tau = VERIFY_TAU_FACTOR * min(bounds.tau_quasi_stiefel, bounds.tau_nonexpansion,
                                                  bounds.tau_contraction, bounds.tau_energy)
        self.convergence_tau = VERIFY_TAU_FACTOR * min(bounds.tau_quasi_stiefel, bounds.tau_nonexpansion,
                                                       bounds.tau_contraction)
        logger.info(f'vérification avec tau épinglé = {self.pinned_tau:.4g}, '
                    f'tau de convergence = {self.convergence_tau:.4g}')

        ref = self.config.reference
        ref_report, ref_block = reference_subspace_iteration(d, g, n, tol=ref.tol, max_iter=ref.max_iter,
                                                             seed=self.config.scheme.seed)
        base = self.config.scheme.model_dump()
        pinned = SchemeConfig.model_validate({
            **base,
            'tau': self.pinned_tau,
            'max_steps': min(self.config.scheme.max_steps, VERIFY_MAX_STEPS),
        })
        converging = SchemeConfig.model_validate({
            **base,
            'tau': self.convergence_tau,
            'eps': min(self.config.scheme.eps, VERIFY_CONVERGENCE_EPS),
            'max_steps': VERIFY_CONVERGENCE_STEPS,
        })
        history = run(d, g, pinned, u0)
        converged = run(d, g, converging, u0)
        reference_energy = 0.5 * sum(lam + d.sigma for lam in ref_report.eigenvalues)

        results = []
        results += invariants.operator_invariants(d, n=n, seed=pinned.seed)
        results += invariants.discretize_invariants(d)
        results += invariants.blockvec_invariants(d, n=n, seed=pinned.seed)
        results += invariants.green_invariants(d, g, n=n, seed=pinned.seed)
        results += invariants.spectral_bound_invariants(d, g, n, samples=VERIFY_SAMPLES, seed=pinned.seed)
        results += invariants.trajectory_invariants(history, reference_energy=reference_energy)
        results += [r.model_copy(update={'name': f'{r.name} (run convergent)'})
                    for r in invariants.trajectory_invariants(converged, reference_energy=reference_energy)]
        results += invariants.convergence_invariants(converged)
        results += invariants.determinism_invariants(
            d, g, converging.model_copy(update={'max_steps': VERIFY_DETERMINISM_STEPS}), u0)
        results += invariants.sampled_step_invariants(d, g, u0, self.pinned_tau, steps=VERIFY_SAMPLED_STEPS)
        results += invariants.oracle_invariants(d, g, ref_block, ref_report.eigenvalues)
        results += self._dense_suites(pinned.seed)
        self.results = results

    def _dense_suites(self, seed: int) -> list[InvariantResult]:
        problem = dense_problem(self.config.problem, get_dense_max_dofs())
        if problem is not self.config.problem:
            logger.info(f'chemin dense sur une grille réduite {problem.points}')
        dd = build_discretization(problem)
        gg = prepare_operator(dd, SolverConfig(method=SolverMethod.DIRECT))
        n = min(self.config.n_eig, 2)
        u0 = init_state(dd, n, InitMode.QUASI_STIEFEL_SCALED, seed=seed)
        results = invariants.continuous_invariants(dd, gg, u0)
        bounds = compute_step_bounds(dd, u0)
        u_orth = init_state(dd, n, InitMode.ORTHONORMAL, seed=seed)
        # tau * ||G|| <= 0.05
        tau = min(0.05 * dd.lambda1_est, bounds.tau_quasi_stiefel)
        results.append(invariants.one_step_order(dd, gg, u_orth, tau))
        return results

    def pipe_report(self) -> dict:
        failed = [r for r in self.results if r.gating and not r.passed]
        for r in self.results:
            if r.passed:
                continue
            if r.gating:
                logger.error(f'invariant violé: {r.name} (marge {r.slack:.3e}) {r.detail}')
            else:
                logger.warning(f'propriété non bloquante violée: {r.name} (marge {r.slack:.3e}) {r.detail}')
        self.exit_code = EXIT_CODE.INVARIANT_FAILED if failed else EXIT_CODE.OK
        self.report = self.header()
        self.report.update({
            'pinned_tau': self.pinned_tau,
            'convergence_tau': self.convergence_tau,
            'passed': not failed,
            'results': [r.model_dump(mode='json') for r in self.results],
        })
        return self.report
