"""Vérifications exécutables des propriétés démontrées de la méthode.

Chaque fonction renvoie des InvariantResult ; slack >= 0 signifie que la propriété est respectée.
"""

import math
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sps

from qseig.analysis.continuous import closed_form_solution, orthogonality_envelope, rk4_integrate
from qseig.analysis.diagnostics import energy, grassmann_gradient, orthogonality_error
from qseig.analysis.eigen_report import extract_eigenvalues, ritz_pairs
from qseig.analysis.rate_fit import fit_exponential_rate
from qseig.config.enums import InitMode, PotentialKind, TerminationReason
from qseig.config.exceptions import InsufficientData
from qseig.data.schemas import DomainSpec, GridSpec, InvariantResult, PotentialSpec, SchemeConfig
from qseig.operators.blockvec import (BlockState, block_norm_a, block_norm_l2, gram_a, gram_l2, inv_sqrt,
                                      subspace_distance_a, sym_eig)
from qseig.operators.discretize import Discretization, assemble
from qseig.operators.greens import InverseOperator
from qseig.scheme.init_state import init_state
from qseig.scheme.quasi_orthogonal import RunHistory, advance, run, step
from qseig.utils.annotations import RequireLambda1


def _result(name: str, slack: float, detail: str = '', gating: bool = True) -> InvariantResult:
    return InvariantResult(name=name, passed=bool(slack >= 0), slack=float(slack), detail=detail, gating=gating)


def _random_block(d: Discretization, n: int, seed: int) -> BlockState:
    return BlockState(np.random.default_rng(seed).standard_normal((d.ng, n)))


def operator_invariants(d: Discretization, n: int = 3, seed: int = 0) -> list[InvariantResult]:
    """Symétrie exacte de A et positivité des poids de masse."""
    u = _random_block(d, n, seed)
    v = _random_block(d, n, seed + 1)
    asym = abs(d.a - d.a.T).max() if d.a.nnz else 0.0
    mixed = abs(float(np.trace(gram_a(d, u, v).data)) - float(np.trace(gram_a(d, v, u).data)))
    scale = abs(d.a).max() * np.linalg.norm(u.data) * np.linalg.norm(v.data)
    return [
        _result('symétrie exacte de A', -float(asym), f'max|A - A^T| = {asym:.3e}'),
        _result('symétrie de la forme a', 1e-12 * scale - mixed, f'écart = {mixed:.3e}'),
        _result('poids de masse positifs', float(d.m.min()), f'min M = {d.m.min():.3e}'),
    ]


def green_invariants(d: Discretization, g: InverseOperator, n: int = 3, seed: int = 0) -> list[InvariantResult]:
    """Auto-adjonction (GU,V) = (U,GV), dualité (GU,V)_a = (U,V), positivité de <U,GU>."""
    u = _random_block(d, n, seed)
    v = _random_block(d, n, seed + 1)
    gu, gv = g.apply(u), g.apply(v)

    lhs = gram_l2(d, gu, v).data
    adj = float(np.linalg.norm(lhs - gram_l2(d, u, gv).data))
    duality_ref = gram_l2(d, u, v).data
    dual = float(np.linalg.norm(gram_a(d, gu, v).data - duality_ref))
    w, _ = sym_eig(gram_l2(d, u, gu))
    return [
        _result('auto-adjonction de G', 1e-9 * max(np.linalg.norm(lhs), 1e-300) - adj, f'écart = {adj:.3e}'),
        _result('dualité (GU,V)_a = (U,V)', 1e-9 * max(np.linalg.norm(duality_ref), 1e-300) - dual,
                f'écart = {dual:.3e}'),
        _result('positivité de <U,GU>', float(w[0]), f'lambda_min = {w[0]:.3e}'),
    ]


@RequireLambda1
def spectral_bound_invariants(d: Discretization, g: InverseOperator, n: int, samples: int = 200,
                              seed: int = 0) -> list[InvariantResult]:
    """1/(2E(U)) <= lambda(<U,GU>) <= lambda_max(<U,U>)/lambda1 sur des états quasi-Stiefel aléatoires."""
    lower_slack = np.inf
    upper_slack = np.inf
    for s in range(samples):
        u = init_state(d, n, InitMode.QUASI_STIEFEL_SCALED, seed=seed + s)
        w, _ = sym_eig(gram_l2(d, u, g.apply(u)))
        ws, _ = sym_eig(gram_l2(d, u, u))
        lower_slack = min(lower_slack, w[0] - 1.0 / (2.0 * energy(d, u)) + 1e-9)
        upper_slack = min(upper_slack, ws[-1] / d.lambda1_est + 1e-9 - w[-1])
    return [
        _result('borne inférieure de <U,GU>', lower_slack, f'{samples} tirages'),
        _result('borne supérieure de <U,GU>', upper_slack, f'{samples} tirages'),
    ]


def trajectory_invariants(history: RunHistory, reference_energy: Optional[float] = None) -> list[InvariantResult]:
    """Propriétés pas à pas d'un historique ; une propriété n'est vérifiée que si tau respecte sa borne.

    Args:
        history (RunHistory): historique avec bornes (lambda1 estimé)
        reference_energy (float, optional): énergie décalée du bloc oracle, pour l'ordre des énergies
    """
    records = history.records
    tau = history.tau
    bounds = history.bounds
    results = []

    drift = history.series('predictor_gram_drift')
    results.append(_result('conservation de Gram du prédicteur', 1e-9 - float(drift.max()),
                           f'dérive relative max = {drift.max():.3e}'))

    if history.initial_orth_error <= 1e-12:
        orth = history.series('orth_error')
        results.append(_result('invariance orthonormale', 1e-8 - float(orth.max()),
                               f'||O|| max = {orth.max():.3e}'))

    if bounds is not None:
        lam_min = history.series('lambda_min_gram')
        if history.initial_lambda_min_gram >= 1.0 - 1e-12 and tau < bounds.tau_quasi_stiefel:
            results.append(_result('préservation quasi-Stiefel', float(lam_min.min()) - (1.0 - 1e-8),
                                   f'lambda_min = {lam_min.min():.15g}'))

        if tau < bounds.tau_nonexpansion:
            lam_max = np.concatenate([[history.initial_lambda_max_gram], history.series('lambda_max_gram')])
            slack = float(np.min(lam_max[:-1] + 1e-8 - lam_max[1:]))
            results.append(_result('non-expansion', slack, f'tau < {bounds.tau_nonexpansion:.4g}'))

        if tau < bounds.tau_energy:
            e = np.concatenate([[history.initial_energy], history.series('energy')])
            slack = float(np.min(e[:-1] + 1e-10 * np.abs(e[:-1]) - e[1:]))
            results.append(_result("décroissance de l'énergie", slack, f'tau < {bounds.tau_energy:.4g}'))

            # E_n - E_{n+1} >= (lambda1 / (2 lambda_max) - c_e tau) tau ||A_{U_n} U_n||_a^2
            coeff = (bounds.lambda1 / (2.0 * bounds.lambda_max_gram) - bounds.c_e * tau) * tau
            decay = e[:-1] - e[1:]
            required = coeff * history.series('predictor_norm_a') ** 2
            slack = float(np.min(decay - required + 1e-10 * np.abs(e[:-1])))
            results.append(_result("décroissance quantitative de l'énergie", slack,
                                   f'coefficient = {coeff:.4g}, c_e = {bounds.c_e:.4g}'))

        if tau < bounds.tau_contraction:
            o2 = np.concatenate([[history.initial_orth_error], history.series('orth_error')]) ** 2
            factor = 1.0 - tau / history.initial_energy
            slack = float(np.min(factor * o2[:-1] + 1e-10 - o2[1:]))
            results.append(_result("contraction de l'orthogonalité", slack, f'omega = {factor:.6g}'))

    if reference_energy is not None and records and records[-1].lambda_min_gram >= 1.0 - 1e-9:
        final = records[-1].energy
        results.append(_result('ordre des énergies', final - reference_energy + 1e-8 * max(1.0, abs(reference_energy)),
                               f'E final = {final:.12g}, E ref = {reference_energy:.12g}'))
    return results


def blockvec_invariants(d: Discretization, n: int = 3, seed: int = 0, triples: int = 5) -> list[InvariantResult]:
    """Symétrie des appariements, cohérence des normes, inv_sqrt puis carré, inégalité triangulaire."""
    u = _random_block(d, n, seed)
    v = _random_block(d, n, seed + 1)

    pair_l2 = float(np.abs(gram_l2(d, u, v).data - gram_l2(d, v, u).data.T).max())
    pair_a = float(np.abs(gram_a(d, u, v).data - gram_a(d, v, u).data.T).max())
    scale_l2 = 1e-12 * float(np.abs(gram_l2(d, u, v).data).max())
    scale_a = 1e-12 * float(np.abs(gram_a(d, u, v).data).max())

    trace_uu = float(np.trace(gram_l2(d, u, u).data))
    zero_norm = block_norm_l2(d, BlockState(np.zeros((d.ng, n))))
    norm_gap = abs(block_norm_l2(d, u) ** 2 - trace_uu)

    s = gram_l2(d, u, u)
    x = inv_sqrt(s).data
    rebuilt = np.linalg.inv(x @ x)
    square_gap = float(np.linalg.norm(rebuilt - s.data) / np.linalg.norm(s.data))

    triangle = np.inf
    for k in range(triples):
        a, b, c = (_random_block(d, n, seed + 10 + 3 * k + j) for j in range(3))
        d_ac = subspace_distance_a(d, a, c)
        d_ab = subspace_distance_a(d, a, b)
        d_bc = subspace_distance_a(d, b, c)
        triangle = min(triangle, d_ab + d_bc + 1e-9 * max(1.0, d_ac) - d_ac)
    return [
        _result('symétrie de l\'appariement L2', scale_l2 - pair_l2, f'écart = {pair_l2:.3e}'),
        _result('symétrie de l\'appariement a', scale_a - pair_a, f'écart = {pair_a:.3e}'),
        _result('cohérence des normes', min(trace_uu, 1e-14 * trace_uu - norm_gap, -zero_norm),
                f'tr<U,U> = {trace_uu:.6g}, ||0|| = {zero_norm:.1e}'),
        _result('inv_sqrt puis carré', 1e-9 - square_gap, f'écart relatif = {square_gap:.3e}'),
        _result('inégalité triangulaire de distance_a', triangle, f'{triples} triplets'),
    ]


def _first_fd_eigenvalue(points: int) -> float:
    d = assemble(DomainSpec(dim=1, lower=(0.0,), upper=(1.0,)), GridSpec(points_per_dim=(points,)),
                 PotentialSpec(kind=PotentialKind.ZERO), c_lap=1.0)
    return float(scipy.linalg.eigh(d.dense_a(), np.diag(d.m), eigvals_only=True, subset_by_index=[0, 0])[0])


def discretize_invariants(d: Discretization, shift: float = 1.0) -> list[InvariantResult]:
    """Équivariance du décalage sur le problème donné, consistance O(h^2) sur des problèmes modèles."""
    shifted = assemble(d.domain, d.grid, d.potential, d.c_lap, d.sigma + shift)
    diff = (shifted.a - d.a - shift * sps.diags(d.m)).tocsr()
    gap = float(abs(diff).max()) if diff.nnz else 0.0
    results = [_result('équivariance du décalage', 1e-12 * float(abs(d.a).max()) * max(1.0, shift) - gap,
                       f'max|A(s+{shift:g}) - A(s) - {shift:g} M| = {gap:.3e}')]

    # -u'' sur (0, 1) : l'erreur sur pi^2 est divisée par 4 quand h est divisé par 2
    errors = [math.pi ** 2 - _first_fd_eigenvalue(p) for p in (10, 21)]
    ratio = errors[0] / errors[1]
    results.append(_result('consistance O(h^2)', 0.25 - abs(ratio - 4.0),
                           f'erreurs = {errors[0]:.3e}, {errors[1]:.3e}, rapport = {ratio:.3f}'))

    # Oscillateur harmonique 2D à h = 0.5 : 1, 2, 2 à 0.1 près
    harmonic = assemble(DomainSpec(dim=2, lower=(-5.5, -5.5), upper=(5.5, 5.5)), GridSpec(points_per_dim=(21, 21)),
                        PotentialSpec(kind=PotentialKind.HARMONIC, coeff=0.5), c_lap=0.5)
    values = scipy.linalg.eigh(harmonic.dense_a(), np.diag(harmonic.m), eigvals_only=True,
                               subset_by_index=[0, 2])
    worst = float(np.max(np.abs(values - np.array([1.0, 2.0, 2.0]))))
    results.append(_result('consistance harmonique (h = 0.5)', 0.1 - worst, f'écart max = {worst:.3e}'))
    return results


def determinism_invariants(d: Discretization, g: InverseOperator, config: SchemeConfig,
                           u0: BlockState) -> list[InvariantResult]:
    """Deux runs identiques produisent un historique et un état final identiques bit à bit."""
    first = run(d, g, config, u0)
    second = run(d, g, config, u0)
    same_records = [r.model_dump() for r in first.records] == [r.model_dump() for r in second.records]
    same_state = np.array_equal(first.final_state.data, second.final_state.data)
    return [_result('déterminisme du run', 0.0 if same_records and same_state else -1.0,
                    f'{first.steps} pas, historiques {"identiques" if same_records else "différents"}, '
                    f'états {"identiques" if same_state else "différents"}')]


def convergence_invariants(history: RunHistory, orth_tol: float = 1e-9, r_squared_min: float = 0.98,
                           slope_slack: float = 0.05) -> list[InvariantResult]:
    """Run mené jusqu'à la tolérance : ||O|| final, et décroissance exponentielle de ||grad||_a et ||O||."""
    converged = history.terminated_by == TerminationReason.TOLERANCE_MET
    results = [_result('convergence du run', 0.0 if converged else -1.0,
                       f'{history.terminated_by.value} en {history.steps} pas')]
    if not history.records:
        return results
    final_orth = history.records[-1].orth_error
    results.append(_result('orthogonalité finale', orth_tol - final_orth, f'||O|| final = {final_orth:.3e}'))

    omega = 1.0 - history.tau / history.initial_energy
    slope_bound = 0.5 * math.log(omega) + slope_slack if omega > 0 else -math.inf
    for name in ('grad_norm_a', 'orth_error'):
        try:
            fit = fit_exponential_rate(history.series(name), series_name=name)
        except InsufficientData as e:
            results.append(_result(f'taux exponentiel de {name}', -1.0, str(e)))
            continue
        slack = min(fit.r_squared - r_squared_min, -fit.slope_per_step)
        detail = f'pente = {fit.slope_per_step:.4g}, R2 = {fit.r_squared:.4f}'
        if name == 'orth_error':
            slack = min(slack, slope_bound - fit.slope_per_step)
            detail += f', borne = {slope_bound:.4g}'
        results.append(_result(f'taux exponentiel de {name}', slack, detail))
    return results


def sampled_step_invariants(d: Discretization, g: InverseOperator, u0: BlockState, tau: float,
                            steps: int = 20) -> list[InvariantResult]:
    """Monotonie du correcteur et des valeurs de Ritz, sur des pas échantillonnés.

    La forme en trace de la monotonie du correcteur est bloquante. La forme matricielle
    (ordre de Loewner), la décroissance du gradient au correcteur et la monotonie de chaque
    valeur de Ritz ne sont que rapportées : -(CO + OC) est indéfinie dès que O est singulière.
    """
    u, gu = u0, g.apply(u0)
    trace_slack = np.inf
    loewner_slack = np.inf
    grad_decay = np.inf
    ritz = []
    for n in range(1, steps + 1):
        trace = advance(d, g, u, gu, tau, n)
        before = gram_l2(d, trace.u_hat, trace.gu_hat).data
        after = gram_l2(d, trace.u_next, trace.gu_next).data
        scale = 1e-9 * max(1.0, np.linalg.norm(before))
        trace_slack = min(trace_slack, scale - float(np.trace(after - before)))
        w, _ = sym_eig(after - before)
        loewner_slack = min(loewner_slack, scale - w[-1])

        g_hat = block_norm_a(d, grassmann_gradient(d, trace.u_hat, trace.gu_hat)) ** 2
        g_next = block_norm_a(d, grassmann_gradient(d, trace.u_next, trace.gu_next)) ** 2
        grad_decay = min(grad_decay, g_hat + 1e-9 * max(1.0, g_hat) - g_next)

        rho, _ = ritz_pairs(d, trace.u_next, trace.gu_next)
        ritz.append(rho)
        u, gu = trace.u_next, trace.gu_next

    tail = np.array(ritz[len(ritz) // 2:])
    if len(tail) > 1:
        rise = tail[1:] - tail[:-1] - 1e-9 * np.maximum(1.0, np.abs(tail[:-1]))
        ritz_slack = -float(rise.max())
    else:
        ritz_slack = 0.0
    detail = f'{steps} pas, tau={tau:.4g}'
    return [
        _result('monotonie du correcteur (trace)', trace_slack, detail),
        _result('monotonie du correcteur (Loewner)', loewner_slack, detail, gating=False),
        _result('décroissance du gradient au correcteur', grad_decay, detail, gating=False),
        _result('monotonie des valeurs de Ritz', ritz_slack, 'dernière moitié des pas', gating=False),
    ]


def continuous_invariants(d: Discretization, g: InverseOperator, u0: BlockState,
                          times: Sequence[float] = (0.5, 1.0, 2.0), dt: float = 1e-3) -> list[InvariantResult]:
    """Solution exacte contre RK4, et enveloppe exponentielle de l'erreur d'orthogonalité (chemin dense)."""
    results = []
    energy0 = energy(d, u0)
    u_rk, t_prev = u0, 0.0
    for t in sorted(times):
        exact = closed_form_solution(d, u0, t)
        u_rk = rk4_integrate(d, g, u_rk, t - t_prev, dt)
        t_prev = t
        dist = subspace_distance_a(d, exact, u_rk)
        results.append(_result(f'solution exacte contre RK4 (t={t})', 1e-6 - dist, f'distance_a = {dist:.3e}'))
        orth = orthogonality_error(d, exact)
        envelope = orthogonality_envelope(d, u0, t, energy0)
        results.append(_result(f'enveloppe d\'orthogonalité continue (t={t})', envelope + 1e-6 - orth,
                               f'||O|| = {orth:.3e}, enveloppe = {envelope:.3e}'))
    return results


def one_step_order(d: Discretization, g: InverseOperator, u0: BlockState, tau: float) -> InvariantResult:
    """Un pas du schéma contre RK4 sur [0, tau] : diviser tau par deux réduit l'écart d'au moins 3.5."""
    gaps = []
    for t in (tau, 0.5 * tau):
        u_scheme, _ = step(d, g, u0, t)
        u_ref = rk4_integrate(d, g, u0, t, t / 100.0)
        gaps.append(block_norm_l2(d, u_scheme - u_ref))
    ratio = gaps[0] / max(gaps[1], 1e-300)
    return _result('ordre du pas contre le modèle continu', ratio - 3.5,
                   f'écarts = {gaps[0]:.3e}, {gaps[1]:.3e}, rapport = {ratio:.2f}')


def oracle_invariants(d: Discretization, g: InverseOperator, reference: BlockState,
                      reference_values: Sequence[float]) -> list[InvariantResult]:
    """L'extraction de Rayleigh-Ritz reproduit les valeurs de l'oracle."""
    report = extract_eigenvalues(d, g, reference)
    rel = max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(report.eigenvalues, reference_values))
    return [_result("cohérence de l'oracle", 1e-10 - rel, f'écart relatif max = {rel:.3e}')]
