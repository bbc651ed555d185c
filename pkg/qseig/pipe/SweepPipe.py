from typing import Sequence

from loguru import logger

from qseig.analysis.eigen_report import extract_eigenvalues
from qseig.config.constants import EXIT_CODE, SWEEP_ERR_FLOOR, SWEEP_TAU_FACTOR
from qseig.config.exceptions import InvalidParams
from qseig.data.data_reader_writer import DataWriter
from qseig.data.history_writer import sweep_csv
from qseig.data.schemas import RunConfig, SchemeConfig
from qseig.pipe.AbsPipe import AbsPipe
from qseig.pipe.SolvePipe import TERMINATION_EXIT_CODE
from qseig.scheme.quasi_orthogonal import run
from qseig.user_api import compute_reference, initial_state


def tau_independence(errors: Sequence[Sequence[float]]) -> list[bool]:
    """Par indice i : max_tau err_i <= 10 * min_tau err_i (erreurs planchers à 1e-12)."""
    verdicts = []
    for i in range(len(errors[0])):
        column = [max(errs[i], SWEEP_ERR_FLOOR) for errs in errors]
        verdicts.append(max(column) <= SWEEP_TAU_FACTOR * min(column))
    return verdicts


class SweepPipe(AbsPipe):
    """Balayage en tau depuis le même état initial ; vérifie l'indépendance de la précision en tau."""

    def __init__(self, config: RunConfig, writer: DataWriter, taus: Sequence[float]):
        super().__init__(config, writer)
        if len(taus) < 2:
            raise InvalidParams(f'au moins deux valeurs de tau requises, reçu {list(taus)}')
        if any(t <= 0 for t in taus):
            raise InvalidParams(f'tau doit être > 0, reçu {list(taus)}')
        self.taus = list(taus)
        self.runs: list[dict] = []

    def pipe_run(self):
        ref_report, _ = compute_reference(self.d, self.g, self.config, force_oracle=True)
        u0 = initial_state(self.d, self.config)
        for tau in self.taus:
            scheme = SchemeConfig.model_validate({**self.config.scheme.model_dump(), 'tau': tau})
            history = run(self.d, self.g, scheme, u0)
            report = extract_eigenvalues(self.d, self.g, history.final_state,
                                         reference=ref_report.eigenvalues)
            self.runs.append({
                'tau': tau,
                'terminated_by': history.terminated_by,
                'steps': history.steps,
                'report': report,
            })
            logger.info(f'tau={tau}: {history.terminated_by.value} en {history.steps} pas, '
                        f'err_i max={max(report.relative_errors):.3e}')

    def pipe_report(self) -> dict:
        errors = [r['report'].relative_errors for r in self.runs]
        verdicts = tau_independence(errors)
        steps = [r['steps'] for r in self.runs]

        ordered = sorted(zip(self.taus, steps))
        monotone = all(b[1] < a[1] for a, b in zip(ordered, ordered[1:]))

        self.exit_code = EXIT_CODE.OK
        for r in self.runs:
            code = TERMINATION_EXIT_CODE[r['terminated_by']]
            if code != EXIT_CODE.OK:
                self.exit_code = code
                break
        else:
            if not all(verdicts):
                self.exit_code = EXIT_CODE.INVARIANT_FAILED
            elif not monotone:
                logger.error(f'le nombre de pas ne décroît pas strictement avec tau: {steps}')
                self.exit_code = EXIT_CODE.INVARIANT_FAILED

        self.report = self.header()
        self.report.update({
            'taus': self.taus,
            'runs': [{
                'tau': r['tau'],
                'terminated_by': r['terminated_by'].value,
                'steps': r['steps'],
                'eigenvalues': r['report'].eigenvalues,
                'relative_errors': r['report'].relative_errors,
            } for r in self.runs],
            'tau_independent': verdicts,
            'steps_decreasing': monotone,
        })
        self._csv = sweep_csv(self.taus, errors, steps, verdicts)
        return self.report

    def pipe_write(self):
        if self.config.outputs.sweep_csv:
            self.writer.write_string(self.config.outputs.sweep_csv, self._csv)
        super().pipe_write()
