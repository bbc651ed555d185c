import os
import tempfile
from typing import Iterator, Optional

import numpy as np
from loguru import logger

from qseig.analysis.diagnostics import eigenvector_error
from qseig.analysis.eigen_report import extract_eigenvalues
from qseig.analysis.rate_fit import fit_exponential_rate
from qseig.config.constants import EXIT_CODE, HISTORY_STATE_BUDGET_BYTES
from qseig.config.enums import TerminationReason
from qseig.config.exceptions import InsufficientData, ZeroReference
from qseig.data.data_reader_writer import DataWriter
from qseig.data.history_writer import write_history_csv
from qseig.data.schemas import EigenReport, RunConfig
from qseig.operators.blockvec import BlockState
from qseig.pipe.AbsPipe import AbsPipe
from qseig.scheme.quasi_orthogonal import RunHistory, run
from qseig.user_api import compute_reference, initial_state

TERMINATION_EXIT_CODE = {
    TerminationReason.TOLERANCE_MET: EXIT_CODE.OK,
    TerminationReason.MAX_STEPS: EXIT_CODE.MAX_STEPS,
    TerminationReason.DIVERGED: EXIT_CODE.DIVERGED,
    TerminationReason.SUBSPACE_CONVERGED: EXIT_CODE.OK,
}


class StateRecorder:
    """Conserve les itérés U_n pour err_u : en mémoire dans la limite du budget, puis dans un fichier temporaire."""

    def __init__(self, budget_bytes: int = HISTORY_STATE_BUDGET_BYTES):
        self.budget_bytes = budget_bytes
        self.states: list[BlockState] = []
        self.spilled = 0
        self._used = 0
        self._shape: Optional[tuple[int, int]] = None
        self._spill_path: Optional[str] = None
        self._spill_file = None

    @property
    def overflow(self) -> bool:
        return self._spill_path is not None

    @property
    def spill_path(self) -> Optional[str]:
        return self._spill_path

    def __call__(self, n: int, u: BlockState):
        self._shape = u.shape
        if not self.overflow and self._used + u.data.nbytes <= self.budget_bytes:
            self._used += u.data.nbytes
            self.states.append(u.copy())
            return
        if not self.overflow:
            fd, self._spill_path = tempfile.mkstemp(prefix='qseig-', suffix='.states')
            self._spill_file = os.fdopen(fd, 'wb')
            logger.info(f'budget mémoire des itérés dépassé au pas {n}, suite écrite dans {self._spill_path}')
        # ordre colonne, comme le format d'état
        self._spill_file.write(u.data.astype('<f8').tobytes(order='F'))
        self.spilled += 1

    def __len__(self) -> int:
        return len(self.states) + self.spilled

    def __iter__(self) -> Iterator[BlockState]:
        yield from self.states
        if not self.spilled:
            return
        self._spill_file.flush()
        ng, n = self._shape
        stored = np.memmap(self._spill_path, dtype='<f8', mode='r', shape=(self.spilled, n, ng))
        for k in range(self.spilled):
            yield BlockState(np.array(stored[k].T))
        del stored

    def close(self):
        if self._spill_file is not None:
            self._spill_file.close()
            self._spill_file = None
        if self._spill_path is not None and os.path.exists(self._spill_path):
            os.remove(self._spill_path)
        self._spill_path = None
        self.states = []
        self.spilled = 0


def fit_rates(history: RunHistory, reference: Optional[EigenReport], sigma: float) -> dict:
    """Taux exponentiels de ||grad||_a, ||O|| et, avec référence, de l'écart d'énergie."""
    series = {
        'grad_norm_a': history.series('grad_norm_a'),
        'orth_error': history.series('orth_error'),
    }
    if reference is not None:
        e_ref = 0.5 * sum(lam + sigma for lam in reference.eigenvalues)
        series['energy_gap'] = history.series('energy') - e_ref
    rates = {}
    for name, values in series.items():
        try:
            rates[name] = fit_exponential_rate(values, series_name=name).model_dump(mode='json')
        except InsufficientData as e:
            logger.warning(f'taux non ajusté: {e}')
            rates[name] = None
    return rates


class SolvePipe(AbsPipe):
    """Résolution complète : état initial, itération quasi-orthogonale, extraction et rapport."""

    def __init__(self, config: RunConfig, writer: DataWriter):
        super().__init__(config, writer)
        self.u0: Optional[BlockState] = None
        self.history: Optional[RunHistory] = None
        self.reference: Optional[tuple[EigenReport, BlockState]] = None
        self.eigen_report: Optional[EigenReport] = None
        self.err_u: Optional[list[float]] = None

    def pipe_run(self):
        self.reference = compute_reference(self.d, self.g, self.config)
        self.u0 = initial_state(self.d, self.config)
        recorder = StateRecorder()
        try:
            self.history = run(self.d, self.g, self.config.scheme, self.u0, on_step=recorder)
            self.err_u = self._backfill_err_u(recorder)
        finally:
            recorder.close()

    def _backfill_err_u(self, recorder: StateRecorder) -> Optional[list[float]]:
        u_end = self.history.final_state
        try:
            return [eigenvector_error(u, u_end, self.d) for u in recorder]
        except ZeroReference as e:
            logger.warning(f'err_u non calculé: {e}')
            return None

    def pipe_report(self) -> dict:
        ref_report = self.reference[0] if self.reference is not None else None
        self.eigen_report = extract_eigenvalues(
            self.d, self.g, self.history.final_state,
            reference=ref_report.eigenvalues if ref_report is not None else None)
        self.exit_code = TERMINATION_EXIT_CODE[self.history.terminated_by]

        self.report = self.header()
        self.report.update({
            'terminated_by': self.history.terminated_by.value,
            'steps': self.history.steps,
            'tau': self.history.tau,
            'seed': self.config.scheme.seed,
            'green_solves': self.history.records[-1].green_solves if self.history.records else 0,
            'final_energy': self.history.records[-1].energy if self.history.records else self.history.initial_energy,
            'final_energy_unshifted': self.history.records[-1].energy_unshifted if self.history.records else None,
            'final': self.eigen_report.model_dump(mode='json'),
            'reference': ref_report.model_dump(mode='json') if ref_report is not None else None,
            'bounds': self.history.bounds.model_dump(mode='json') if self.history.bounds else None,
            'rates': fit_rates(self.history, ref_report, self.d.sigma) if self.history.records else {},
        })
        if ref_report is not None:
            logger.info(f'err_i max = {np.max(self.eigen_report.relative_errors):.3e}')
        return self.report

    def pipe_write(self):
        outputs = self.config.outputs
        if outputs.history_csv:
            write_history_csv(self.writer, outputs.history_csv, self.history.records, self.err_u)
        super().pipe_write()
