from typing import Optional

from qseig.analysis.reference import reference_subspace_iteration
from qseig.config.constants import EXIT_CODE
from qseig.data.data_reader_writer import DataWriter
from qseig.data.read_api import write_state
from qseig.data.schemas import EigenReport, RunConfig
from qseig.operators.blockvec import BlockState
from qseig.pipe.AbsPipe import AbsPipe


class ReferencePipe(AbsPipe):
    """Oracle par itération de sous-espace : table (valeur, résidu) et bloc de référence."""

    def __init__(self, config: RunConfig, writer: DataWriter):
        super().__init__(config, writer)
        self.eigen_report: Optional[EigenReport] = None
        self.block: Optional[BlockState] = None

    def pipe_run(self):
        ref = self.config.reference
        self.eigen_report, self.block = reference_subspace_iteration(
            self.d, self.g, self.config.n_eig, tol=ref.tol, max_iter=ref.max_iter, seed=self.config.scheme.seed)

    def pipe_report(self) -> dict:
        self.exit_code = EXIT_CODE.OK
        self.report = self.header()
        self.report.update({
            'tol': self.config.reference.tol,
            'eigenvalues': [{'value': lam, 'residual': res}
                            for lam, res in zip(self.eigen_report.eigenvalues, self.eigen_report.residual_norms)],
            # E_ref = 1/2 somme des lambda_i, non décalée
            'energy_ref': self.eigen_report.energy,
        })
        return self.report

    def pipe_write(self):
        if self.config.outputs.reference_state:
            write_state(self.config.outputs.reference_state, self.block, writer=self.writer)
        super().pipe_write()
