import json
from abc import ABC, abstractmethod
from typing import Optional

from qseig.config.constants import EXIT_CODE
from qseig.data.data_reader_writer import DataWriter
from qseig.data.schemas import RunConfig
from qseig.operators.discretize import Discretization
from qseig.operators.greens import InverseOperator
from qseig.user_api import build_discretization, prepare_operator, report_header


class AbsPipe(ABC):
    """Classe abstraite des expériences : préparation, exécution, rapport puis écriture."""
    PIP_SOLVE = 'solve'
    PIP_SWEEP = 'tau-sweep'
    PIP_VERIFY = 'verify'
    PIP_REFERENCE = 'reference'

    def __init__(self, config: RunConfig, writer: DataWriter):
        self.config = config
        self.writer = writer
        self.d: Optional[Discretization] = None
        self.g: Optional[InverseOperator] = None
        self.report: dict = {}
        self.exit_code = EXIT_CODE.OK

    def pipe_prepare(self):
        """Assemble la discrétisation, prépare G et estime lambda1."""
        self.d = build_discretization(self.config.problem)
        self.g = prepare_operator(self.d, self.config.solver)

    @abstractmethod
    def pipe_run(self):
        """Exécution de l'expérience avec état."""
        raise NotImplementedError

    @abstractmethod
    def pipe_report(self) -> dict:
        """Construit le rapport (dictionnaire JSON) et fixe exit_code."""
        raise NotImplementedError

    def pipe_write(self):
        """Écrit le rapport JSON si outputs.report est défini."""
        if self.config.outputs.report:
            self.writer.write_string(self.config.outputs.report, AbsPipe.dump_json(self.report))

    def header(self) -> dict:
        return report_header(self.config, self.d)

    @staticmethod
    def dump_json(data: dict) -> str:
        return json.dumps(data, ensure_ascii=False, indent=4)
