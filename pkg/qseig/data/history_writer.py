"""Export CSV des historiques et des balayages en tau (17 chiffres significatifs)."""

import csv
import io
from typing import Optional, Sequence

from qseig.config.constants import HISTORY_CSV_HEADER
from qseig.data.data_reader_writer import DataWriter
from qseig.data.schemas import StepDiagnostics


def fmt(value: float) -> str:
    return format(float(value), '.17g')


def history_csv(records: Sequence[StepDiagnostics], err_u: Optional[Sequence[float]] = None) -> str:
    """Une ligne par pas ; err_u est rempli après coup, vide si la référence U_end manque."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(HISTORY_CSV_HEADER)
    for i, r in enumerate(records):
        writer.writerow([
            r.step_index,
            fmt(r.energy),
            fmt(r.orth_error),
            fmt(r.grad_norm),
            fmt(r.grad_norm_a),
            fmt(err_u[i]) if err_u is not None else '',
            fmt(r.lambda_min_gram),
            r.green_solves,
        ])
    return buffer.getvalue()


def sweep_csv(taus: Sequence[float], errors: Sequence[Sequence[float]], steps: Sequence[int],
              passed: Sequence[bool]) -> str:
    """Tableau combiné : une ligne par indice propre, une colonne par tau, puis le nombre de pas.

    Args:
        errors: errors[j][i] est err_i pour le j-ème tau
        passed: verdict d'indépendance en tau par indice
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['index'] + [fmt(t) for t in taus] + ['tau_independent'])
    for i in range(len(errors[0])):
        writer.writerow([i + 1] + [fmt(col[i]) for col in errors] + ['true' if passed[i] else 'false'])
    writer.writerow(['steps'] + [str(s) for s in steps] + [''])
    return buffer.getvalue()


def write_history_csv(writer: DataWriter, path: str, records: Sequence[StepDiagnostics],
                      err_u: Optional[Sequence[float]] = None) -> None:
    writer.write_string(path, history_csv(records, err_u))
