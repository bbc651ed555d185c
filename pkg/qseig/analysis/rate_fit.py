
from typing import Sequence

import numpy as np

from qseig.config.constants import RATE_FLOOR, RATE_MIN_POINTS, RATE_WINDOW_DEFAULT
from qseig.config.exceptions import InsufficientData, InvalidParams
from qseig.data.schemas import RateFit


def fit_exponential_rate(series: Sequence[float], window_fraction: float = RATE_WINDOW_DEFAULT,
                         series_name: str = '') -> RateFit:
    """Ajuste log(series) = a + slope * n par moindres carrés.

    La série est tronquée au premier point sous le plancher d'arrondi (1e-13), puis seule
    la fraction finale window_fraction est ajustée. L'indice n est le numéro de pas (1-based).

    Raises:
        InsufficientData: moins de 5 points exploitables dans la fenêtre
    """
    if not 0 < window_fraction <= 1:
        raise InvalidParams(f'window_fraction dans (0, 1], reçu {window_fraction}')
    y = np.asarray(series, dtype=np.float64)
    below = np.flatnonzero(~(np.isfinite(y) & (y > RATE_FLOOR)))
    end = int(below[0]) if below.size else y.size
    start = end - int(np.ceil(window_fraction * end))
    if end - start < RATE_MIN_POINTS:
        raise InsufficientData(f'{end - start} points au-dessus de {RATE_FLOOR} pour {series_name or "la série"}')

    steps = np.arange(start + 1, end + 1, dtype=np.float64)
    logs = np.log(y[start:end])
    slope, intercept = np.polyfit(steps, logs, 1)
    ss_res = float(np.sum((logs - (intercept + slope * steps)) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r_squared = 1.0 if ss_tot <= 1e-30 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return RateFit(series_name=series_name, slope_per_step=float(slope), r_squared=r_squared,
                   window=(start + 1, end))
