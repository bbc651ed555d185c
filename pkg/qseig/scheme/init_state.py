
from typing import Optional

import numpy as np
from loguru import logger

from qseig.config.constants import INIT_MAX_DRAWS, RANK_RTOL
from qseig.config.enums import InitMode
from qseig.config.exceptions import DimensionMismatch, InvalidParams, RankDeficient
from qseig.operators.blockvec import BlockState, combine, gram_l2, inv_sqrt, sym_eig
from qseig.operators.discretize import Discretization


def init_state(d: Discretization, n: int, mode: InitMode, seed: int = 0,
               state: Optional[BlockState] = None) -> BlockState:
    """Construit U_0.

    Args:
        d (Discretization): discrétisation
        n (int): nombre de fonctions N
        mode (InitMode): raw_random, quasi_stiefel_scaled (lambda_min(<U0,U0>) = 1),
            orthonormal (<U0,U0> = I) ou from_state
        seed (int): graine du générateur normal standard
        state (BlockState, optional): état fourni pour from_state

    Raises:
        RankDeficient: trois tirages successifs de rang numériquement déficient
    """
    if not 1 <= n <= d.ng:
        raise InvalidParams(f'N doit être dans [1, {d.ng}], reçu {n}')

    if mode == InitMode.FROM_STATE:
        if state is None:
            raise InvalidParams('init_mode=from_state sans état fourni')
        if state.shape != (d.ng, n):
            raise DimensionMismatch(f'état {state.shape}, attendu {(d.ng, n)}')
        return state

    rng = np.random.default_rng(seed)
    for draw in range(INIT_MAX_DRAWS):
        u0 = BlockState(rng.standard_normal((d.ng, n)))
        s = gram_l2(d, u0, u0)
        w, _ = sym_eig(s)
        if w[0] >= RANK_RTOL * w[-1]:
            break
        logger.warning(f'tirage {draw + 1} de rang déficient (lambda_min={w[0]:.3e}), nouveau tirage')
    else:
        raise RankDeficient(f'{INIT_MAX_DRAWS} tirages de rang déficient')

    if mode == InitMode.RAW_RANDOM:
        return u0
    elif mode == InitMode.QUASI_STIEFEL_SCALED:
        return u0 * (1.0 / np.sqrt(w[0]))
    elif mode == InitMode.ORTHONORMAL:
        return combine(u0, inv_sqrt(s))
    else:
        raise InvalidParams(f'mode initial inconnu {mode}')
