
from functools import wraps

from qseig.config.exceptions import InvalidParams, MissingLambda1
from qseig.libs.config_reader import get_dense_max_dofs


def RequireLambda1(f):
    """Exige que le premier argument (Discretization) porte lambda1_est."""
    @wraps(f)
    def wrapper(d, *args, **kwargs):
        if d.lambda1_est is None:
            raise MissingLambda1(f'{f.__name__} nécessite estimate_lambda1 au préalable')
        return f(d, *args, **kwargs)
    return wrapper


def DenseOnly(f):
    """Réserve un chemin dense aux petites discrétisations (dense-max-dofs)."""
    @wraps(f)
    def wrapper(d, *args, **kwargs):
        max_dofs = get_dense_max_dofs()
        if d.ng > max_dofs:
            raise InvalidParams(f'{f.__name__} est un chemin dense, Ng={d.ng} > {max_dofs}')
        return f(d, *args, **kwargs)
    return wrapper
