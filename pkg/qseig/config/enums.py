
import enum


class PotentialKind(enum.Enum):
    ZERO = 'zero'
    HARMONIC = 'harmonic'
    SOFT_COULOMB = 'soft_coulomb'


class SolverMethod(enum.Enum):
    AUTO = 'auto'
    DIRECT = 'direct'
    CG = 'cg'


class Preconditioner(enum.Enum):
    NONE = 'none'
    JACOBI = 'jacobi'


class InitMode(enum.Enum):
    RAW_RANDOM = 'raw_random'
    QUASI_STIEFEL_SCALED = 'quasi_stiefel_scaled'
    ORTHONORMAL = 'orthonormal'
    FROM_STATE = 'from_state'


class EnforceBounds(enum.Enum):
    WARN = 'warn'
    REJECT = 'reject'


class TerminationReason(enum.Enum):
    TOLERANCE_MET = 'tolerance_met'
    MAX_STEPS = 'max_steps'
    DIVERGED = 'diverged'
    SUBSPACE_CONVERGED = 'subspace_converged'


class ReferenceKind(enum.Enum):
    ORACLE = 'oracle'
    NONE = 'none'
    FILE = 'file'
