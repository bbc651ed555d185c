
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qseig.config.constants import CG_TOL_MAX, GRAD_EPS_DEFAULT, INNER_TOL_DEFAULT
from qseig.config.enums import (EnforceBounds, InitMode, PotentialKind,
                                Preconditioner, ReferenceKind, SolverMethod)


class DomainSpec(BaseModel):
    """Domaine rectangulaire (lower, upper) en dimension 1, 2 ou 3."""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(description='space dimension', ge=1, le=3)
    lower: tuple[float, ...] = Field(description='lower corner of the box')
    upper: tuple[float, ...] = Field(description='upper corner of the box')

    @model_validator(mode='after')
    def check_box(self):
        if len(self.lower) != self.dim or len(self.upper) != self.dim:
            raise ValueError(f'lower/upper doivent avoir {self.dim} composantes')
        for lo, up in zip(self.lower, self.upper):
            if not lo < up:
                raise ValueError(f'lower < upper requis, reçu ({lo}, {up})')
        return self


class GridSpec(BaseModel):
    """Nombre de points intérieurs par axe."""
    model_config = ConfigDict(frozen=True)

    points_per_dim: tuple[int, ...] = Field(description='interior grid points per axis')

    @property
    def ng(self) -> int:
        return math.prod(self.points_per_dim)

    def spacing(self, domain: DomainSpec) -> tuple[float, ...]:
        return tuple((up - lo) / (n + 1)
                     for lo, up, n in zip(domain.lower, domain.upper, self.points_per_dim))


class PotentialSpec(BaseModel):
    """Potentiel V évalué aux noeuds de la grille."""
    model_config = ConfigDict(frozen=True)

    kind: PotentialKind = Field(description='potential family', default=PotentialKind.ZERO)
    coeff: float = Field(description='harmonic coefficient, V = coeff * |x|^2', default=0.5)
    charge: float = Field(description='soft Coulomb charge, V = -charge / sqrt(|x|^2 + s^2)', default=1.0)
    softening: float = Field(description='soft Coulomb softening length', default=0.0, ge=0.0)

    @model_validator(mode='after')
    def check_coeff(self):
        if self.kind == PotentialKind.HARMONIC and not self.coeff > 0:
            raise ValueError('le coefficient harmonique doit être > 0')
        return self


class SchemeConfig(BaseModel):
    """Paramètres de l'itération quasi-orthogonale."""
    model_config = ConfigDict(extra='forbid')

    tau: float = Field(description='uniform time step', gt=0)
    eps: float = Field(description='gradient norm stopping tolerance', default=GRAD_EPS_DEFAULT, gt=0)
    max_steps: int = Field(description='step budget', default=20000, ge=1)
    init_mode: InitMode = Field(description='initial state construction', default=InitMode.QUASI_STIEFEL_SCALED)
    seed: int = Field(description='seed of the initial random draw', default=0, ge=0)
    enforce_bounds: EnforceBounds = Field(description='behaviour when tau exceeds the safeguards',
                                          default=EnforceBounds.WARN)
    initial_state: Optional[str] = Field(description='state file used by init_mode=from_state', default=None)


class StepDiagnostics(BaseModel):
    """Diagnostics de l'itéré U_{n+1} produit par un pas."""
    step_index: int
    energy: float
    energy_unshifted: float
    orth_error: float
    grad_norm: float
    grad_norm_a: float
    subspace_grad_norm: float
    lambda_min_gram: float
    lambda_max_gram: float
    predictor_gram_drift: float
    predictor_norm_a: float
    green_solves: int

    @field_validator('energy', 'energy_unshifted', 'orth_error', 'grad_norm', 'grad_norm_a', 'subspace_grad_norm',
                     'lambda_min_gram', 'lambda_max_gram', 'predictor_gram_drift', 'predictor_norm_a')
    @classmethod
    def check_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError('diagnostic non fini')
        return v


class StepBounds(BaseModel):
    """Bornes théoriques sur tau, exprimées dans le pinceau décalé."""
    lambda1: float
    lambda_max_gram: float
    energy0: float
    c_omega: float
    c_e: float
    tau_nonexpansion: float
    tau_quasi_stiefel: float
    tau_contraction: float
    tau_energy: float

    def violations(self, tau: float) -> list[str]:
        names = ['tau_quasi_stiefel', 'tau_nonexpansion', 'tau_contraction', 'tau_energy']
        return [name for name in names if tau >= getattr(self, name)]


class EigenReport(BaseModel):
    eigenvalues: list[float] = Field(description='ascending, unshifted Ritz values')
    relative_errors: Optional[list[float]] = Field(description='err_i against a reference', default=None)
    energy: float = Field(description='unshifted energy of the block')
    residual_norms: list[float] = Field(description='relative residual of each extracted pair')


class RateFit(BaseModel):
    series_name: str
    slope_per_step: float
    r_squared: float
    window: tuple[int, int]


class InvariantResult(BaseModel):
    """Résultat d'une vérification ; slack > 0 signifie une marge respectée.

    Un résultat non bloquant (gating=False) est rapporté sans influer sur le code de sortie.
    """
    name: str
    passed: bool
    slack: float
    detail: str = ''
    gating: bool = True


class ProblemConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    dim: int = Field(ge=1, le=3)
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    points: tuple[int, ...]
    potential: PotentialKind = PotentialKind.ZERO
    harmonic_coeff: float = 0.5
    charge: float = 1.0
    softening: float = Field(default=0.0, ge=0.0)
    c_lap: float = Field(default=1.0, gt=0)
    sigma: Optional[float] = Field(default=None, ge=0.0)

    @model_validator(mode='after')
    def default_sigma(self):
        if self.sigma is None:
            self.sigma = 1.0 if self.potential == PotentialKind.SOFT_COULOMB else 0.0
        return self

    def domain_spec(self) -> DomainSpec:
        return DomainSpec(dim=self.dim, lower=self.lower, upper=self.upper)

    def grid_spec(self) -> GridSpec:
        return GridSpec(points_per_dim=self.points)

    def potential_spec(self) -> PotentialSpec:
        return PotentialSpec(kind=self.potential, coeff=self.harmonic_coeff,
                             charge=self.charge, softening=self.softening)


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    method: SolverMethod = SolverMethod.AUTO
    inner_tol: float = Field(default=INNER_TOL_DEFAULT, gt=0, le=CG_TOL_MAX)
    max_iter: int = Field(default=10000, ge=1)
    preconditioner: Preconditioner = Preconditioner.JACOBI


class OutputsConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    history_csv: Optional[str] = None
    report: Optional[str] = None
    reference_state: Optional[str] = None
    sweep_csv: Optional[str] = None
    emit_summary: bool = True


class ReferenceConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: ReferenceKind = ReferenceKind.ORACLE
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=5000, ge=1)
    path: Optional[str] = None

    @model_validator(mode='after')
    def check_path(self):
        if self.kind == ReferenceKind.FILE and not self.path:
            raise ValueError('reference.path est requis quand reference.kind = file')
        return self


class RunConfig(BaseModel):
    """Configuration complète d'une expérience."""
    model_config = ConfigDict(extra='forbid')

    problem: ProblemConfig
    solver: SolverConfig = SolverConfig()
    scheme: SchemeConfig
    n_eig: int = Field(ge=1)
    outputs: OutputsConfig = OutputsConfig()
    reference: ReferenceConfig = ReferenceConfig()
