"""Standard Euclidean NMF: objective, multiplicative updates, run types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .numerics import EPS, ShapeError, as_matrix, as_nonnegative


class Variant(str, enum.Enum):
    NMF = "nmf"
    HARD_WNMF = "hardwnmf"
    FWNMF = "fwnmf"
    ERWNMF = "erwnmf"
    FW_CONVEX_NMF = "fwconvexnmf"
    ERW_CONVEX_NMF = "erwconvexnmf"
    CONVEX_NMF = "convexnmf"

    @property
    def uses_p(self) -> bool:
        return self in (Variant.FWNMF, Variant.FW_CONVEX_NMF)

    @property
    def uses_gamma(self) -> bool:
        return self in (Variant.ERWNMF, Variant.ERW_CONVEX_NMF)

    @property
    def is_convex(self) -> bool:
        return self in (Variant.FW_CONVEX_NMF, Variant.ERW_CONVEX_NMF, Variant.CONVEX_NMF)

    @property
    def hyperparameter(self) -> str | None:
        if self.uses_p:
            return "p"
        if self.uses_gamma:
            return "gamma"
        return None

    @classmethod
    def parse(cls, name: str) -> "Variant":
        key = name.strip().lower().replace("-", "").replace("_", "")
        for v in cls:
            if v.value == key:
                return v
        raise ValueError(f"unknown variant {name!r}; choose from {[v.value for v in cls]}")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmConfig:
    """Settings for one factorization run.

    ``rel_tol=0`` runs exactly ``max_iter`` sweeps; a positive value stops
    once the relative objective change drops below it.
    """

    variant: Variant
    rank: int
    p: float | None = None
    gamma: float | None = None
    max_iter: int = 300
    rel_tol: float = 0.0
    seed: int = 0
    init_low: float = 0.1
    init_high: float = 1.1

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant) if isinstance(self.variant, str) else self.variant)
        self.validate()

    def validate(self, shape: tuple[int, int] | None = None) -> None:
        if self.rank < 1:
            raise ConfigError(f"rank must be >= 1, got {self.rank}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.rel_tol >= 0:
            raise ConfigError(f"rel_tol must be >= 0, got {self.rel_tol}")
        if not 0 < self.init_low < self.init_high:
            raise ConfigError("initialization range must satisfy 0 < init_low < init_high")
        if self.variant.uses_p and (self.p is None or not self.p > 1):
            raise ConfigError(f"{self.variant.value} needs p > 1, got {self.p}")
        if self.variant.uses_gamma and (self.gamma is None or not self.gamma > 0):
            raise ConfigError(f"{self.variant.value} needs gamma > 0, got {self.gamma}")
        if shape is not None:
            m, n = shape
            if not self.rank < min(m, n):
                raise ConfigError(f"rank {self.rank} must be < min(M, N) = {min(m, n)}")

    @property
    def hyperparameter_value(self) -> float | None:
        if self.variant.uses_p:
            return self.p
        if self.variant.uses_gamma:
            return self.gamma
        return None


@dataclass
class FactorizationState:
    """Result of a run.

    ``s`` is M x K for plain variants and N x K for convex ones, where the
    base matrix is ``x @ s``. ``objective_history`` holds the variant's own
    objective after each full sweep; ``reconstruction_history`` holds the
    unweighted squared error for comparison across variants.
    """

    s: np.ndarray
    h: np.ndarray
    w: np.ndarray
    objective_history: list[float] = field(default_factory=list)
    reconstruction_history: list[float] = field(default_factory=list)
    iterations_run: int = 0
    convex: bool = False

    def approximation(self, x: np.ndarray) -> np.ndarray:
        base = x @ self.s if self.convex else self.s
        return base @ self.h

    def base(self, x: np.ndarray) -> np.ndarray:
        return x @ self.s if self.convex else self.s


def _check_factors(x, s, h):
    x = as_matrix(x, "x")
    s = as_nonnegative(s, "s")
    h = as_nonnegative(h, "h")
    if s.shape[0] != x.shape[0] or h.shape[1] != x.shape[1] or s.shape[1] != h.shape[0]:
        raise ShapeError(f"factor shapes {s.shape} x {h.shape} do not conform to x {x.shape}")
    return x, s, h


def objective_nmf(x, s, h) -> float:
    """Squared Frobenius distance between ``x`` and ``s @ h``."""
    x, s, h = _check_factors(x, s, h)
    r = x - s @ h
    return float(np.vdot(r, r))


def _update_s(x, s, h, eps=EPS):
    return s * (x @ h.T) / np.maximum(s @ (h @ h.T), eps)


def _update_h(x, s, h, eps=EPS):
    return h * (s.T @ x) / np.maximum((s.T @ s) @ h, eps)


def update_s_standard(x, s, h) -> np.ndarray:
    """Base update ``S * (X H^T) / (S H H^T)``."""
    x, s, h = _check_factors(x, s, h)
    return _update_s(x, s, h)


def update_h_standard(x, s, h) -> np.ndarray:
    """Representation update ``H * (S^T X) / (S^T S H)``."""
    x, s, h = _check_factors(x, s, h)
    return _update_h(x, s, h)
