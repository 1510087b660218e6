"""Physical parameters, quantum numbers and the defining radial functions.

Natural units (hbar = c = 1) throughout; every quantity is a plain float.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of a formula."""


class Alignment(str, Enum):
    ALIGNED = "aligned"
    UNALIGNED = "unaligned"


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> float:
        return 1.0 if self is Branch.PLUS else -1.0


class Source(str, Enum):
    DIRAC = "dirac"
    COULOMB_LIMIT = "coulomb_limit"
    KLEIN_GORDON = "klein_gordon"
    KLEIN_GORDON_SIMPLIFIED = "klein_gordon_simplified"
    DIRAC_SIMPLIFIED = "dirac_simplified"
    ORACLE = "oracle"


class Status(str, Enum):
    REAL = "real"
    IMAGINARY = "imaginary"


@dataclass(frozen=True)
class ModelParams:
    """Hulthen strength ``Z``, screening ``alpha`` and mass constant ``mu0``."""

    Z: float = 1.0
    alpha: float = 0.1
    mu0: float = 1.0

    def __post_init__(self):
        if not self.Z > 0:
            raise DomainError(f"Z must be positive, got {self.Z}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.mu0 >= 0:
            raise DomainError(f"mu0 must be non-negative, got {self.mu0}")

    @property
    def asymptotic_mass(self) -> float:
        """mu0 + Z*alpha, the mass function at r -> infinity."""
        return self.mu0 + self.Z * self.alpha


@dataclass(frozen=True)
class QuantumState:
    """Radial number, orbital number, dimension and spin alignment.

    ``continuous=True`` admits a positive real ``D`` for continuous-dimension
    scans; otherwise ``D`` must be an integer >= 1.
    """

    n_r: int
    ell: int
    D: float = 3
    alignment: Alignment = Alignment.UNALIGNED
    continuous: bool = False

    def __post_init__(self):
        if int(self.n_r) != self.n_r or self.n_r < 0:
            raise DomainError(f"n_r must be a non-negative integer, got {self.n_r}")
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError(f"ell must be a non-negative integer, got {self.ell}")
        if self.continuous:
            if not self.D > 0:
                raise DomainError(f"D must be positive, got {self.D}")
        elif int(self.D) != self.D or self.D < 1:
            raise DomainError(f"D must be an integer >= 1, got {self.D}")
        object.__setattr__(self, "alignment", Alignment(self.alignment))

    @property
    def abs_kappa(self) -> float:
        return (2 * self.ell + self.D - 1) / 2

    @property
    def kappa(self) -> float:
        return kappa_of(self)


@dataclass(frozen=True)
class EnergyResult:
    """An energy value tagged with its branch, status and producing formula.

    ``value`` is NaN when ``status`` is imaginary. ``radicand`` is the quantity
    under the square root of the source formula (NaN when not applicable).
    """

    value: float
    branch: Branch
    source: Source
    status: Status = Status.REAL
    radicand: float = math.nan

    @property
    def is_real(self) -> bool:
        return self.status is Status.REAL

    @classmethod
    def from_radicand(cls, base, half_width, radicand, branch, source):
        """Build ``base +/- half_width*sqrt(radicand)``; imaginary when radicand < 0."""
        branch = Branch(branch)
        if radicand < 0:
            return cls(math.nan, branch, source, Status.IMAGINARY, radicand)
        value = base + branch.sign * half_width * math.sqrt(radicand)
        return cls(value, branch, source, Status.REAL, radicand)


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("radial coordinate must be positive")
    return r


def _one_minus_s(r, alpha):
    return -np.expm1(-alpha * r)


def _maybe_scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def hulthen_potential(r, p: ModelParams):
    """V(r) = -Z alpha e^{-alpha r} / (1 - e^{-alpha r})."""
    r = _check_r(r)
    s = np.exp(-p.alpha * r)
    return _maybe_scalar(-p.Z * p.alpha * s / _one_minus_s(r, p.alpha))


def mass_function(r, p: ModelParams):
    """mu(r) = mu0 + Z alpha / (1 - e^{-alpha r}); dmu/dr equals dV/dr."""
    r = _check_r(r)
    return _maybe_scalar(p.mu0 + p.Z * p.alpha / _one_minus_s(r, p.alpha))


def centrifugal_exact(r):
    r = _check_r(r)
    return _maybe_scalar(1.0 / r**2)


def centrifugal_approx(r, alpha: float):
    """Exponential stand-in for 1/r^2: alpha^2 e^{-alpha r} / (1 - e^{-alpha r})^2."""
    r = _check_r(r)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    s = np.exp(-alpha * r)
    return _maybe_scalar(alpha**2 * s / _one_minus_s(r, alpha) ** 2)


def kappa_of(state: QuantumState) -> float:
    """Spin-orbit number: +|kappa| for unaligned spin, -|kappa| for aligned."""
    k = state.abs_kappa
    return -k if state.alignment is Alignment.ALIGNED else k


def radial_grid(alpha: float, n_log: int = 200, n_lin: int = 800,
                r_min: float | None = None, r_max: float | None = None) -> np.ndarray:
    """Log-spaced samples up to 1/alpha, linear samples beyond it.

    Defaults: r_min = 1e-6/alpha, r_max = 50/alpha (e^{-alpha r} < 2e-22).
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    knee = 1.0 / alpha
    r_min = 1e-6 * knee if r_min is None else r_min
    r_max = 50.0 * knee if r_max is None else r_max
    if not 0 < r_min < knee < r_max:
        raise DomainError("grid requires 0 < r_min < 1/alpha < r_max")
    inner = np.geomspace(r_min, knee, n_log, endpoint=False)
    outer = np.linspace(knee, r_max, n_lin)
    return np.concatenate([inner, outer])
