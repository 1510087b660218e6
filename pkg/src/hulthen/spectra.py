"""Closed-form energy formulas, auxiliary quantities and imaginary-energy thresholds.

The formulas are implemented without algebraic correction. See
``analysis.consistency_report`` for how they relate to each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (Branch, DomainError, EnergyResult, ModelParams, QuantumState,
                    Source)

DELTA_POLICIES = ("abs", "literal")
N_CONVENTIONS = ("orbital", "spin_orbit")


class ComplexBranchError(ValueError):
    """A square root in the quantization condition has a negative argument."""


@dataclass(frozen=True)
class AuxiliaryQuantities:
    epsilon: float          # NaN when epsilon_squared < 0
    epsilon_squared: float
    beta1: float
    beta2: float
    delta: float
    eta: float

    @property
    def real(self) -> bool:
        return self.epsilon_squared >= 0


def delta_of(kappa: float, policy: str = "abs") -> float:
    """Exponent of (1 - s) at the origin.

    ``abs`` gives |kappa| + 1, the form the closed-form energies use for both
    alignments. ``literal`` gives the positive root of
    delta^2 - delta - kappa(kappa+1) = 0: kappa + 1 for kappa >= 0, -kappa otherwise.
    """
    if policy == "abs":
        return abs(kappa) + 1
    if policy == "literal":
        return kappa + 1 if kappa >= 0 else -kappa
    raise ValueError(f"unknown delta policy {policy!r}; expected one of {DELTA_POLICIES}")


def principal_number(state: QuantumState, convention: str = "orbital") -> float:
    """n_r + ell + 1 (``orbital``) or n_r + |kappa| + 1 (``spin_orbit``)."""
    if convention == "orbital":
        return state.n_r + state.ell + 1
    if convention == "spin_orbit":
        return state.n_r + state.abs_kappa + 1
    raise ValueError(f"unknown convention {convention!r}; expected one of {N_CONVENTIONS}")


def _eta(state: QuantumState, Z: float) -> float:
    return (state.n_r + state.abs_kappa + 1) ** 2 + Z**2


def epsilon_beta(E: float, state: QuantumState, p: ModelParams,
                 delta_policy: str = "abs") -> AuxiliaryQuantities:
    Z, a, mu0 = p.Z, p.alpha, p.mu0
    beta1 = (2 * Z * mu0 + Z**2 * a) / a
    beta2 = (2 * Z * E + Z**2 * a) / a
    # mu0^2 + beta1 alpha^2 = (mu0 + Z alpha)^2
    eps2 = (mu0**2 + a * (2 * Z * mu0 + Z**2 * a) - E**2) / a**2
    eps = math.sqrt(eps2) if eps2 >= 0 else math.nan
    return AuxiliaryQuantities(eps, eps2, beta1, beta2,
                               delta_of(state.kappa, delta_policy), _eta(state, Z))


def dirac_energy(state: QuantumState, p: ModelParams,
                 branch: Branch | str = Branch.MINUS) -> EnergyResult:
    """Dirac-Hulthen energy with position-dependent mass."""
    Z, a, mu0 = p.Z, p.alpha, p.mu0
    N = state.n_r + state.abs_kappa + 1
    eta = N**2 + Z**2
    a_beta1 = 2 * Z * mu0 + Z**2 * a            # alpha * beta1
    a_eta_beta1 = a * eta + a_beta1             # alpha * (eta + beta1)
    base = -Z * a_eta_beta1 / (2 * eta)
    radicand = 4 * (mu0 + a * a_beta1) * eta - a_eta_beta1**2
    return EnergyResult.from_radicand(base, N / (2 * eta), radicand, branch, Source.DIRAC)


def dirac_alpha_threshold(state: QuantumState, Z: float = 1.0, mu0: float = 1.0) -> float:
    """Screening above which ``dirac_energy`` turns imaginary.

    The radicand is -N^4 a^2 + 4 Z mu0 N^2 a + 4 mu0 (eta - Z^2 mu0) in a = alpha,
    whose positive root is 2 (Z mu0 + sqrt(mu0 eta)) / N^2.
    """
    N = state.n_r + state.abs_kappa + 1
    eta = N**2 + Z**2
    return 2 * (Z * mu0 + math.sqrt(mu0 * eta)) / N**2


def coulomb_limit_energy(state: QuantumState, Z: float, mu0: float) -> float:
    """sqrt(mu0) [1 + Z^2/(n_r + |kappa| + 1)^2]^(-1/2)."""
    N = state.n_r + state.abs_kappa + 1
    return math.sqrt(mu0) / math.sqrt(1 + Z**2 / N**2)


def quantization_residual(E: float, state: QuantumState, p: ModelParams,
                          delta_policy: str = "abs") -> float:
    """n_r + delta + eps - sqrt(eps^2 - (beta1 + beta2)); zero at a terminating series."""
    aux = epsilon_beta(E, state, p, delta_policy)
    if not aux.real:
        raise ComplexBranchError(f"epsilon^2 = {aux.epsilon_squared} < 0 at E = {E}")
    inner = aux.epsilon_squared - (aux.beta1 + aux.beta2)
    if inner < 0:
        raise ComplexBranchError(f"eps^2 - (beta1 + beta2) = {inner} < 0 at E = {E}")
    return state.n_r + aux.delta + aux.epsilon - math.sqrt(inner)


def kg_radicand(state: QuantumState, alpha: float, Z: float = 1.0, mu: float = 1.0) -> float:
    m2 = (state.n_r + state.abs_kappa) ** 2
    gamma = 2 * Z * mu - alpha * m2
    return 4 * mu**2 - alpha * (2 * Z * mu - gamma)


def kg_energy(state: QuantumState, alpha: float, *, Z: float = 1.0, mu: float = 1.0,
              branch: Branch | str = Branch.MINUS) -> EnergyResult:
    """Klein-Gordon-Hulthen energy for equal vector and scalar potentials.

    ``mu`` is the constant mass; v1 = (D + 2 ell - 1)/2 equals |kappa|.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    m2 = (state.n_r + state.abs_kappa) ** 2
    gamma = 2 * Z * mu - alpha * m2
    eta = m2 + Z**2
    radicand = kg_radicand(state, alpha, Z, mu)
    return EnergyResult.from_radicand(-Z * gamma / (2 * eta), m2 / (2 * eta), radicand,
                                      branch, Source.KLEIN_GORDON)


def kg_alpha_threshold(state: QuantumState, mu: float = 1.0) -> float:
    """2 mu / (n_r + |kappa|): where 4 mu^2 - alpha^2 (n_r + |kappa|)^2 vanishes."""
    m = state.n_r + state.abs_kappa
    if m <= 0:
        raise DomainError("threshold undefined for n_r + |kappa| = 0")
    return 2 * mu / m


def _check_principal(n, D):
    if not n >= 1:
        raise DomainError(f"principal number must be >= 1, got {n}")
    if not D > 0:
        raise DomainError(f"dimension must be positive, got {D}")


def kg_energy_simplified(n: float, D: float, alpha: float,
                         branch: Branch | str = Branch.MINUS) -> EnergyResult:
    """Z = mu = 1 Klein-Gordon energy with rho1 = (2n + D - 3)^2."""
    _check_principal(n, D)
    k = 2 * n + D - 3
    if not k > 0:
        raise DomainError(f"2n + D - 3 must be positive, got {k}")
    rho1 = k * k
    return EnergyResult.from_radicand((2 * alpha * rho1 - 16) / (4 + rho1), rho1 / (4 + rho1),
                                      16 - alpha**2 * rho1, branch,
                                      Source.KLEIN_GORDON_SIMPLIFIED)


def dirac_energy_simplified(n: float, D: float, alpha: float,
                            branch: Branch | str = Branch.MINUS) -> EnergyResult:
    """Z = mu0 = 1 Dirac energy with rho2 = (n + (D - 1)/2)^2."""
    _check_principal(n, D)
    rho2 = (n + (D - 1) / 2) ** 2
    base = -(alpha * (rho2 + 1) + (alpha + 2)) / (2 * (rho2 + 1))
    radicand = 4 * (rho2 + 1) * (alpha + 1) ** 2 - (alpha * (rho2 + 2) + 2) ** 2
    return EnergyResult.from_radicand(base, rho2 / (2 * (rho2 + 1)), radicand, branch,
                                      Source.DIRAC_SIMPLIFIED)


def alpha_threshold(kind: str, n: float, D: float) -> float:
    """Screening beyond which the simplified energy of ``kind`` becomes imaginary.

    kg: 4/(2n + D - 3). dirac: 2 (1 + sqrt(1 + rho2)) / rho2, rho2 = (n + (D-1)/2)^2.
    """
    if kind == "kg":
        k = 2 * n + D - 3
        if not k > 0:
            raise DomainError(f"2n + D - 3 must be positive, got {k}")
        return 4 / k
    if kind == "dirac":
        rho2 = (n + (D - 1) / 2) ** 2
        if not rho2 > 0:
            raise DomainError("rho2 must be positive")
        return 2 * (1 + math.sqrt(1 + rho2)) / rho2
    raise ValueError(f"unknown threshold kind {kind!r}; expected 'kg' or 'dirac'")
