"""Upper and lower spinor components on a radial grid.

F(s) = s^eps (1-s)^delta P_{n_r}^{(2 eps, 2 delta - 1)}(1 - 2s), s = e^{-alpha r},
and G follows from (d/dr + kappa/r) F = (mu + E - V) G.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import specfun
from .model import (EnergyResult, ModelParams, QuantumState, hulthen_potential,
                    mass_function, radial_grid)
from .spectra import ComplexBranchError, dirac_energy, epsilon_beta, quantization_residual


class InvalidStateError(ValueError):
    """The requested energy cannot carry a real bound-state spinor."""


class PoleError(ArithmeticError):
    def __init__(self, r):
        super().__init__(f"mu(r) + E - V(r) vanishes near r = {r!r}")
        self.r = r


class DegenerateFunctionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpinorSolution:
    """Unnormalized analytic spinor (C = 1) for one state and energy."""

    state: QuantumState
    params: ModelParams
    energy: float
    epsilon: float
    delta: float

    @property
    def kappa(self) -> float:
        return self.state.kappa

    @property
    def jacobi_ab(self) -> tuple[float, float]:
        return 2 * self.epsilon, 2 * self.delta - 1

    def _pieces(self, r):
        r = np.asarray(r, dtype=float)
        a = self.params.alpha
        s = np.exp(-a * r)
        t = -np.expm1(-a * r)
        g = np.exp(self.epsilon * (-a * r) + self.delta * np.log(t))
        return r, s, t, g

    def _jacobi(self, x, order):
        ja, jb = self.jacobi_ab
        n = self.state.n_r
        if order == 0:
            return specfun.jacobi_poly(n, ja, jb, x)
        return specfun.jacobi_poly_derivative(n, ja, jb, x, order)

    def upper(self, r):
        r, s, t, g = self._pieces(r)
        return g * self._jacobi(1 - 2 * s, 0)

    def upper_derivatives(self, r):
        """(F, dF/dr, d2F/dr2), differentiated analytically through s = e^{-alpha r}."""
        r, s, t, g = self._pieces(r)
        a, eps, dlt = self.params.alpha, self.epsilon, self.delta
        x = 1 - 2 * s
        P, P1, P2 = (self._jacobi(x, k) for k in range(3))
        u = eps - dlt * s / t
        F = g * P
        Fr = -a * g * (u * P - 2 * s * P1)
        Frr = a * a * g * ((u * u - eps - dlt * (s / t) ** 2 + u) * P
                           - (4 * u + 2) * s * P1 + 4 * s * s * P2)
        return F, Fr, Frr

    def denominator(self, r):
        """mu(r) + E - V(r)."""
        return mass_function(r, self.params) + self.energy - hulthen_potential(r, self.params)

    def lower(self, r):
        r = np.asarray(r, dtype=float)
        F, Fr, _ = self.upper_derivatives(r)
        return (Fr + self.kappa * F / r) / self.denominator(r)

    def lower_derivatives(self, r):
        """(G, dG/dr)."""
        r = np.asarray(r, dtype=float)
        p = self.params
        F, Fr, Frr = self.upper_derivatives(r)
        k = self.kappa
        num = Fr + k * F / r
        num_r = Frr + k * Fr / r - k * F / r**2
        s = np.exp(-p.alpha * r)
        t = -np.expm1(-p.alpha * r)
        Q = self.denominator(r)
        Q_r = -2 * p.Z * p.alpha**2 * s / t**2
        return num / Q, (num_r * Q - num * Q_r) / Q**2

    def upper_hypergeometric(self, r):
        """Same F written with the terminating Gauss series instead of the Jacobi polynomial.

        Differs from ``upper`` by the constant P_{n_r}^{(2 eps, .)}(1).
        """
        r, s, t, g = self._pieces(r)
        n = self.state.n_r
        b = n + 2 * self.delta + 2 * self.epsilon
        return g * specfun.hyp2f1_terminating(-n, b, 1 + 2 * self.epsilon, s)


@dataclass(frozen=True)
class RadialFunction:
    state: QuantumState
    params: ModelParams
    energy: EnergyResult
    grid: np.ndarray
    F_values: np.ndarray
    G_values: np.ndarray
    epsilon: float
    delta: float
    quantization_residual: float
    norm_constant: float | None = None
    solution: SpinorSolution | None = None

    @property
    def endpoint_exponents(self) -> tuple[float, float]:
        """(exponent at s -> 0 i.e. r -> inf, exponent at s -> 1 i.e. r -> 0)."""
        return self.epsilon, self.delta

    @property
    def is_normalized(self) -> bool:
        return self.norm_constant is not None


def spinor_solution(state: QuantumState, p: ModelParams, E: EnergyResult,
                    delta_policy: str = "abs") -> SpinorSolution:
    if not E.is_real:
        raise InvalidStateError(f"energy for {state} is imaginary (radicand {E.radicand:.6g})")
    aux = epsilon_beta(E.value, state, p, delta_policy)
    if not aux.real:
        raise InvalidStateError(f"epsilon is imaginary at E = {E.value}")
    specfun._check_jacobi(state.n_r, 2 * aux.epsilon, 2 * aux.delta - 1)
    return SpinorSolution(state, p, E.value, aux.epsilon, aux.delta)


def _residual_or_nan(E, state, p, delta_policy):
    try:
        return quantization_residual(E, state, p, delta_policy)
    except ComplexBranchError:
        return math.nan


def upper_component(state: QuantumState, p: ModelParams, E: EnergyResult, grid,
                    delta_policy: str = "abs") -> np.ndarray:
    """Unnormalized F on ``grid``.

    Warns when the quantization residual at ``E`` exceeds 1e-8.
    """
    sol = spinor_solution(state, p, E, delta_policy)
    res = _residual_or_nan(E.value, state, p, delta_policy)
    if not abs(res) < 1e-8:
        warnings.warn(f"quantization residual {res:.3g} at E = {E.value:.12g}; "
                      "F is not an exact solution of the transformed equation",
                      RuntimeWarning, stacklevel=2)
    return sol.upper(grid)


def lower_component(state: QuantumState, p: ModelParams, E: EnergyResult, grid,
                    F=None, delta_policy: str = "abs") -> np.ndarray:
    """G = [(d/dr + kappa/r) F] / [mu(r) + E - V(r)] on ``grid``.

    If sampled ``F`` is passed, G carries the same overall scale.
    """
    sol = spinor_solution(state, p, E, delta_policy)
    grid = np.asarray(grid, dtype=float)
    Q = sol.denominator(grid)
    _check_denominator(grid, Q)
    G = sol.lower(grid)
    if F is not None:
        G = G * _scale_of(np.asarray(F, dtype=float), sol.upper(grid))
    return G


def _check_denominator(grid, Q):
    bad = np.flatnonzero((Q == 0) | ~np.isfinite(Q))
    if bad.size:
        raise PoleError(float(grid[bad[0]]))
    flips = np.flatnonzero(np.sign(Q[1:]) != np.sign(Q[:-1]))
    if flips.size:
        raise PoleError(float(grid[flips[0]]))


def _scale_of(samples, reference):
    i = int(np.argmax(np.abs(reference)))
    if reference[i] == 0:
        raise DegenerateFunctionError("reference function vanishes on the grid")
    return samples[i] / reference[i]


def radial_function(state: QuantumState, p: ModelParams, E: EnergyResult | None = None,
                    grid=None, delta_policy: str = "abs") -> RadialFunction:
    """Sample F and G for ``state``; E defaults to the minus-branch Dirac energy."""
    E = dirac_energy(state, p) if E is None else E
    sol = spinor_solution(state, p, E, delta_policy)
    grid = radial_grid(p.alpha) if grid is None else np.asarray(grid, dtype=float)
    _check_denominator(grid, sol.denominator(grid))
    return RadialFunction(
        state=state, params=p, energy=E, grid=grid,
        F_values=sol.upper(grid), G_values=sol.lower(grid),
        epsilon=sol.epsilon, delta=sol.delta,
        quantization_residual=_residual_or_nan(E.value, state, p, delta_policy),
        solution=sol,
    )


def normalize(rf: RadialFunction, *, atol: float = 1e-12) -> RadialFunction:
    """Scale F and G so that the integral of F^2 + G^2 over (0, inf) is 1.

    ``norm_constant`` is recorded relative to the C = 1 analytic solution.
    """
    sol = rf.solution
    if sol is None:
        raise ValueError("normalize needs the analytic solution attached to the RadialFunction")
    r_max = max(float(rf.grid[-1]), 50.0 / rf.params.alpha)

    def density(r):
        F = float(sol.upper(r))
        G = float(sol.lower(r))
        return F * F + G * G

    norm2 = specfun.integrate(density, 0.0, r_max, atol=atol,
                              points=specfun.grid_breakpoints(rf.params.alpha, r_max))
    if not norm2 > 0:
        raise DegenerateFunctionError("zero norm")
    C = 1.0 / math.sqrt(norm2)
    lam = _scale_of(rf.F_values, sol.upper(rf.grid))
    if lam == 0:
        raise DegenerateFunctionError("sampled F is identically zero")
    return replace(rf, F_values=rf.F_values * (C / lam), G_values=rf.G_values * (C / lam),
                   norm_constant=C)


def node_count(samples) -> int:
    """Strict sign changes, ignoring magnitudes below 1e-12 * max|samples|."""
    return specfun.count_sign_changes(samples, 1e-12)


def _interior(n, trim=0.05):
    k = int(math.ceil(trim * n))
    return slice(k, n - k)


def spinor_residuals(rf: RadialFunction, trim: float = 0.05):
    """Relative residuals of both first-order equations on the interior grid.

    Returns (r, res_F_equation, res_G_equation). Each residual is divided by
    the sum of the magnitudes of its terms.
    """
    sol = rf.solution
    r = rf.grid[_interior(rf.grid.size, trim)]
    k = sol.kappa
    F, Fr, _ = sol.upper_derivatives(r)
    G, Gr = sol.lower_derivatives(r)
    Q = sol.denominator(r)
    lhs8, rhs8 = Fr + k * F / r, Q * G
    res8 = np.abs(lhs8 - rhs8) / (np.abs(Fr) + np.abs(k * F / r) + np.abs(rhs8))
    coupling = mass_function(r, rf.params) - rf.energy.value + hulthen_potential(r, rf.params)
    lhs9, rhs9 = Gr - k * G / r, coupling * F
    res9 = np.abs(lhs9 - rhs9) / (np.abs(Gr) + np.abs(k * G / r) + np.abs(rhs9))
    return r, res8, res9


def structural_fit(rf: RadialFunction, trim: float = 0.05):
    """Least-squares fit of G (mu + E - V) to the two-Jacobi-term closed form.

    Model: s^eps t^(delta-1) { [eps/s - alpha kappa t / log s] P_n^(2eps, 2delta-1)
    + B P_{n-1}^(2eps+1, 2delta) }, with log s = -alpha r. Returns (B, relative
    rms residual). Diagnostic only; B has no closed form.
    """
    sol = rf.solution
    r = rf.grid[_interior(rf.grid.size, trim)]
    a, eps, dlt, k = rf.params.alpha, sol.epsilon, sol.delta, sol.kappa
    n = rf.state.n_r
    s = np.exp(-a * r)
    t = -np.expm1(-a * r)
    w = np.exp(eps * (-a * r) + (dlt - 1) * np.log(t))
    x = 1 - 2 * s
    ja, jb = sol.jacobi_ab
    first = w * (eps / s - a * k * t / (-a * r)) * specfun.jacobi_poly(n, ja, jb, x)
    second = w * specfun.jacobi_poly(n - 1, ja + 1, jb + 1, x) if n > 0 else np.zeros_like(r)
    target = sol.lower(r) * sol.denominator(r)
    rem = target - first
    denom = float(second @ second)
    B = float(second @ rem) / denom if denom > 0 else 0.0
    resid = rem - B * second
    scale = np.sqrt(np.mean(target**2))
    return B, float(np.sqrt(np.mean(resid**2)) / scale)
