"""Shooting eigensolver for the upper-component equation.

Both partial solutions are propagated as a Prufer phase theta, with
F = rho sin(theta) and F' = k rho cos(theta). That avoids overflow across the
many decades F spans, and theta counts nodes. The matching mismatch is
sin(theta_out - theta_in): the Wronskian of the two partial solutions
normalized by their amplitudes. It is smooth in E and vanishes exactly where
the log-derivatives agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .model import Branch, EnergyResult, ModelParams, QuantumState, Source, Status


class IntegrationFailure(RuntimeError):
    pass


class CentrifugalMode(str, Enum):
    APPROXIMATED = "approximated"
    EXACT = "exact"


class ShootResult(NamedTuple):
    mismatch: float
    log_derivative_mismatch: float
    nodes: int
    theta_out: float
    theta_in: float


def regular_exponent(kappa: float) -> float:
    """Larger root of delta(delta - 1) = kappa(kappa + 1)."""
    return max(kappa + 1, -kappa)


def _phase(q, r_from, r_to, theta0, k, rtol):
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))

    def rhs(r, y):
        c = np.cos(y)
        s = np.sin(y)
        return k * c * c - q(r) / k * s * s

    sol = solve_ivp(rhs, (r_from, r_to), theta0, method="RK45", rtol=rtol,
                    atol=rtol * 1e-2)
    if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
        raise IntegrationFailure(
            f"phase integration {r_from:.6g} -> {r_to:.6g} failed at r = {sol.t[-1]:.6g}: "
            f"{sol.message}")
    return sol.y[:, -1]


def shoot_linear(q: Callable, *, r0: float, r_max: float, r_match: float,
                 logderiv_start, logderiv_end, k=1.0, rtol: float = 1e-10):
    """Match F'' = q(r) F integrated out from r0 and in from r_max at r_match.

    ``logderiv_start`` and ``logderiv_end`` are F'/F at r0 and r_max; both
    partial solutions are taken positive at their starting point. ``q`` may
    return an array, in which case the starts and ``k`` broadcast against it
    and every field of the returned ShootResult is an array.
    """
    if not r0 < r_match < r_max:
        raise ValueError("need r0 < r_match < r_max")
    shape = np.broadcast_shapes(np.shape(q(r_match)), np.shape(logderiv_start),
                                np.shape(logderiv_end), np.shape(k))
    k = np.broadcast_to(np.asarray(k, dtype=float), shape)
    start = np.broadcast_to(np.arctan2(k, logderiv_start), shape)
    end = np.broadcast_to(np.arctan2(k, logderiv_end), shape)
    th_out = _phase(q, r0, r_match, start, k, rtol)
    th_in = _phase(q, r_max, r_match, end, k, rtol)
    nodes = np.floor(th_out / math.pi) - np.floor(th_in / math.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ld = k * (1 / np.tan(th_out) - 1 / np.tan(th_in))
    res = ShootResult(np.sin(th_out - th_in), ld, nodes.astype(int), th_out, th_in)
    if shape == ():
        return ShootResult(float(res.mismatch[0]), float(res.log_derivative_mismatch[0]),
                           int(res.nodes[0]), float(th_out[0]), float(th_in[0]))
    return res


@dataclass(frozen=True)
class ShootingProblem:
    """One state to be solved numerically, with all integration settings.

    Defaults: matching point 1/alpha, energy window 0.999*(mu0 + Z alpha) on
    each side, 400 scan points, start offset s0 = 1e-8 from both ends of s.
    """

    state: QuantumState
    params: ModelParams
    mode: CentrifugalMode = CentrifugalMode.APPROXIMATED
    bracket: tuple[float, float] | None = None
    n_scan: int = 400
    r_match: float | None = None
    s0: float = 1e-8
    rtol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "mode", CentrifugalMode(self.mode))
        lo, hi = self.energy_window
        if not lo < hi:
            raise ValueError("energy bracket must satisfy E_lo < E_hi")
        if not self.r0 < self.matching_point < self.r_max:
            raise ValueError("matching point must lie inside the integration range")

    @property
    def energy_window(self) -> tuple[float, float]:
        if self.bracket is not None:
            return self.bracket
        M = self.params.asymptotic_mass
        return -0.999 * M, 0.999 * M

    @property
    def matching_point(self) -> float:
        return 1.0 / self.params.alpha if self.r_match is None else self.r_match

    @property
    def r0(self) -> float:
        return -math.log1p(-self.s0) / self.params.alpha

    @property
    def r_max(self) -> float:
        return -math.log(self.s0) / self.params.alpha

    def shoot(self, E) -> ShootResult:
        """Mismatch at E; an array of energies is shot as one vector system."""
        if self.mode is CentrifugalMode.APPROXIMATED:
            return _shoot_approximated(self, E)
        return _shoot_exact(self, E)


def s_equation_shoot(kappa: float, eps, beta_sum, alpha: float, *,
                     s0: float = 1e-8, r_match: float | None = None,
                     rtol: float = 1e-10) -> ShootResult:
    """Shoot the transformed equation for given eps and beta1 + beta2.

    F'' + F'/s - [kappa(kappa+1)/(s(1-s)^2) + eps^2/s^2 + beta_sum/(s(1-s))] F = 0
    is integrated in r = -ln(s)/alpha, starting from the two-term series
    (1-s)^delta (1 + b (1-s)) near s = 1 and s^eps (1 + a s) near s = 0.
    ``eps`` and ``beta_sum`` may be arrays of equal shape.
    """
    kk = kappa * (kappa + 1)
    a2 = alpha * alpha
    eps = np.asarray(eps, dtype=float)
    beta_sum = np.asarray(beta_sum, dtype=float)
    eps2 = eps * eps

    def q(r):
        st = 1.0 / math.expm1(alpha * r)                  # s / (1 - s)
        t = -math.expm1(-alpha * r)
        return a2 * (kk * st / t + eps2 + beta_sum * st)

    dlt = regular_exponent(kappa)
    r0 = -math.log1p(-s0) / alpha
    r_max = -math.log(s0) / alpha
    r_m = 1.0 / alpha if r_match is None else r_match
    t0 = s0
    b1 = (beta_sum + dlt * dlt) / (2 * dlt)
    start = alpha * (1.0 - s0) * (dlt / t0 + b1 / (1 + b1 * t0))
    a1 = (kk + beta_sum) / (2 * eps + 1)
    end = -alpha * (eps + a1 * s0 / (1 + a1 * s0))
    k = np.maximum(alpha * eps, 1e-3)
    return shoot_linear(q, r0=r0, r_max=r_max, r_match=r_m, logderiv_start=start,
                        logderiv_end=end, k=k, rtol=rtol)


def _shoot_approximated(pb: ShootingProblem, E) -> ShootResult:
    E = np.asarray(E, dtype=float)
    Z, a, mu0 = pb.params.Z, pb.params.alpha, pb.params.mu0
    eps2 = (pb.params.asymptotic_mass**2 - E * E) / a**2
    if np.any(eps2 < 0):
        raise ValueError("energy outside the window where epsilon is real")
    beta_sum = (2 * Z * mu0 + Z**2 * a) / a + (2 * Z * E + Z**2 * a) / a
    return s_equation_shoot(pb.state.kappa, np.sqrt(eps2), beta_sum, a, s0=pb.s0,
                            r_match=pb.matching_point, rtol=pb.rtol)


def exact_q(state: QuantumState, p: ModelParams, E) -> Callable:
    """q(r) for F'' = q F with the exact kappa(kappa+1)/r^2 term and mu' = V'."""
    kk = state.kappa * (state.kappa + 1)
    Z, a, mu0 = p.Z, p.alpha, p.mu0
    E = np.asarray(E, dtype=float)
    lower = p.asymptotic_mass - E               # mu - E + V is constant in r

    def q(r):
        s_over_t = 1.0 / math.expm1(a * r)
        upper = mu0 + E + Z * a * (1 + 2 * s_over_t)   # mu + E - V
        return kk / (r * r) + upper * lower

    return q


def _shoot_exact(pb: ShootingProblem, E) -> ShootResult:
    st, p = pb.state, pb.params
    E = np.asarray(E, dtype=float)
    q = exact_q(st, p, E)
    dlt = regular_exponent(st.kappa)
    c1 = p.Z * (p.asymptotic_mass - E) / dlt
    r0, r_max = pb.r0, pb.r_max
    start = dlt / r0 + c1 / (1 + c1 * r0)
    end = -np.sqrt(np.maximum(q(r_max), 0.0))
    k = np.maximum(np.sqrt(np.abs(p.asymptotic_mass**2 - E * E)), 1e-3)
    return shoot_linear(q, r0=r0, r_max=r_max, r_match=pb.matching_point,
                        logderiv_start=start, logderiv_end=end, k=k, rtol=pb.rtol)


def shoot_approximated(state: QuantumState, p: ModelParams, E: float, **opts) -> float:
    """Matching mismatch of the exponentially-approximated equation at energy E."""
    return ShootingProblem(state, p, CentrifugalMode.APPROXIMATED, **opts).shoot(E).mismatch


def shoot_exact_centrifugal(state: QuantumState, p: ModelParams, E: float, **opts) -> float:
    """Matching mismatch with the exact centrifugal term retained."""
    return ShootingProblem(state, p, CentrifugalMode.EXACT, **opts).shoot(E).mismatch


@dataclass
class EigenSearch:
    """Eigenvalues found in the energy window plus the scan that located them."""

    energies: list[EnergyResult] = field(default_factory=list)
    nodes: list[int] = field(default_factory=list)
    scan_energies: np.ndarray = field(default_factory=lambda: np.empty(0))
    scan_mismatch: np.ndarray = field(default_factory=lambda: np.empty(0))
    rejected: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.energies)

    def __iter__(self):
        return iter(self.energies)

    def __getitem__(self, i):
        return self.energies[i]

    def with_nodes(self, n: int) -> EnergyResult | None:
        for e, k in zip(self.energies, self.nodes):
            if k == n:
                return e
        return None

    @property
    def diagnostic(self) -> str:
        if self.energies:
            return f"{len(self.energies)} eigenvalue(s) found"
        m = self.scan_mismatch
        if m.size == 0:
            return "no scan performed"
        return (f"no sign change of the mismatch over {m.size} scan points in "
                f"[{self.scan_energies[0]:.6g}, {self.scan_energies[-1]:.6g}]; "
                f"mismatch range [{np.nanmin(m):.3g}, {np.nanmax(m):.3g}]")


def find_eigenvalues(problem: ShootingProblem, count: int, *, xtol: float = 1e-12) -> EigenSearch:
    """Scan the energy window for sign changes of the mismatch and refine each root.

    Returns up to ``count`` eigenvalues in ascending order, each labelled with
    the node count of its eigenfunction. A bracket whose refined midpoint does
    not drive the mismatch to zero is recorded in ``rejected``.
    """
    if count <= 0:
        return EigenSearch()
    lo, hi = problem.energy_window
    Es = np.linspace(lo, hi, problem.n_scan)
    ms = np.concatenate([problem.shoot(chunk).mismatch
                         for chunk in np.array_split(Es, max(1, Es.size // 100))])
    out = EigenSearch(scan_energies=Es, scan_mismatch=ms)

    def f(E):
        return problem.shoot(E).mismatch

    for i in np.flatnonzero(np.sign(ms[:-1]) * np.sign(ms[1:]) <= 0):
        if ms[i] == 0 and i > 0 and ms[i - 1] == 0:
            continue
        a, b = Es[i], Es[i + 1]
        root = a if ms[i] == 0 else (b if ms[i + 1] == 0 else brentq(f, a, b, xtol=xtol))
        res = problem.shoot(root)
        if abs(res.mismatch) > 1e-6:
            out.rejected.append(float(root))
            continue
        if out.energies and abs(out.energies[-1].value - root) < 10 * xtol:
            continue
        out.energies.append(EnergyResult(float(root), Branch.MINUS, Source.ORACLE, Status.REAL))
        out.nodes.append(res.nodes)
        if len(out.energies) == count:
            break
    return out


def eigenvalue_for_state(state: QuantumState, p: ModelParams,
                         mode: CentrifugalMode = CentrifugalMode.APPROXIMATED,
                         **opts) -> tuple[EnergyResult | None, EigenSearch]:
    """Oracle eigenvalue whose eigenfunction has ``state.n_r`` nodes."""
    pb = ShootingProblem(state, p, mode, **opts)
    search = find_eigenvalues(pb, count=pb.n_scan)
    return search.with_nodes(state.n_r), search
