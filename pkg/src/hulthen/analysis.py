"""Parameter scans, level crossings, threshold tables and formula cross-checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import oracle, spectra
from .model import (Alignment, Branch, EnergyResult, ModelParams, QuantumState, Source,
                    hulthen_potential, mass_function)


class DegenerateInputError(ValueError):
    """Two curves coincide identically, so crossings are not isolated."""


GENERAL_SOURCES = (Source.DIRAC, Source.KLEIN_GORDON, Source.COULOMB_LIMIT)
SIMPLIFIED_SOURCES = (Source.KLEIN_GORDON_SIMPLIFIED, Source.DIRAC_SIMPLIFIED)


@dataclass
class ScanCurve:
    label: str
    axis: str
    x: np.ndarray
    points: list[EnergyResult]
    level: object = None
    source: Source | None = None
    evaluate: Callable[[float], EnergyResult] | None = field(default=None, repr=False,
                                                             compare=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.size == 0:
            raise ValueError("empty scan grid")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("scan grid must be strictly increasing")

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def real_mask(self) -> np.ndarray:
        return np.array([p.is_real for p in self.points])


@dataclass(frozen=True)
class IntersectionRecord:
    level_a: object
    level_b: object
    alpha_star: float
    energy: float
    energy_gap: float
    tolerance: float


def _level_label(source, level):
    if isinstance(level, QuantumState):
        return (f"{Source(source).value}(n_r={level.n_r},ell={level.ell},D={level.D:g},"
                f"{level.alignment.value})")
    n, D = level
    return f"{Source(source).value}(n={n:g},D={D:g})"


def energy_function(source, level, *, Z: float = 1.0, mu0: float = 1.0,
                    branch: Branch | str = Branch.MINUS) -> Callable[[float], EnergyResult]:
    """alpha -> EnergyResult for one level.

    ``level`` is a QuantumState for the general formulas and an (n, D) pair for
    the simplified ones. For the Klein-Gordon formula ``mu0`` is the constant mass.
    """
    source = Source(source)
    if source is Source.DIRAC:
        return lambda a: spectra.dirac_energy(level, ModelParams(Z, a, mu0), branch)
    if source is Source.KLEIN_GORDON:
        return lambda a: spectra.kg_energy(level, a, Z=Z, mu=mu0, branch=branch)
    if source is Source.COULOMB_LIMIT:
        value = spectra.coulomb_limit_energy(level, Z, mu0)
        return lambda a: EnergyResult(value, Branch(branch), Source.COULOMB_LIMIT)
    if source is Source.KLEIN_GORDON_SIMPLIFIED:
        n, D = level
        return lambda a: spectra.kg_energy_simplified(n, D, a, branch)
    if source is Source.DIRAC_SIMPLIFIED:
        n, D = level
        return lambda a: spectra.dirac_energy_simplified(n, D, a, branch)
    raise ValueError(f"no closed-form energy for source {source.value!r}")


def alpha_scan(source, levels: Sequence, alphas, **kw) -> list[ScanCurve]:
    """One curve per level over the alpha grid; imaginary points are kept."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0:
        raise ValueError("empty alpha grid")
    curves = []
    for level in levels:
        f = energy_function(source, level, **kw)
        curves.append(ScanCurve(_level_label(source, level), "alpha", alphas,
                                [f(float(a)) for a in alphas], level, Source(source), f))
    return curves


def dimension_scan(source, n_values: Sequence, alpha: float, D_grid, **kw) -> list[ScanCurve]:
    """Continuous-D curves at fixed alpha.

    Simplified formulas take n directly. General formulas map n to the state
    n_r = n - 1, ell = 0, unaligned, with continuous D.
    """
    D_grid = np.asarray(D_grid, dtype=float)
    if D_grid.size == 0:
        raise ValueError("empty dimension grid")
    source = Source(source)
    curves = []
    for n in n_values:
        def at(D, n=n):
            if source in SIMPLIFIED_SOURCES:
                level = (n, D)
            else:
                level = QuantumState(int(n) - 1, 0, D, Alignment.UNALIGNED, continuous=True)
            return energy_function(source, level, **kw)(alpha)

        pts = [at(float(D)) for D in D_grid]
        curves.append(ScanCurve(f"{source.value}(n={n:g},alpha={alpha:g})", "dimension",
                                D_grid, pts, n, source, at))
    return curves


def find_intersections(a: ScanCurve, b: ScanCurve, *, tol: float = 1e-10) -> list[IntersectionRecord]:
    """Crossings of two curves on their common real-status range, refined by bisection."""
    if a.axis != b.axis:
        raise ValueError("curves must share an axis")
    x = a.x
    ea = a.energies
    eb = b.energies if np.array_equal(b.x, x) else np.array([b.evaluate(v).value for v in x])
    both = np.isfinite(ea) & np.isfinite(eb)
    if not both.any():
        return []
    diff = np.where(both, ea - eb, np.nan)
    if np.all(diff[both] == 0):
        raise DegenerateInputError(f"{a.label} and {b.label} coincide on their overlap")

    def gap(v):
        ra, rb = a.evaluate(v), b.evaluate(v)
        if not (ra.is_real and rb.is_real):
            return math.nan
        return ra.value - rb.value

    out = []
    for i in range(x.size - 1):
        d0, d1 = diff[i], diff[i + 1]
        if not (np.isfinite(d0) and np.isfinite(d1)):
            continue
        if d0 == 0:
            lo = hi = x[i]
        elif d0 * d1 < 0:
            lo, hi, g_lo = x[i], x[i + 1], d0
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                g = gap(mid)
                if not np.isfinite(g):
                    break
                if g == 0:
                    lo = hi = mid
                elif (g < 0) == (g_lo < 0):
                    lo, g_lo = mid, g
                else:
                    hi = mid
        else:
            continue
        star = 0.5 * (lo + hi)
        ra, rb = a.evaluate(star), b.evaluate(star)
        if ra.is_real and rb.is_real:
            out.append(IntersectionRecord(a.level, b.level, star, 0.5 * (ra.value + rb.value),
                                          abs(ra.value - rb.value), tol))
    return out


def adjacent_dimension_intersections(n_values, D_values, *, source=Source.KLEIN_GORDON_SIMPLIFIED,
                                     n_points: int = 2048, tol: float = 1e-10):
    """Crossings between the (n, D) and (n, D+1) curves below the smaller threshold.

    Returns a list of ((n, D), (n, D+1), records) tuples, one per pair scanned.
    Pairs whose curves coincide identically give records=None.
    """
    source = Source(source)
    kind = "kg" if source is Source.KLEIN_GORDON_SIMPLIFIED else "dirac"
    out = []
    for n, D in product(n_values, D_values):
        try:
            top = min(spectra.alpha_threshold(kind, n, D), spectra.alpha_threshold(kind, n, D + 1))
        except Exception:
            continue
        alphas = np.geomspace(1e-6 * top, top * (1 - 1e-12), n_points)
        ca, cb = alpha_scan(source, [(n, D), (n, D + 1)], alphas)
        try:
            recs = find_intersections(ca, cb, tol=tol)
        except DegenerateInputError:
            recs = None
        out.append(((n, D), (n, D + 1), recs))
    return out


def threshold_map(kind: str, n_values: Sequence, D_values: Sequence) -> list[dict]:
    """alpha_threshold over an (n, D) table; NaN where the formula is undefined."""
    rows = []
    for n, D in product(n_values, D_values):
        try:
            thr = spectra.alpha_threshold(kind, n, D)
        except spectra.DomainError:
            thr = math.nan
        rows.append({"kind": kind, "n": n, "D": D, "alpha_threshold": thr})
    return rows


def near_degeneracies(curves: Sequence[ScanCurve], tol: float = 1e-3) -> list[dict]:
    """Curve pairs whose real-status energies come within ``tol`` somewhere."""
    out = []
    for i, a in enumerate(curves):
        for b in curves[i + 1:]:
            if not np.array_equal(a.x, b.x):
                continue
            d = np.abs(a.energies - b.energies)
            if not np.any(np.isfinite(d)):
                continue
            j = int(np.nanargmin(d))
            if d[j] < tol:
                out.append({"a": a.label, "b": b.label, "x": float(a.x[j]),
                            "min_gap": float(d[j])})
    return out


def is_monotone_decreasing(curve: ScanCurve) -> bool:
    e = curve.energies[curve.real_mask]
    return bool(np.all(np.diff(e) < 0))


def _ratio_stats(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    ok = np.isfinite(num) & np.isfinite(den) & (den != 0)
    num, den = num[ok], den[ok]
    if num.size == 0:
        return {"samples": 0}
    c = float(num @ den / (den @ den))
    ratios = num / den
    dev = float(np.max(np.abs(ratios - c)) / abs(c)) if c != 0 else math.inf
    diff = num - den
    return {
        "samples": int(num.size),
        "fitted_ratio": c,
        "ratio_min": float(ratios.min()),
        "ratio_max": float(ratios.max()),
        "max_relative_deviation_from_fit": dev,
        "constant_ratio": bool(dev < 1e-9),
        "max_abs_difference": float(np.max(np.abs(diff))),
    }


DEFAULT_REPORT_GRID = {
    "n_r": (0, 1, 2, 3),
    "ell": (0, 1, 2),
    "D": (2, 3, 4, 5, 6),
    "alpha": (0.01, 0.05, 0.1, 0.2, 0.4),
}


def consistency_report(n_r_values=DEFAULT_REPORT_GRID["n_r"], ell_values=DEFAULT_REPORT_GRID["ell"],
                       D_values=DEFAULT_REPORT_GRID["D"], alphas=DEFAULT_REPORT_GRID["alpha"]) -> dict:
    """Cross-check the closed forms against each other at Z = mu = mu0 = 1.

    Sections:
      klein_gordon: general vs simplified formula (n = n_r + ell + 1).
      dirac: general vs simplified formula under both principal-number conventions.
      coulomb_limit: general Dirac formula at alpha = 1e-8 vs the Coulomb-limit energy.
      quantization: termination-condition residual at the closed-form energies.
      transformed_equation: s-equation coefficient as coded vs the transformed r-equation.
    Imaginary points are skipped and counted. No pass/fail is asserted here.
    """
    states = [QuantumState(nr, l, D) for nr, l, D in product(n_r_values, ell_values, D_values)]
    grid = list(product(states, alphas))
    p1 = dict(Z=1.0, mu0=1.0)

    # general vs simplified Klein-Gordon
    kg_num, kg_den, kg_skip = [], [], 0
    for st, a in grid:
        gen = spectra.kg_energy(st, a)
        simp = spectra.kg_energy_simplified(spectra.principal_number(st, "orbital"), st.D, a)
        if gen.is_real and simp.is_real:
            kg_num.append(simp.value)
            kg_den.append(gen.value)
        else:
            kg_skip += 1
    kg = _ratio_stats(kg_num, kg_den)
    kg["imaginary_skipped"] = kg_skip
    kg["relation"] = "simplified / general"

    dirac = {}
    for conv in spectra.N_CONVENTIONS:
        num, den, skip = [], [], 0
        for st, a in grid:
            gen = spectra.dirac_energy(st, ModelParams(alpha=a, **p1))
            simp = spectra.dirac_energy_simplified(spectra.principal_number(st, conv), st.D, a)
            if gen.is_real and simp.is_real:
                num.append(simp.value)
                den.append(gen.value)
            else:
                skip += 1
        stats = _ratio_stats(num, den)
        stats["imaginary_skipped"] = skip
        stats["relation"] = "simplified / general"
        dirac[conv] = stats

    coul = {}
    for br in Branch:
        devs = []
        for st in states:
            e = spectra.dirac_energy(st, ModelParams(alpha=1e-8, **p1), br)
            ref = spectra.coulomb_limit_energy(st, 1.0, 1.0)
            devs.append(abs(e.value - ref) / abs(ref))
        coul[br.value] = {"max_relative_deviation": float(max(devs)),
                          "min_relative_deviation": float(min(devs))}

    quant = {}
    for br in Branch:
        res, mirrored, failed = [], [], 0
        for st, a in grid:
            p = ModelParams(alpha=a, **p1)
            e = spectra.dirac_energy(st, p, br)
            if not e.is_real:
                continue
            try:
                res.append(spectra.quantization_residual(e.value, st, p))
            except spectra.ComplexBranchError:
                failed += 1
                continue
            aux = spectra.epsilon_beta(e.value, st, p)
            inner = aux.epsilon_squared - (aux.beta1 + aux.beta2)
            mirrored.append(((st.n_r + aux.delta - aux.epsilon) ** 2 - inner) / aux.epsilon_squared)
        entry = {"evaluated": len(res), "complex_branch": failed}
        if res:
            r = np.abs(res)
            m = np.abs(mirrored)
            entry.update(max_abs_residual=float(r.max()), min_abs_residual=float(r.min()),
                         max_abs_eps_reflected=float(m.max()))
        quant[br.value] = entry

    quant["note"] = ("eps_reflected = [(n_r + delta - eps)^2 - (eps^2 - beta1 - beta2)] / eps^2, "
                     "the squared termination condition with eps -> -eps")

    teq = _transformed_equation_check(states[:12], alphas)

    return {
        "grid": {"n_r": list(n_r_values), "ell": list(ell_values), "D": list(D_values),
                 "alpha": list(alphas)},
        "klein_gordon": kg,
        "dirac": dirac,
        "coulomb_limit": coul,
        "quantization": quant,
        "transformed_equation": teq,
    }


def _transformed_equation_check(states, alphas):
    worst_coded, worst_flipped = 0.0, 0.0
    for st, a in product(states, alphas):
        p = ModelParams(1.0, a, 1.0)
        M = p.asymptotic_mass
        for E in np.linspace(-0.9 * M, 0.9 * M, 7):
            aux = spectra.epsilon_beta(E, st, p)
            for r in (0.3 / a, 1.0 / a, 3.0 / a):
                st_ratio = 1.0 / math.expm1(a * r)
                mu, V = mass_function(r, p), hulthen_potential(r, p)
                target = (mu + E - V) * (mu - E + V)
                coded = a * a * (aux.epsilon_squared + (aux.beta1 + aux.beta2) * st_ratio)
                flipped_sum = aux.beta1 + (p.Z**2 * a - 2 * p.Z * E) / a
                flipped = a * a * (aux.epsilon_squared + flipped_sum * st_ratio)
                worst_coded = max(worst_coded, abs(coded - target) / abs(target))
                worst_flipped = max(worst_flipped, abs(flipped - target) / abs(target))
    return {
        "max_relative_difference_as_coded": worst_coded,
        "max_relative_difference_with_beta2_sign_of_E_reversed": worst_flipped,
        "note": "compares (mu+E-V)(mu-E+V) against alpha^2 [eps^2 + (beta1+beta2) s/(1-s)]",
    }


@lru_cache(maxsize=None)
def _cached_search(representative: QuantumState, p: ModelParams, mode: oracle.CentrifugalMode):
    pb = oracle.ShootingProblem(representative, p, mode)
    return oracle.find_eigenvalues(pb, count=pb.n_scan)


def oracle_eigenvalue(state: QuantumState, p: ModelParams, mode, **opts):
    """Like ``oracle.eigenvalue_for_state``; default-option scans are shared across n_r."""
    mode = oracle.CentrifugalMode(mode)
    if opts:
        return oracle.eigenvalue_for_state(state, p, mode, **opts)
    search = _cached_search(replace(state, n_r=0), p, mode)
    return search.with_nodes(state.n_r), search


def approximation_error_report(states: Sequence[QuantumState], alphas: Sequence[float], *,
                               Z: float = 1.0, mu0: float = 1.0, **oracle_opts) -> list[dict]:
    """Closed-form Dirac energy vs oracle eigenvalues in both centrifugal modes."""
    rows = []
    for st, a in product(states, alphas):
        p = ModelParams(Z, a, mu0)
        analytic = spectra.dirac_energy(st, p)
        row = {"n_r": st.n_r, "ell": st.ell, "D": st.D, "kappa": st.kappa, "alpha": a,
               "E_closed_form": analytic.value if analytic.is_real else math.nan}
        notes = []
        for mode in oracle.CentrifugalMode:
            key = f"E_oracle_{mode.value}"
            try:
                e, search = oracle_eigenvalue(st, p, mode, **oracle_opts)
            except (oracle.IntegrationFailure, ValueError) as exc:
                row[key] = math.nan
                notes.append(f"{mode.value}: {exc}")
                continue
            row[key] = e.value if e is not None else math.nan
            if e is None:
                notes.append(f"{mode.value}: {search.diagnostic}")
        row["gap_approximated"] = abs(row["E_oracle_approximated"] - row["E_closed_form"])
        row["gap_exact"] = abs(row["E_oracle_exact"] - row["E_closed_form"])
        row["diagnostic"] = "; ".join(notes)
        rows.append(row)
    return rows


FIGURES = {
    "fig1": dict(source=Source.KLEIN_GORDON_SIMPLIFIED, axis="alpha",
                 levels=[(n, D) for n in (1, 2, 3) for D in (3, 4, 5)]),
    "fig2": dict(source=Source.DIRAC_SIMPLIFIED, axis="alpha",
                 levels=[(n, D) for n in (1, 2, 3) for D in (3, 4, 5)]),
    "fig3": dict(source=Source.KLEIN_GORDON_SIMPLIFIED, axis="dimension",
                 n_values=(3, 4, 5), alphas=(1e-6, 0.1)),
    "fig4": dict(source=Source.DIRAC_SIMPLIFIED, axis="dimension",
                 n_values=(1, 2, 3), alphas=(0.05, 0.2)),
}


def default_alpha_grid(n: int = 512) -> np.ndarray:
    return np.geomspace(1e-3, 1.5, n)


def default_dimension_grid(n: int = 256) -> np.ndarray:
    return np.linspace(2.0, 12.0, n)


def figure_curves(name: str, alpha_grid=None, dimension_grid=None) -> list[ScanCurve]:
    fig = FIGURES[name]
    if fig["axis"] == "alpha":
        grid = default_alpha_grid() if alpha_grid is None else alpha_grid
        return alpha_scan(fig["source"], fig["levels"], grid)
    grid = default_dimension_grid() if dimension_grid is None else dimension_grid
    curves = []
    for a in fig["alphas"]:
        curves += dimension_scan(fig["source"], fig["n_values"], a, grid)
    return curves
