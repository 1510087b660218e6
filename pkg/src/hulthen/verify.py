"""Acceptance criteria as runnable checks with measured values and tolerances."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import analysis, specfun, spectra, wavefn
from .model import Alignment, ModelParams, QuantumState
from .oracle import CentrifugalMode


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    value: float
    tolerance: float
    elapsed: float
    time_limit: float | None
    detail: str

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        budget = f" (limit {self.time_limit:g}s)" if self.time_limit else ""
        return (f"{verdict} AC{self.number} {self.name}: value={self.value:.3e} "
                f"tol={self.tolerance:.0e} time={self.elapsed:.2f}s{budget}; {self.detail}")


def coulomb_states():
    return [QuantumState(nr, l, D) for nr, l, D in product(range(4), range(3), range(2, 7))]


def oracle_states():
    return [QuantumState(nr, l, D) for nr, l, D in product(range(3), range(2), (3, 4, 5))]


ORACLE_ALPHAS = (0.1, 0.2, 0.4)
TREND_ALPHAS = (0.4, 0.2, 0.1, 0.05)


def node_states():
    return [QuantumState(nr, l, D, al) for nr, l, D, al in
            product(range(5), range(3), (2, 3, 4, 5), Alignment)]


NODE_ALPHAS = (0.1, 0.2, 0.4)
P1 = dict(Z=1.0, mu0=1.0)


def _finish(number, name, value, tol, t0, limit, detail, extra_ok=True):
    elapsed = time.perf_counter() - t0
    ok = bool(extra_ok and np.isfinite(value) and value < tol
              and (limit is None or elapsed < limit))
    return CriterionResult(number, name, ok, float(value), tol, elapsed, limit, detail)


def coulomb_anchor():
    t0 = time.perf_counter()
    worst, at = 0.0, None
    for st in coulomb_states():
        e = spectra.dirac_energy(st, ModelParams(alpha=1e-8, **P1))
        ref = spectra.coulomb_limit_energy(st, 1.0, 1.0)
        dev = abs(e.value - ref) / abs(ref) if e.is_real else math.inf
        if not dev <= worst:
            worst, at = dev, (st.n_r, st.ell, st.D, e.value, ref)
    return _finish(1, "Coulomb-limit anchor", worst, 1e-6, t0, 1.0,
                   f"worst (n_r, ell, D, E, E_limit) = {at}")


def minus_four_asymptote():
    t0 = time.perf_counter()
    worst = 0.0
    for n, D in product(range(1, 6), range(1, 51)):
        if 2 * n + D - 3 <= 0:
            continue
        e = spectra.kg_energy_simplified(n, D, 1e-8)
        worst = max(worst, abs(e.value + 4) if e.is_real else math.inf)
    return _finish(2, "-4 asymptote", worst, 1e-6, t0, 1.0, "max |E + 4| at alpha = 1e-8")


def threshold_exactness():
    t0 = time.perf_counter()
    worst, sign_ok = 0.0, True
    for n, D in product(range(1, 6), range(1, 9)):
        k = 2 * n + D - 3
        if k <= 0:
            continue
        thr = spectra.alpha_threshold("kg", n, D)
        rad = [spectra.kg_energy_simplified(n, D, thr * f).radicand
               for f in (1.0, 1 + 1e-6, 1 - 1e-6)]
        worst = max(worst, abs(rad[0]))
        sign_ok &= rad[1] < 0 < rad[2]
    return _finish(3, "threshold exactness", worst, 1e-10, t0, 1.0,
                   f"max |radicand| at threshold; sign pattern {'ok' if sign_ok else 'violated'}",
                   sign_ok)


def oracle_agreement():
    t0 = time.perf_counter()
    worst, missing, rows = 0.0, 0, []
    for st, a in product(oracle_states(), ORACLE_ALPHAS):
        p = ModelParams(alpha=a, **P1)
        ref = spectra.dirac_energy(st, p)
        if not ref.is_real:
            continue
        e, search = analysis.oracle_eigenvalue(st, p, CentrifugalMode.APPROXIMATED)
        if e is None:
            missing += 1
            worst = math.inf
            rows.append(search.diagnostic)
            continue
        worst = max(worst, abs(e.value - ref.value) / abs(ref.value))
    detail = f"{missing} state(s) without an oracle eigenvalue"
    if rows:
        detail += f"; e.g. {rows[0]}"
    return _finish(4, "oracle agreement (approximated equation)", worst, 1e-6, t0, 60.0, detail)


def quantization_consistency():
    t0 = time.perf_counter()
    worst, complex_count = 0.0, 0
    for st, a in product(oracle_states(), ORACLE_ALPHAS):
        p = ModelParams(alpha=a, **P1)
        e = spectra.dirac_energy(st, p)
        if not e.is_real:
            continue
        try:
            worst = max(worst, abs(spectra.quantization_residual(e.value, st, p)))
        except spectra.ComplexBranchError:
            complex_count += 1
            worst = math.inf
    return _finish(5, "quantization self-consistency", worst, 1e-9, t0, None,
                   f"max |residual| at the minus-branch energy; {complex_count} complex")


def jacobi_identity():
    t0 = time.perf_counter()
    x = np.linspace(-1, 1, 41)
    vals = (-0.5, 0.0, 1.5, 3.0)
    worst = 0.0
    for n, a, b in product(range(11), vals, vals):
        d = specfun.jacobi_poly(n, a, b, x) - specfun.jacobi_via_hypergeometric(n, a, b, x)
        worst = max(worst, float(np.max(np.abs(d))))
    return _finish(6, "Jacobi recurrence vs hypergeometric form", worst, 1e-11, t0, None,
                   "max abs deviation, n <= 10, 41 points")


def node_theorem():
    t0 = time.perf_counter()
    checked, bad = 0, []
    for st, a in product(node_states(), NODE_ALPHAS):
        p = ModelParams(alpha=a, **P1)
        try:
            rf = wavefn.radial_function(st, p)
        except (wavefn.InvalidStateError, spectra.DomainError):
            continue
        checked += 1
        nodes = wavefn.node_count(rf.F_values)
        if nodes != st.n_r:
            bad.append((st.n_r, st.ell, st.D, st.alignment.value, a, nodes))
    return _finish(7, "node theorem", float(len(bad)), 0.5, t0, None,
                   f"{len(bad)} of {checked} real-status states miscounted"
                   + (f"; first {bad[0]}" if bad else ""))


def spinor_residual():
    t0 = time.perf_counter()
    worst = 0.0
    for st, a in product(oracle_states(), ORACLE_ALPHAS):
        p = ModelParams(alpha=a, **P1)
        try:
            rf = wavefn.radial_function(st, p)
        except (wavefn.InvalidStateError, wavefn.PoleError):
            continue
        _, r8, r9 = wavefn.spinor_residuals(rf)
        worst = max(worst, float(np.max(r8)), float(np.max(r9)))
    return _finish(8, "spinor-pair residual", worst, 1e-6, t0, None,
                   "max relative residual of both first-order equations")


def intersection_existence():
    t0 = time.perf_counter()
    pairs = analysis.adjacent_dimension_intersections(range(1, 5), range(1, 6))
    recs = [r for _, _, rs in pairs for r in (rs or [])]
    worst_gap = max((r.energy_gap for r in recs), default=0.0)
    found = len(recs) > 0
    return _finish(9, "adjacent-dimension crossing", worst_gap, 1e-8, t0, 5.0,
                   f"{len(recs)} crossing(s) over {len(pairs)} (n, D) pairs", found)


def approximation_trend():
    t0 = time.perf_counter()
    violations, missing = 0, 0
    for st in oracle_states():
        gaps = []
        for a in TREND_ALPHAS:
            p = ModelParams(alpha=a, **P1)
            ref = spectra.dirac_energy(st, p)
            e, _ = analysis.oracle_eigenvalue(st, p, CentrifugalMode.EXACT)
            if e is None or not ref.is_real:
                gaps.append(math.nan)
            else:
                gaps.append(abs(e.value - ref.value))
        g = np.array(gaps)
        if not np.all(np.isfinite(g)):
            missing += 1
        elif np.any(np.diff(g) > 0):
            violations += 1
    value = float(violations + missing)
    return _finish(10, "approximation-quality trend", value, 0.5, t0, 120.0,
                   f"{violations} non-monotone state(s), {missing} state(s) lacking an "
                   "exact-mode eigenvalue or real closed-form energy")


def consistency_determinism():
    t0 = time.perf_counter()
    a = json.dumps(analysis.consistency_report(), sort_keys=True)
    b = json.dumps(analysis.consistency_report(), sort_keys=True)
    kg = json.loads(a)["klein_gordon"]
    characterized = "fitted_ratio" in kg and "max_relative_deviation_from_fit" in kg
    return _finish(11, "consistency report", 0.0 if a == b else 1.0, 0.5, t0, None,
                   f"kg fitted ratio {kg.get('fitted_ratio')}, max deviation "
                   f"{kg.get('max_relative_deviation_from_fit')}", characterized)


CRITERIA = (coulomb_anchor, minus_four_asymptote, threshold_exactness, oracle_agreement,
            quantization_consistency, jacobi_identity, node_theorem, spinor_residual,
            intersection_existence, approximation_trend, consistency_determinism)


def run_all() -> list[CriterionResult]:
    return [c() for c in CRITERIA]
