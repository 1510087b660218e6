"""Command-line driver: spectra, wavefunctions, scans, crossings, thresholds, checks, figures.

Precedence: command-line flags override keys from the config file (``--config``
or the HULTHEN_CONFIG environment variable), which override built-in defaults.
The config file holds one ``key = value`` per line, keys named like the long
flags (``delta-policy`` or ``delta_policy``); ``#`` starts a comment.

Exit codes: 0 ok, 2 usage or domain error, 3 I/O error, 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from itertools import product
from pathlib import Path

import numpy as np

from . import analysis, spectra, verify, wavefn
from .model import (Alignment, Branch, DomainError, ModelParams, QuantumState, Source,
                    radial_grid)
from .oracle import CentrifugalMode

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 2, 3, 4
CONFIG_ENV = "HULTHEN_CONFIG"

DEFAULTS = {
    "Z": "1", "alpha": "0.1", "mu0": "1",
    "nr": "0", "ell": "0", "dim": "3", "n": "1:3",
    "alignment": "unaligned", "branch": "minus", "delta_policy": "abs",
    "n_convention": "orbital", "formula": None, "grid": None, "axis": "alpha",
    "kind": "kg", "points": "1000", "format": "csv", "plot": "false", "out": None,
}
FORMULA_DEFAULT = {"spectrum": "dirac", "scan": "klein_gordon_simplified",
                   "intersect": "klein_gordon_simplified"}


class UsageError(ValueError):
    pass


# parsing helpers

def parse_int_range(text: str, name: str) -> list[int]:
    """'a:b' (inclusive), 'a,b,c' or 'a'."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            values = list(range(lo, hi + 1))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name}: cannot parse {text!r} as an integer range") from None
    if not values:
        raise UsageError(f"--{name}: empty range {text!r}")
    return values


def parse_float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name}: cannot parse {text!r}") from None
    if not values:
        raise UsageError(f"--{name}: empty list")
    return values


def parse_grid(text: str) -> np.ndarray:
    """'start:stop:num' with optional ':log' or ':lin' (default lin)."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"--grid: expected start:stop:num[:log|lin], got {text!r}")
    try:
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--grid: cannot parse {text!r}") from None
    spacing = parts[3] if len(parts) == 4 else "lin"
    if num < 1 or stop < start or (num > 1 and stop == start):
        raise UsageError(f"--grid: empty or reversed grid {text!r}")
    if spacing == "log":
        if start <= 0:
            raise UsageError("--grid: log spacing needs a positive start")
        return np.geomspace(start, stop, num)
    if spacing == "lin":
        return np.linspace(start, stop, num)
    raise UsageError(f"--grid: unknown spacing {spacing!r}")


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"cannot parse {text!r} as a boolean")


def read_config(path) -> dict:
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (v.strip() for v in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{num}: unknown key {key!r}")
        cfg[key] = value
    return cfg


# output

def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        return None if not math.isfinite(value) else float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def render(columns, rows, fmt_name: str, metadata: dict, comments: bool = False) -> str:
    """CSV or JSON text. CSV carries metadata as leading '# key=value' lines only
    when ``comments`` is set; JSON always has a metadata object."""
    if fmt_name == "json":
        doc = {"metadata": {k: _json_value(v) for k, v in metadata.items()},
               "columns": list(columns),
               "rows": [{c: _json_value(r[c]) for c in columns} for r in rows]}
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    for key, value in (metadata.items() if comments else ()):
        buf.write(f"# {key}={fmt(value)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# commands

def _states(cfg):
    alignments = (list(Alignment) if cfg["alignment"] == "both"
                  else [Alignment(cfg["alignment"])])
    return [QuantumState(nr, l, D, al) for nr, l, D, al in
            product(cfg["nr"], cfg["ell"], cfg["dim"], alignments)]


def _params(cfg, alpha):
    return ModelParams(cfg["Z"], alpha, cfg["mu0"])


def _state_energy(cfg, source, st, alpha):
    if source is Source.ORACLE:
        e, _ = analysis.oracle_eigenvalue(st, _params(cfg, alpha), CentrifugalMode.APPROXIMATED)
        return e.value if e else math.nan, "real" if e else "missing"
    if source in analysis.SIMPLIFIED_SOURCES:
        level = (spectra.principal_number(st, cfg["n_convention"]), st.D)
    else:
        level = st
    e = analysis.energy_function(source, level, Z=cfg["Z"], mu0=cfg["mu0"],
                                 branch=cfg["branch"])(alpha)
    return e.value, e.status.value


def cmd_spectrum(cfg) -> int:
    source = Source(cfg["formula"])
    rows = []
    for st, a in product(_states(cfg), cfg["alpha"]):
        value, status = _state_energy(cfg, source, st, a)
        rows.append({"source": source.value, "n_r": st.n_r, "ell": st.ell, "D": st.D,
                     "kappa": st.kappa, "alpha": a, "branch": cfg["branch"],
                     "energy": value, "status": status})
    cols = ["source", "n_r", "ell", "D", "kappa", "alpha", "branch", "energy", "status"]
    emit(render(cols, rows, cfg["format"], {"Z": cfg["Z"], "mu0": cfg["mu0"]}), cfg["out"])
    return EXIT_OK


def _threshold_hint(st, cfg):
    try:
        thr = spectra.dirac_alpha_threshold(st, cfg["Z"], cfg["mu0"])
    except (ValueError, ZeroDivisionError):
        return ""
    return f"; the closed-form energy is real for alpha <= {thr:.17g}"


def cmd_wavefunction(cfg) -> int:
    states = _states(cfg)
    if len(states) != 1 or len(cfg["alpha"]) != 1:
        raise UsageError("wavefunction needs exactly one state and one alpha")
    st, a = states[0], cfg["alpha"][0]
    p = _params(cfg, a)
    E = spectra.dirac_energy(st, p, cfg["branch"])
    if not E.is_real:
        raise UsageError(f"energy of {st} is imaginary at alpha = {a:g}"
                         + _threshold_hint(st, cfg))
    n = cfg["points"]
    grid = radial_grid(a, n_log=max(2, n // 5), n_lin=max(2, n - n // 5))
    rf = wavefn.normalize(wavefn.radial_function(st, p, E, grid, cfg["delta_policy"]))
    rows = [{"r": r, "F": f, "G": g} for r, f, g in zip(rf.grid, rf.F_values, rf.G_values)]
    meta = {"n_r": st.n_r, "ell": st.ell, "D": st.D, "kappa": st.kappa, "alpha": a,
            "E": E.value, "C": rf.norm_constant, "epsilon": rf.epsilon, "delta": rf.delta,
            "quantization_residual": rf.quantization_residual}
    emit(render(["r", "F", "G"], rows, cfg["format"], meta, comments=True), cfg["out"])
    return EXIT_OK


def _curve_rows(curves):
    rows = []
    for c in curves:
        for x, pt in zip(c.x, c.points):
            rows.append({"label": c.label, "axis": c.axis, "x": x, "energy": pt.value,
                         "status": pt.status.value})
    return rows


CURVE_COLUMNS = ["label", "axis", "x", "energy", "status"]


def _levels(cfg, source):
    if source in analysis.SIMPLIFIED_SOURCES:
        return list(product(cfg["n"], cfg["dim"]))
    return _states(cfg)


def cmd_scan(cfg) -> int:
    source = Source(cfg["formula"])
    if source is Source.ORACLE:
        raise UsageError("scan supports closed-form formulas only")
    kw = dict(Z=cfg["Z"], mu0=cfg["mu0"], branch=cfg["branch"])
    if cfg["axis"] == "alpha":
        grid = cfg["grid"] if cfg["grid"] is not None else analysis.default_alpha_grid()
        curves = analysis.alpha_scan(source, _levels(cfg, source), grid, **kw)
    elif cfg["axis"] == "dimension":
        grid = cfg["grid"] if cfg["grid"] is not None else analysis.default_dimension_grid()
        if np.any(grid <= 0):
            raise UsageError("dimension grid must be positive")
        curves = analysis.dimension_scan(source, cfg["n"], cfg["alpha"][0], grid, **kw)
    else:
        raise UsageError(f"unknown axis {cfg['axis']!r}")
    emit(render(CURVE_COLUMNS, _curve_rows(curves), cfg["format"], {"formula": source.value}),
         cfg["out"])
    if cfg["plot"]:
        from .plotting import write_svg
        write_svg(curves, _plot_path(cfg["out"], "scan"), source.value)
    return EXIT_OK


def _plot_path(out, stem):
    if out in (None, "-"):
        return Path(f"{stem}.svg")
    return Path(out).with_suffix(".svg")


def cmd_intersect(cfg) -> int:
    source = Source(cfg["formula"])
    if source not in analysis.SIMPLIFIED_SOURCES:
        raise UsageError("intersect supports the simplified formulas only")
    rows = []
    for (n, D), (_, D2), recs in analysis.adjacent_dimension_intersections(
            cfg["n"], cfg["dim"], source=source):
        if recs is None:
            rows.append({"n": n, "D_a": D, "D_b": D2, "alpha_star": math.nan,
                         "energy": math.nan, "energy_gap": math.nan, "note": "identical curves"})
        for r in recs or []:
            rows.append({"n": n, "D_a": D, "D_b": D2, "alpha_star": r.alpha_star,
                         "energy": r.energy, "energy_gap": r.energy_gap, "note": ""})
    cols = ["n", "D_a", "D_b", "alpha_star", "energy", "energy_gap", "note"]
    emit(render(cols, rows, cfg["format"], {"formula": source.value}), cfg["out"])
    return EXIT_OK


def cmd_threshold(cfg) -> int:
    if cfg["kind"] not in ("kg", "dirac"):
        raise UsageError("--kind must be kg or dirac")
    rows = analysis.threshold_map(cfg["kind"], cfg["n"], cfg["dim"])
    emit(render(["kind", "n", "D", "alpha_threshold"], rows, cfg["format"], {}), cfg["out"])
    return EXIT_OK


def _out_dir(cfg, default):
    path = Path(cfg["out"] or default)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_verify(cfg) -> int:
    out = _out_dir(cfg, "verify")
    results = verify.run_all()
    ext = cfg["format"]
    crit_rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "value": r.value,
                  "tolerance": r.tolerance, "elapsed": r.elapsed, "detail": r.detail}
                 for r in results]
    # timings vary run to run, so they stay out of the data file
    crit_cols = ["criterion", "name", "passed", "value", "tolerance", "detail"]
    (out / f"criteria.{ext}").write_text(render(crit_cols, crit_rows, ext, {}))
    rows = analysis.approximation_error_report(verify.oracle_states(), verify.TREND_ALPHAS)
    cols = ["n_r", "ell", "D", "kappa", "alpha", "E_closed_form", "E_oracle_approximated",
            "E_oracle_exact", "gap_approximated", "gap_exact", "diagnostic"]
    oracle_cols = cols[:7] + ["gap_approximated", "diagnostic"]
    (out / f"oracle.{ext}").write_text(render(oracle_cols, rows, ext, {"mode": "approximated"}))
    (out / f"approximation.{ext}").write_text(render(cols, rows, ext, {}))
    (out / "consistency.json").write_text(
        json.dumps(analysis.consistency_report(), indent=1, sort_keys=True, default=_json_value)
        + "\n")
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_figures(cfg) -> int:
    out = _out_dir(cfg, "figures")
    ext = cfg["format"]
    for name in analysis.FIGURES:
        curves = analysis.figure_curves(name)
        (out / f"{name}.{ext}").write_text(
            render(CURVE_COLUMNS, _curve_rows(curves), ext, {"figure": name}))
        if cfg["plot"]:
            from .plotting import TITLES, write_svg
            write_svg(curves, out / f"{name}.svg", TITLES[name])
    return EXIT_OK


COMMANDS = {
    "spectrum": (cmd_spectrum, "closed-form or oracle energies for a set of states"),
    "wavefunction": (cmd_wavefunction, "normalized (r, F, G) samples for one state"),
    "scan": (cmd_scan, "energy curves against alpha or D"),
    "intersect": (cmd_intersect, "adjacent-dimension level crossings"),
    "threshold": (cmd_threshold, "alpha above which the simplified energies turn imaginary"),
    "verify": (cmd_verify, "run the acceptance checks and write reports"),
    "figures": (cmd_figures, "data (and optionally SVG) for the four energy figures"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--Z", help="coupling (default 1)")
    g.add_argument("--alpha", help="screening parameter(s), comma separated (default 0.1)")
    g.add_argument("--mu0", help="asymptotic mass (default 1)")
    g = common.add_argument_group("states")
    g.add_argument("--nr", help="radial quantum numbers, e.g. 0:3 or 0,2 (default 0)")
    g.add_argument("--ell", help="orbital quantum numbers (default 0)")
    g.add_argument("--dim", help="dimensions (default 3)")
    g.add_argument("--n", help="principal numbers for simplified formulas (default 1:3)")
    g.add_argument("--alignment", choices=["aligned", "unaligned", "both"])
    g.add_argument("--n-convention", dest="n_convention", choices=spectra.N_CONVENTIONS,
                   help="n for simplified formulas in spectrum: n_r+ell+1 or n_r+|kappa|+1")
    g = common.add_argument_group("computation")
    g.add_argument("--branch", choices=[b.value for b in Branch])
    g.add_argument("--delta-policy", dest="delta_policy", choices=spectra.DELTA_POLICIES)
    g.add_argument("--formula", choices=[s.value for s in Source])
    g.add_argument("--grid", help="scan grid start:stop:num[:log|lin]")
    g.add_argument("--axis", choices=["alpha", "dimension"])
    g.add_argument("--kind", choices=["kg", "dirac"])
    g.add_argument("--points", help="radial grid size for wavefunction (default 1000)")
    g = common.add_argument_group("output")
    g.add_argument("--format", choices=["csv", "json"])
    g.add_argument("--plot", action="store_const", const="true", help="also write SVG")
    g.add_argument("--out", help="output file (or directory for verify/figures)")
    g.add_argument("--config", help=f"key = value config file (default ${CONFIG_ENV})")

    parser = argparse.ArgumentParser(prog="hulthen", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def resolve(args: argparse.Namespace, environ=os.environ) -> dict:
    """Merge defaults, config file and flags, then convert types."""
    raw = dict(DEFAULTS)
    cfg_path = args.config or environ.get(CONFIG_ENV)
    if cfg_path:
        raw.update(read_config(cfg_path))
    raw.update({k: v for k, v in vars(args).items() if k in DEFAULTS and v is not None})
    cmd = args.command
    cfg = {"command": cmd}
    try:
        cfg["Z"] = float(raw["Z"])
        cfg["mu0"] = float(raw["mu0"])
        cfg["points"] = int(raw["points"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg["alpha"] = parse_float_list(raw["alpha"], "alpha")
    cfg["nr"] = parse_int_range(raw["nr"], "nr")
    cfg["ell"] = parse_int_range(raw["ell"], "ell")
    cfg["dim"] = parse_int_range(raw["dim"], "dim")
    cfg["n"] = parse_int_range(raw["n"], "n")
    cfg["grid"] = parse_grid(raw["grid"]) if raw["grid"] else None
    cfg["plot"] = parse_bool(raw["plot"])
    for key in ("alignment", "branch", "delta_policy", "n_convention", "axis", "kind",
                "format", "out"):
        cfg[key] = raw[key]
    cfg["formula"] = raw["formula"] or FORMULA_DEFAULT.get(cmd, "dirac")
    choices = {"alignment": ("aligned", "unaligned", "both"),
               "branch": tuple(b.value for b in Branch), "delta_policy": spectra.DELTA_POLICIES,
               "n_convention": spectra.N_CONVENTIONS, "format": ("csv", "json"),
               "formula": tuple(s.value for s in Source)}
    for key, allowed in choices.items():
        if cfg[key] not in allowed:
            raise UsageError(f"{key}: {cfg[key]!r} not in {allowed}")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve(args)
        return COMMANDS[cfg["command"]][0](cfg)
    except (UsageError, DomainError, wavefn.InvalidStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
