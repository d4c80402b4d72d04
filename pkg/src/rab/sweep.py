"""Point evaluation, parameter sweeps, figure data and the validation suite.

All file output goes through this module. CSV rows are ordered by grid
point then by bound, and every float is written with ``repr`` so reruns are
byte-identical whether or not a worker pool is used.
"""

import csv
import io
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from rab import __version__
from rab.bound_csir import eb_csir_ach, eb_csir_conv
from rab.bound_nocsi import eb_nocsi_ach, eb_nocsi_ach_known_activity, eb_nocsi_conv
from rab.errors import BracketError, DomainError, QuadratureError
from rab.mc_oracle import run_default_checks
from rab.numerics import DEFAULT_QUADRATURE, DEFAULT_SEARCH, QuadratureSpec, SearchOptions
from rab.results import KINDS, BoundResult
from rab.specfun import EnergyPerBit, SystemParams
from rab.tdma import APPROXIMATION_NOTE, tdma_eb

CSV_HEADER = ("axis", "axis_value", "bound", "eb_linear", "eb_db", "feasible",
              "theta_star", "psi_star", "nu_star", "p_tot_star",
              "active_constraint", "notes")
AXES = ("mu", "pa_mu")
FIG1_BOUNDS = ("csir-ach", "csir-conv", "tdma")
FIG2_BOUNDS = ("nocsi-ach", "nocsi-ach-known-activity", "nocsi-conv")
FIG2_PA = (0.3, 0.6, 1.0)


class UsageError(ValueError):
    """Bad command-line or sweep configuration (exit status 2)."""


def _evaluate(kind, params, search, quad, delta3):
    if kind == "csir-ach":
        return eb_csir_ach(params, search)
    if kind == "csir-conv":
        return eb_csir_conv(params, search, quad)
    if kind == "nocsi-ach":
        return eb_nocsi_ach(params, search, delta3)
    if kind == "nocsi-ach-known-activity":
        return eb_nocsi_ach_known_activity(params, search, delta3)
    if kind == "nocsi-conv":
        return eb_nocsi_conv(params, search)
    return tdma_eb(params)


def check_bounds(bounds):
    bounds = tuple(bounds)
    if not bounds:
        raise UsageError("at least one bound must be requested")
    unknown = [b for b in bounds if b not in KINDS]
    if unknown:
        raise UsageError(f"unknown bound(s) {unknown}; choose from {list(KINDS)}")
    return bounds


def run_point(params, bounds, search=DEFAULT_SEARCH, quad=DEFAULT_QUADRATURE, delta3=0.0):
    """Evaluate every requested bound at one parameter point.

    A numerical failure in one bound is recorded as an infeasible result with
    the error text in its diagnostics; the other bounds still run.
    """
    out = []
    for kind in check_bounds(bounds):
        try:
            out.append(_evaluate(kind, params, search, quad, delta3))
        except (BracketError, QuadratureError, DomainError) as exc:
            out.append(BoundResult(kind, EnergyPerBit.infeasible(), {},
                                   {"error": f"{type(exc).__name__}: {exc}"}))
    return out


def parse_grid(text):
    """Parse ``start:stop:points[:log|lin]`` (log spacing by default)."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid must be start:stop:points[:log|lin], got {text!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    mode = parts[3] if len(parts) == 4 else "log"
    if points < 1:
        raise UsageError("grid needs at least one point")
    if mode == "log":
        if not (start > 0.0 and stop > 0.0):
            raise UsageError("log grids need positive endpoints")
        vals = np.geomspace(start, stop, points) if points > 1 else np.array([start])
    elif mode == "lin":
        vals = np.linspace(start, stop, points)
    else:
        raise UsageError(f"grid spacing must be 'log' or 'lin', got {mode!r}")
    return tuple(float(v) for v in vals)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: ``axis`` is ``mu`` or ``pa_mu``; ``fixed`` holds k, p_a, eps."""

    axis: str
    grid: tuple
    fixed: dict
    bounds: tuple
    search: SearchOptions = DEFAULT_SEARCH
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE
    delta3: float = 0.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise UsageError(f"axis must be one of {AXES}, got {self.axis!r}")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "bounds", check_bounds(self.bounds))
        if not self.grid:
            raise UsageError("grid must be nonempty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise UsageError("grid must be strictly increasing")
        hi = 1.0 if self.axis == "mu" else self.fixed["p_a"]
        if not (0.0 < self.grid[0] and self.grid[-1] < hi):
            raise UsageError(f"{self.axis} grid must lie inside (0, {hi})")
        for v in (self.grid[0], self.grid[-1]):
            self.params_at(v)

    def params_at(self, value):
        f = self.fixed
        try:
            if self.axis == "mu":
                return SystemParams(k=f["k"], mu=value, p_a=f["p_a"], eps=f["eps"])
            return SystemParams.from_pa_mu(f["k"], value, f["p_a"], f["eps"])
        except DomainError as exc:
            raise UsageError(str(exc)) from None

    def to_dict(self):
        return {
            "axis": self.axis,
            "grid": list(self.grid),
            "fixed": dict(self.fixed),
            "bounds": list(self.bounds),
            "search": asdict(self.search),
            "quadrature": asdict(self.quadrature),
            "delta3": self.delta3,
        }


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def result_row(axis, value, res):
    w = res.witnesses
    notes = []
    if res.kind == "tdma":
        notes.append("zero-dispersion outage approximation")
    if "error" in res.diagnostics:
        notes.append(res.diagnostics["error"])
    if res.eb.overflow:
        notes.append("eb_linear overflows; eb_db exact")
    feasible = res.feasible
    return [
        axis, _fmt(value), res.kind,
        _fmt(res.eb.linear) if feasible else "",
        _fmt(res.eb.db) if feasible else "",
        "true" if feasible else "false",
        _fmt(w.get("theta")), _fmt(w.get("psi")), _fmt(w.get("nu")),
        _fmt(w.get("p_tot")) if feasible else "",
        res.diagnostics.get("active_constraint", ""),
        "; ".join(notes),
    ]


def _jsonable(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _point_task(args):
    spec, value = args
    return run_point(spec.params_at(value), spec.bounds, spec.search, spec.quadrature,
                     spec.delta3)


def evaluate_sweep(spec, workers=1):
    """Results per grid point, in grid order regardless of ``workers``."""
    tasks = [(spec, v) for v in spec.grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_point_task, tasks))
    return [_point_task(t) for t in tasks]


def csv_text(spec, per_point):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for value, results in zip(spec.grid, per_point):
        for res in results:
            wr.writerow(result_row(spec.axis, value, res))
    return buf.getvalue()


def metadata(spec, per_point=None, extra=None):
    meta = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "python_version": platform.python_version(),
        "spec": spec.to_dict(),
        "approximations": {"tdma": APPROXIMATION_NOTE} if "tdma" in spec.bounds else {},
        "eb_db_convention": "eb_db = 10 log10(eb_linear)",
    }
    if per_point is not None:
        meta["diagnostics"] = [
            {"axis_value": v, "bound": r.kind, "diagnostics": r.diagnostics}
            for v, results in zip(spec.grid, per_point) for r in results
        ]
    if extra:
        meta.update(extra)
    return _jsonable(meta)


def _write(path, text):
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


def sidecar_path(out_path):
    return Path(out_path).with_suffix(".json")


def run_sweep(spec, out_path, workers=1):
    """Write the sweep CSV and its JSON sidecar; returns a short summary dict.

    Raises OSError if the output cannot be written; the directory is checked
    before any bound is evaluated.
    """
    parent = Path(out_path).resolve().parent
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory {parent} does not exist")
    per_point = evaluate_sweep(spec, workers)
    csv_path = _write(out_path, csv_text(spec, per_point))
    side = _write(sidecar_path(csv_path),
                  json.dumps(metadata(spec, per_point), indent=2, sort_keys=True) + "\n")
    n_rows = sum(len(r) for r in per_point)
    n_feasible = sum(r.feasible for rs in per_point for r in rs)
    return {"csv": str(csv_path), "metadata": str(side), "rows": n_rows,
            "feasible_rows": n_feasible}


def figure_specs(which, search=DEFAULT_SEARCH, quad=DEFAULT_QUADRATURE, points=None,
                 k=100, eps=1e-3, delta3=0.0):
    """Canonical sweeps for the two figures: list of (file stem, SweepSpec)."""
    if which == "fig1":
        grid = parse_grid(f"1e-5:0.25:{points or 31}:log")
        spec = SweepSpec("mu", grid, {"k": k, "p_a": 0.6, "eps": eps}, FIG1_BOUNDS,
                         search, quad, delta3)
        return [("fig1", spec)]
    if which == "fig2":
        grid = parse_grid(f"1e-4:0.1:{points or 25}:log")
        return [(f"fig2_pa{pa}", SweepSpec("pa_mu", grid, {"k": k, "p_a": pa, "eps": eps},
                                           FIG2_BOUNDS, search, quad, delta3))
                for pa in FIG2_PA]
    raise UsageError(f"figure must be fig1 or fig2, got {which!r}")


def _gnuplot(which, stems):
    lines = [
        "# gnuplot script; run with: gnuplot " + f"{which}.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 900,600",
        f"set output '{which}.png'",
        "set logscale x",
        "set ylabel 'energy-per-bit (dB)'",
        "set key left top",
    ]
    if which == "fig1":
        lines.append("set xlabel 'mu'")
        bounds = FIG1_BOUNDS
    else:
        lines.append("set xlabel 'p_a mu'")
        bounds = FIG2_BOUNDS
    plots = []
    for stem in stems:
        for b in bounds:
            plots.append(f"'{stem}.csv' using ($3 eq '{b}' ? $2 : 1/0):5 "
                         f"with linespoints title '{stem} {b}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def emit_figure(which, out_dir, search=DEFAULT_SEARCH, quad=DEFAULT_QUADRATURE,
                workers=1, points=None, k=100, eps=1e-3, delta3=0.0):
    """Write data CSV(s), a gnuplot script and a metadata JSON for one figure."""
    specs = figure_specs(which, search, quad, points, k, eps, delta3)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files, meta = [], {"figure": which, "sweeps": {}}
    for stem, spec in specs:
        per_point = evaluate_sweep(spec, workers)
        files.append(_write(out_dir / f"{stem}.csv", csv_text(spec, per_point)))
        meta["sweeps"][stem] = metadata(spec, per_point)
    meta["approximations"] = {"tdma": APPROXIMATION_NOTE} if which == "fig1" else {}
    files.append(_write(out_dir / f"{which}.gp", _gnuplot(which, [s for s, _ in specs])))
    files.append(_write(out_dir / f"{which}.json",
                        json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n"))
    return [str(f) for f in files]


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str
    report: dict = field(default_factory=dict)


def _ordering_checks(grid, search, quad):
    out = []
    for mu in grid:
        p = SystemParams(k=100, mu=mu, p_a=0.6, eps=1e-3)
        r = {x.kind: x.eb for x in run_point(p, ("csir-ach", "csir-conv", "nocsi-ach",
                                                  "nocsi-conv"), search, quad)}
        for conv, ach in (("csir-conv", "csir-ach"), ("nocsi-conv", "nocsi-ach")):
            c, a = r[conv], r[ach]
            ok = not (c.feasible and a.feasible) or c.ln_linear <= a.ln_linear
            out.append(CheckOutcome(f"ordering[{conv}<={ach}, mu={mu:.6g}]", ok,
                                    f"{c.db:.6f} dB vs {a.db:.6f} dB"))
    return out


def _invariance_checks(pa_mu_grid, search):
    out = []
    for pm in pa_mu_grid:
        convs = [eb_nocsi_conv(SystemParams.from_pa_mu(100, pm, pa, 1e-3), search).eb
                 for pa in (0.6, 0.3)]
        rel = abs(convs[0].ln_linear - convs[1].ln_linear)
        out.append(CheckOutcome(f"invariance[nocsi-conv in p_a, pa_mu={pm:.6g}]",
                                rel <= 1e-10, f"|d ln eb| = {rel:.3g}"))
        achs = [eb_nocsi_ach(SystemParams.from_pa_mu(100, pm, pa, 1e-3), search).eb.ln_linear
                for pa in FIG2_PA]
        out.append(CheckOutcome(f"ordering[nocsi-ach decreasing in p_a, pa_mu={pm:.6g}]",
                                achs[0] > achs[1] > achs[2],
                                ", ".join(f"{x:.6f}" for x in achs)))
        p = SystemParams.from_pa_mu(100, pm, 0.6, 1e-3)
        known = eb_nocsi_ach_known_activity(p, search).eb.ln_linear
        out.append(CheckOutcome(f"ordering[known-activity<=nocsi-ach, pa_mu={pm:.6g}]",
                                known <= achs[1], f"{known:.6f} vs {achs[1]:.6f}"))
    return out


VALIDATE_MU_GRID = parse_grid("1e-5:0.2:7:log")
VALIDATE_PA_MU_GRID = parse_grid("1e-4:0.1:4:log")


def validate(out_path, seed, search=DEFAULT_SEARCH, quad=DEFAULT_QUADRATURE,
             mu_grid=VALIDATE_MU_GRID, pa_mu_grid=VALIDATE_PA_MU_GRID):
    """Run the Monte Carlo checks and the ordering/invariance suites.

    Writes a plain-text report (one PASS/FAIL line per check) to ``out_path``
    when given, and returns (exit status, outcomes): 0 iff everything passed.
    """
    outcomes = []
    for name, rep in run_default_checks(seed):
        rd = _jsonable(asdict(rep))
        detail = (f"estimate={rep.estimate:.6g} reference={rep.reference:.6g} "
                  f"z={rep.z_score:.3f}")
        if rep.ks_stat is not None:
            detail += f" ks={rep.ks_stat:.4g}"
        outcomes.append(CheckOutcome(name, rep.passed, detail, rd))
    outcomes += _ordering_checks(mu_grid, search, quad)
    outcomes += _invariance_checks(pa_mu_grid, search)
    status = 0 if all(o.passed for o in outcomes) else 1
    lines = [f"{'PASS' if o.passed else 'FAIL'} {o.name}: {o.detail}" for o in outcomes]
    lines.append(f"seed={seed} overall={'PASS' if status == 0 else 'FAIL'}")
    if out_path is not None:
        _write(out_path, "\n".join(lines) + "\n")
    return status, outcomes


def with_search(base, **overrides):
    """SearchOptions copy with the non-None overrides applied."""
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})
