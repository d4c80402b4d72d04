"""``rab`` command-line entry point.

Exit status: 0 success, 1 validation failure, 2 usage error, 3 I/O error.

Settings come from built-in defaults, then an optional INI file
(``--config``, sections ``[params]``, ``[sweep]``, ``[search]``), then
command-line flags.
"""

import argparse
import configparser
import sys

from rab.errors import DomainError
from rab.numerics import DEFAULT_QUADRATURE, DEFAULT_SEARCH
from rab.results import KINDS
from rab.specfun import SystemParams
from rab.sweep import (
    SweepSpec,
    UsageError,
    csv_text,
    emit_figure,
    parse_grid,
    run_point,
    run_sweep,
    validate,
    with_search,
)

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

_PARAM_KEYS = {"k": int, "pa": float, "eps": float, "mu": float, "pa_mu": float,
               "delta3": float}
_SWEEP_KEYS = {"axis": str, "grid": str, "bounds": str, "workers": int, "seed": int}
_SEARCH_KEYS = {"coarse_grid_points": int, "outer_grid_points": int, "refine_tolerance": float,
                "max_refinements": int, "open_interval_margin": float}
_DEFAULTS = {"k": 100, "pa": 0.6, "eps": 1e-3, "delta3": 0.0, "workers": 1, "seed": 1}


def _read_config(path):
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from None
    out, search = {}, {}
    for section, keys, dest in (("params", _PARAM_KEYS, out), ("sweep", _SWEEP_KEYS, out),
                                ("search", _SEARCH_KEYS, search)):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            norm = key.replace("-", "_")
            if norm not in keys:
                raise UsageError(f"unknown key {key!r} in [{section}]")
            try:
                dest[norm] = keys[norm](raw)
            except ValueError:
                raise UsageError(f"bad value {raw!r} for {key} in [{section}]") from None
    unknown = set(cp.sections()) - {"params", "sweep", "search"}
    if unknown:
        raise UsageError(f"unknown config section(s) {sorted(unknown)}")
    return out, search


def _settings(args):
    conf, search_conf = ({}, {}) if args.config is None else _read_config(args.config)
    s = dict(_DEFAULTS)
    s.update(conf)
    for key in list(_PARAM_KEYS) + list(_SWEEP_KEYS):
        val = getattr(args, key, None)
        if val is not None:
            s[key] = val
    try:
        search = with_search(DEFAULT_SEARCH, **search_conf)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    return s, search


def _bounds(s, default):
    raw = s.get("bounds")
    if raw is None:
        return default
    return tuple(b.strip() for b in raw.split(",") if b.strip())


def _params(s):
    if s.get("mu") is not None and s.get("pa_mu") is not None:
        raise UsageError("give either --mu or --pa-mu, not both")
    try:
        if s.get("pa_mu") is not None:
            return SystemParams.from_pa_mu(s["k"], s["pa_mu"], s["pa"], s["eps"])
        if s.get("mu") is None:
            raise UsageError("a point needs --mu or --pa-mu")
        return SystemParams(k=s["k"], mu=s["mu"], p_a=s["pa"], eps=s["eps"])
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _check_delta3(s):
    if not 0.0 <= s["delta3"] < 1.0:
        raise UsageError("--delta3 must lie in [0, 1)")


def _cmd_point(args):
    s, search = _settings(args)
    _check_delta3(s)
    params = _params(s)
    bounds = _bounds(s, KINDS)
    results = run_point(params, bounds, search, DEFAULT_QUADRATURE, s["delta3"])
    axis = "pa_mu" if s.get("pa_mu") is not None else "mu"
    value = params.pa_mu if axis == "pa_mu" else params.mu
    spec = SweepSpec(axis, (value,), {"k": params.k, "p_a": params.p_a, "eps": params.eps},
                     bounds, search, DEFAULT_QUADRATURE, s["delta3"])
    text = csv_text(spec, [results])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_sweep(args):
    s, search = _settings(args)
    _check_delta3(s)
    if s.get("grid") is None:
        raise UsageError("sweep needs --grid start:stop:points:log")
    if not args.out:
        raise UsageError("sweep needs --out PATH")
    axis = s.get("axis") or "mu"
    spec = SweepSpec(axis, parse_grid(s["grid"]), {"k": s["k"], "p_a": s["pa"], "eps": s["eps"]},
                     _bounds(s, KINDS), search, DEFAULT_QUADRATURE, s["delta3"])
    summary = run_sweep(spec, args.out, workers=s["workers"])
    print(f"wrote {summary['rows']} rows to {summary['csv']} "
          f"(metadata {summary['metadata']})")
    return EXIT_OK


def _cmd_figure(args):
    s, search = _settings(args)
    _check_delta3(s)
    files = emit_figure(args.which, args.out or ".", search, DEFAULT_QUADRATURE,
                        workers=s["workers"], points=args.points, k=s["k"], eps=s["eps"],
                        delta3=s["delta3"])
    for f in files:
        print(f)
    return EXIT_OK


def _cmd_validate(args):
    s, search = _settings(args)
    status, outcomes = validate(args.out, s["seed"], search)
    for o in outcomes:
        if not o.passed:
            print(f"FAIL {o.name}: {o.detail}", file=sys.stderr)
    print(f"{sum(o.passed for o in outcomes)}/{len(outcomes)} checks passed")
    return EXIT_VALIDATION if status else EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, help="payload in bits (default 100)")
    common.add_argument("--pa", type=float, help="activity probability p_a (default 0.6)")
    common.add_argument("--eps", type=float, help="target PUPE (default 1e-3)")
    common.add_argument("--mu", type=float, help="UE density")
    common.add_argument("--pa-mu", dest="pa_mu", type=float, help="active UE density p_a*mu")
    common.add_argument("--bounds", help="comma-separated subset of " + ",".join(KINDS))
    common.add_argument("--grid", help="start:stop:points[:log|lin]")
    common.add_argument("--axis", choices=("mu", "pa_mu"), help="sweep axis (default mu)")
    common.add_argument("--config", metavar="FILE", help="INI file with [params] [sweep] [search]")
    common.add_argument("--out", metavar="PATH", help="output file or directory")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--delta3", type=float, help="override of the delta3 margin (default 0)")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")

    parser = argparse.ArgumentParser(prog="rab", description="Random-access energy-per-bit bounds.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("point", parents=[common], help="evaluate bounds at one point")
    sub.add_parser("sweep", parents=[common], help="sweep mu or p_a*mu, write CSV + JSON")
    fig = sub.add_parser("figure", parents=[common], help="reproduce figure data")
    fig.add_argument("which", choices=("fig1", "fig2"))
    fig.add_argument("--points", type=int, help="grid points (default 31 / 25)")
    sub.add_parser("validate", parents=[common], help="Monte Carlo and ordering checks")
    return parser


_COMMANDS = {"point": _cmd_point, "sweep": _cmd_sweep, "figure": _cmd_figure,
             "validate": _cmd_validate}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
