"""Optimisation, root-finding and quadrature engines used by the bounds.

The bound objectives are cheap scalar functions with no unimodality
guarantee, so every 1-D search is a coarse grid scan followed by
golden-section refinement of the best cell.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from rab.errors import BracketError, DomainError, NonMonotoneWarning, QuadratureError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
# smallest nonzero offset of a geometric grid, as a fraction of the interval
_GEOM_FLOOR = 1e-6


@dataclass(frozen=True)
class SearchOptions:
    coarse_grid_points: int = 16
    outer_grid_points: int = 64
    refine_tolerance: float = 1e-9
    max_refinements: int = 60
    open_interval_margin: float = 1e-9

    def __post_init__(self):
        if self.coarse_grid_points < 16 or self.outer_grid_points < 16:
            raise DomainError("grids need at least 16 points per axis")
        if not 0.0 < self.refine_tolerance < 1.0:
            raise DomainError("refine_tolerance must lie in (0, 1)")
        if self.max_refinements < 1 or not self.open_interval_margin > 0.0:
            raise DomainError("max_refinements and open_interval_margin must be positive")

    def densified(self, factor):
        """Copy with every grid multiplied by ``factor``."""
        return replace(
            self,
            coarse_grid_points=self.coarse_grid_points * factor,
            outer_grid_points=self.outer_grid_points * factor,
        )


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    # e^-45 < 3e-20 of Exp(1) mass is discarded
    tail_cut: float = 45.0
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise DomainError("quadrature tolerances must be positive")
        if not self.tail_cut > 1.0:
            raise DomainError("tail_cut must exceed 1")


DEFAULT_SEARCH = SearchOptions()
DEFAULT_QUADRATURE = QuadratureSpec()


def search_interval(lo, hi, opts, open_lo=False, open_hi=False):
    """Closed interval actually scanned for (lo, hi] style domains."""
    if not lo < hi:
        raise DomainError(f"empty search interval [{lo!r}, {hi!r}]")
    width = hi - lo
    if open_lo:
        lo = lo + opts.open_interval_margin * width
    if open_hi:
        hi = hi - opts.open_interval_margin * width
    return lo, hi


def _grid(lo, hi, n, spacing):
    if spacing == "linear":
        return [float(x) for x in np.linspace(lo, hi, n)]
    if spacing == "geometric":
        # dense near lo, where the bound objectives have their boundary features
        offsets = np.concatenate(([0.0], np.geomspace(_GEOM_FLOOR, 1.0, n - 1)))
        xs = [float(lo + (hi - lo) * t) for t in offsets]
        xs[-1] = hi
        return xs
    raise DomainError(f"unknown grid spacing {spacing!r}")


def _key(v):
    return -math.inf if math.isnan(v) else v


def maximize_1d(f, lo, hi, opts=DEFAULT_SEARCH, *, open_lo=False, open_hi=False,
                spacing="linear", points=None):
    """Maximise ``f`` over [lo, hi]; returns ``(arg, val)``.

    Open endpoints are pulled in by ``opts.open_interval_margin`` times the
    interval width. A value of +inf anywhere on the grid is returned at once:
    the supremum is infinite. If every value is -inf or NaN the result is
    ``(nan, -inf)``.
    """
    lo, hi = search_interval(lo, hi, opts, open_lo, open_hi)
    n = points or opts.coarse_grid_points
    xs = _grid(lo, hi, n, spacing)
    fs = [f(x) for x in xs]
    i = max(range(n), key=lambda j: _key(fs[j]))
    best_x, best_f = xs[i], _key(fs[i])
    if best_f == math.inf:
        return best_x, best_f
    if best_f == -math.inf:
        return math.nan, -math.inf

    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n - 1)]
    xtol = opts.refine_tolerance * (hi - lo)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = _key(f(c)), _key(f(d))
    for _ in range(opts.max_refinements):
        if b - a <= xtol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = _key(f(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = _key(f(d))
    for x, v in ((c, fc), (d, fd)):
        if v > best_f:
            best_x, best_f = x, v
    return best_x, best_f


def minimize_1d(f, lo, hi, opts=DEFAULT_SEARCH, *, open_lo=False, open_hi=False,
                spacing="linear", points=None):
    """Minimise ``f`` over [lo, hi]; +inf marks infeasible points.

    Returns ``(nan, inf)`` when no finite value exists.
    """
    arg, val = maximize_1d(lambda x: -f(x), lo, hi, opts, open_lo=open_lo,
                           open_hi=open_hi, spacing=spacing, points=points)
    if val == -math.inf:
        return math.nan, math.inf
    return arg, -val


def bisect_monotone(f, target, lo, hi, tol=1e-12, *, log_scale=False,
                    max_expand=60, monotone_samples=8):
    """Solve f(x) = target for monotone f by bisection.

    The direction of monotonicity is read off the endpoints. If the target is
    not bracketed the interval is widened geometrically, up to a factor of
    2**max_expand, before :class:`BracketError` is raised. ``log_scale``
    bisects on ln x, for positive unknowns spanning many decades.

    Stops when |f(x) - target| <= tol * (1 + |target|) or the bracket is
    narrower than 1e-14 relative. A :class:`NonMonotoneWarning` is issued if
    sampling the original bracket contradicts monotonicity.
    """
    if not lo < hi:
        raise DomainError(f"empty bracket [{lo!r}, {hi!r}]")
    if log_scale and not lo > 0.0:
        raise DomainError("log-scale bisection needs lo > 0")

    def g(x):
        return f(x) - target

    def midpoint(a, b):
        return math.sqrt(a * b) if log_scale else 0.5 * (a + b)

    orig = (lo, hi)
    glo, ghi = g(lo), g(hi)
    for step in range(max_expand + 1):
        if glo == 0.0:
            return lo
        if ghi == 0.0:
            return hi
        if (glo < 0.0) != (ghi < 0.0):
            break
        if step == max_expand:
            raise BracketError(
                f"no sign change for target {target!r} in [{lo!r}, {hi!r}]",
                bracket=(lo, hi))
        if log_scale:
            lo, hi = lo / 2.0, hi * 2.0
        else:
            half = hi - lo
            lo, hi = lo - half / 2.0, hi + half / 2.0
        glo, ghi = g(lo), g(hi)

    increasing = ghi > glo
    a, b = lo, hi
    scale = tol * (1.0 + abs(target))
    while True:
        x = midpoint(a, b)
        if b - a <= 1e-14 * max(abs(a), abs(b)) or not a < x < b:
            break
        gx = g(x)
        if abs(gx) <= scale:
            break
        if (gx < 0.0) == increasing:
            a = x
        else:
            b = x

    if monotone_samples > 1:
        xs = np.geomspace(*orig, monotone_samples) if log_scale else np.linspace(*orig, monotone_samples)
        vals = [f(float(t)) for t in xs]
        diffs = np.diff(vals)
        # ignore rounding-level wobble on flat stretches
        slack = 1e-12 * float(np.max(np.abs(vals)))
        ok = np.all(diffs >= -slack) if increasing else np.all(diffs <= slack)
        if not ok:
            warnings.warn(f"function not monotone on [{orig[0]!r}, {orig[1]!r}]",
                          NonMonotoneWarning, stacklevel=2)
    return x


def expect_exponential(f, spec=DEFAULT_QUADRATURE, breakpoints=()):
    """E[f(G)] for G ~ Exp(1), integrated on [0, tail_cut].

    The discarded tail is at most sup_{g > tail_cut} |f(g)| * exp(-tail_cut).
    ``breakpoints`` flags places where f changes quickly so the adaptive
    subdivision does not step over them.
    """
    cut = spec.tail_cut
    pts = sorted({float(p) for p in breakpoints if 0.0 < p < cut})
    kwargs = {"points": pts} if pts else {}
    val, err, _info, *message = integrate.quad(
        lambda g: math.exp(-g) * f(g), 0.0, cut,
        epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=1, **kwargs)
    # QUADPACK only appends a message when it stopped abnormally
    if message and err > max(spec.abs_tol, spec.rel_tol * abs(val)):
        raise QuadratureError(
            f"quadrature did not converge: estimate {val!r} +- {err!r} ({message[0]})",
            estimate=val, achieved=err)
    return val
