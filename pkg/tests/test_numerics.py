import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rab.errors import BracketError, DomainError, NonMonotoneWarning, QuadratureError
from rab.numerics import (
    DEFAULT_SEARCH,
    QuadratureSpec,
    SearchOptions,
    bisect_monotone,
    expect_exponential,
    maximize_1d,
    minimize_1d,
    search_interval,
)


def test_search_options_validation():
    with pytest.raises(DomainError):
        SearchOptions(coarse_grid_points=8)
    with pytest.raises(DomainError):
        SearchOptions(refine_tolerance=0.0)
    d = DEFAULT_SEARCH.densified(4)
    assert d.coarse_grid_points == 64 and d.outer_grid_points == 256


def test_search_interval_open_ends():
    lo, hi = search_interval(0.0, 1.0, DEFAULT_SEARCH, open_lo=True, open_hi=True)
    assert lo == pytest.approx(1e-9) and hi == pytest.approx(1 - 1e-9)
    with pytest.raises(DomainError):
        search_interval(1.0, 1.0, DEFAULT_SEARCH)


@given(st.floats(0.05, 0.95))
def test_maximize_smooth_interior(c):
    x, v = maximize_1d(lambda t: -(t - c) ** 2, 0.0, 1.0)
    assert x == pytest.approx(c, abs=1e-6)
    assert v <= 0.0 and v > -1e-12


def test_maximize_open_boundary_sup_hits_shrunk_end():
    # decreasing function: sup over (0, 1] is approached at the open end
    x, v = maximize_1d(lambda t: -t, 0.0, 1.0, open_lo=True, spacing="geometric")
    assert x == pytest.approx(1e-9, rel=1e-12)
    assert v == pytest.approx(-1e-9, rel=1e-12)


def test_maximize_infinite_and_infeasible():
    x, v = maximize_1d(lambda t: math.inf if t > 0.5 else 0.0, 0.0, 1.0)
    assert v == math.inf and x > 0.5
    x, v = maximize_1d(lambda t: -math.inf, 0.0, 1.0)
    assert math.isnan(x) and v == -math.inf
    x, v = minimize_1d(lambda t: math.inf, 0.0, 1.0)
    assert math.isnan(x) and v == math.inf


def test_maximize_nan_treated_as_infeasible():
    x, v = maximize_1d(lambda t: math.nan if t < 0.5 else 1.0 - t, 0.0, 1.0)
    assert x == pytest.approx(0.5, abs=0.07) and v == pytest.approx(0.5, abs=0.07)


def test_minimize():
    x, v = minimize_1d(lambda t: (t - 0.3) ** 2 + 1.0, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6) and v == pytest.approx(1.0, abs=1e-12)


def test_bisect_increasing_and_decreasing():
    assert bisect_monotone(lambda x: x * x, 4.0, 0.0, 10.0) == pytest.approx(2.0, rel=1e-12)
    assert bisect_monotone(lambda x: -x, -3.0, 0.0, 10.0) == pytest.approx(3.0, rel=1e-12)


def test_bisect_log_scale_expands_bracket():
    x = bisect_monotone(math.log, math.log(1e9), 1.0, 10.0, tol=0.0, log_scale=True)
    assert x == pytest.approx(1e9, rel=1e-12)


def test_bisect_bracket_failure():
    with pytest.raises(BracketError) as info:
        bisect_monotone(lambda x: 1.0, 0.0, 1.0, 2.0, max_expand=3)
    assert info.value.bracket[0] < 1.0
    with pytest.raises(DomainError):
        bisect_monotone(lambda x: x, 0.0, 0.0, 1.0, log_scale=True)


def test_bisect_warns_on_non_monotone():
    with pytest.warns(NonMonotoneWarning):
        bisect_monotone(lambda x: math.sin(3 * x), 0.5, 0.0, 4.0)


def test_bisect_no_warning_on_flat_rounding_noise():
    def f(x):
        # flat at 1 with an ulp of noise, then decreasing
        return 1.0 + 2e-16 * (x < 0.2) if x < 0.5 else 1.5 - x
    with warnings.catch_warnings():
        warnings.simplefilter("error", NonMonotoneWarning)
        assert bisect_monotone(f, 0.7, 0.0, 1.0) == pytest.approx(0.8, rel=1e-12)


def test_expectation_moments():
    spec = QuadratureSpec()
    assert expect_exponential(lambda g: 1.0, spec) == pytest.approx(1.0, rel=1e-12)
    assert expect_exponential(lambda g: g, spec) == pytest.approx(1.0, rel=1e-12)
    assert expect_exponential(lambda g: g * g, spec, breakpoints=[1.0]) == pytest.approx(2.0, rel=1e-12)


def test_expectation_raises_when_not_converged():
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=2)
    with pytest.raises(QuadratureError) as info:
        expect_exponential(lambda g: math.sin(50 * g) ** 2, spec)
    assert info.value.achieved > 0.0
