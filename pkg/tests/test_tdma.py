import math

import numpy as np
import pytest

from rab.specfun import SystemParams
from rab.tdma import APPROXIMATION_NOTE, outage_probability, tdma_eb, tdma_point


def test_small_mu_limit():
    eb = tdma_eb(SystemParams(k=100, mu=1e-9, p_a=0.6, eps=1e-3)).eb
    assert eb.linear == pytest.approx(math.log(2) / -math.log1p(-1e-3), rel=1e-6)
    assert eb.db == pytest.approx(28.4, abs=0.05)


def test_closed_form_point(pins):
    res = tdma_eb(SystemParams(k=100, mu=0.05, p_a=0.6, eps=1e-3))
    assert res.eb.linear == pytest.approx(31 / -math.log(0.999) / 5, rel=1e-12)
    assert res.eb.db == pytest.approx(37.9, abs=0.05)
    assert res.diagnostics["approximation"] == APPROXIMATION_NOTE


def test_point_invariants():
    pt = tdma_point(SystemParams(k=100, mu=0.05, p_a=0.6, eps=1e-3))
    assert pt.slot_len * pt.rate == pytest.approx(100)
    assert pt.eb.linear == pytest.approx(pt.p_star / (0.05 * 100), rel=1e-14)


def test_large_eps_needs_little_power():
    lo = tdma_point(SystemParams(k=10, mu=0.1, p_a=0.6, eps=1 - 1e-3)).p_star
    hi = tdma_point(SystemParams(k=10, mu=0.1, p_a=0.6, eps=0.5)).p_star
    assert lo < hi and lo < 0.2


def test_outage_identity():
    for mu in (0.001, 0.01, 0.05, 0.1):
        pt = tdma_point(SystemParams(k=100, mu=mu, p_a=0.6, eps=1e-3))
        assert abs(outage_probability(pt.p_star, pt.rate) - 1e-3) <= 1e-12


def test_increasing_in_mu():
    mus = np.linspace(0.01, 0.99, 50)
    vals = [tdma_eb(SystemParams(k=100, mu=float(m), p_a=0.6, eps=1e-3)).eb.ln_linear for m in mus]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_log_domain_reporting_beyond_float_range():
    res = tdma_eb(SystemParams(k=5000, mu=0.9, p_a=0.6, eps=1e-3))
    assert res.feasible and res.eb.overflow
    assert res.eb.db == pytest.approx(10 * (4500 * math.log(2) - math.log(-math.log1p(-1e-3))
                                            - math.log(4500)) / math.log(10), rel=1e-12)
    assert "out_of_range" in res.diagnostics
