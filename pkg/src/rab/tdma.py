"""TDMA baseline: every user gets 1/mu channel uses to itself.

The slot power is the zero-dispersion quasi-static Rayleigh outage solution
of P[log2(1 + P g) < mu k] = eps with g ~ Exp(1):

    P* = (2^(mu k) - 1) / (-ln(1 - eps)),   energy-per-bit = P* / (mu k).

This is an approximation of the exact finite-blocklength single-user bound;
with quasi-static fading the dispersion vanishes so the correction is
O(log(n) / n) in the slot length.
"""

import math
from dataclasses import dataclass

from rab.results import BoundResult
from rab.specfun import LN2, EnergyPerBit

APPROXIMATION_NOTE = (
    "TDMA slot power uses the zero-dispersion quasi-static outage formula "
    "P* = (2^(mu k) - 1)/(-ln(1 - eps)) instead of the exact finite-blocklength bound"
)


@dataclass(frozen=True)
class TdmaPoint:
    slot_len: float
    rate: float
    p_star: float
    eb: EnergyPerBit


def _log_expm1(x):
    if x > 700.0:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def tdma_point(params):
    mu_k = params.mu * params.k
    ln_p = _log_expm1(mu_k * LN2) - math.log(-math.log1p(-params.eps))
    try:
        p_star = math.exp(ln_p)
    except OverflowError:
        p_star = math.inf
    return TdmaPoint(1.0 / params.mu, mu_k, p_star, EnergyPerBit(ln_p - math.log(mu_k)))


def outage_probability(p, rate_bits):
    """P[log2(1 + p g) < rate_bits] for g ~ Exp(1), in closed form."""
    return -math.expm1(-math.expm1(rate_bits * LN2) / p)


def tdma_eb(params):
    pt = tdma_point(params)
    diagnostics = {"approximation": APPROXIMATION_NOTE}
    if pt.eb.overflow:
        diagnostics["out_of_range"] = "energy-per-bit exceeds float range; eb_db is exact"
    witnesses = {"p_tot": pt.p_star}
    return BoundResult("tdma", pt.eb, witnesses, diagnostics)
