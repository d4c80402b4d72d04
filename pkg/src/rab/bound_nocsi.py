"""Energy-per-bit bounds when neither side knows the fading (no-CSI).

Achievability uses a projection decoder; the required power at error
fraction theta follows the chain delta1* -> V -> c, q -> delta2* -> W -> P'.
The converse compares the Fano requirement with a random-matrix
log-determinant mutual-information bound and solves for the smallest
total power that closes the gap.
"""

import math
import warnings
from dataclasses import dataclass, replace

from rab.errors import DomainError, NonMonotoneWarning
from rab.numerics import DEFAULT_SEARCH, bisect_monotone, maximize_1d
from rab.results import BoundResult
from rab.specfun import _h, _ln_m_minus_1, _xi_len, verdu_MV, verdu_V


@dataclass(frozen=True)
class NoCsiThetaTerms:
    """Every intermediate of the achievability chain at one theta.

    ``v_theta`` can underflow for large k; ``ln_v_theta``, ``ln_w_theta`` and
    ``ln_p_tot`` stay exact.
    """

    theta: float
    delta1_star: float
    ln_v_theta: float
    v_theta: float
    c_theta: float
    q_theta: float
    delta2_star: float
    ln_w_theta: float
    w_theta: float
    delta3_star: float
    ln_p_tot: float
    p_tot: float


def _safe_exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _terms(pa, mu, ln_M, delta3, theta):
    pa_mu = pa * mu
    one_m = 1.0 - pa_mu
    den = one_m + theta * pa_mu
    delta1 = pa_mu / one_m * _h(theta)
    act = 1.0 - pa + theta * pa
    x = (delta1
         + den / one_m * _h(theta * pa_mu / den)
         + theta * pa_mu * ln_M / one_m
         + mu * act / one_m * _h(theta * pa / act))
    # V = exp(-x);  (1 - V)/V = expm1(x);  c = 2V/(1 - V)
    em1 = math.expm1(x) if x < 700.0 else math.inf
    c = 2.0 * math.exp(-x) / -math.expm1(-x)
    q = pa_mu * _h(theta) / den
    delta2 = q * (1.0 + c) + math.sqrt(q * q * c * (2.0 + c) + 2.0 * q * (1.0 + c))
    ln_em1 = math.log(em1) if x < 700.0 else x + math.log1p(-math.exp(-x))
    ln_w = ln_em1 + math.log1p(delta2)
    ln_p = ln_w - math.log1p(-delta3) - math.log(_xi_len(1.0 - theta, theta))
    return NoCsiThetaTerms(
        theta=theta, delta1_star=delta1, ln_v_theta=-x, v_theta=math.exp(-x),
        c_theta=c, q_theta=q, delta2_star=delta2, ln_w_theta=ln_w,
        w_theta=_safe_exp(ln_w), delta3_star=delta3, ln_p_tot=ln_p,
        p_tot=_safe_exp(ln_p))


def _check(params, delta3):
    if not params.pa_mu < 1.0:
        raise DomainError("no-CSI bounds need p_a * mu < 1")
    if not 0.0 <= delta3 < 1.0:
        raise DomainError(f"delta3 must lie in [0, 1), got {delta3!r}")


def nocsi_terms(params, theta, delta3=0.0):
    """Evaluate the achievability chain at error fraction theta in (eps, 1].

    ``delta3`` defaults to the literal infimum, which is 0 because
    -ln(1 - x) > x on all of (0, 1); a positive value is a sensitivity knob.
    """
    _check(params, delta3)
    if not params.eps < theta <= 1.0:
        raise DomainError(f"theta must lie in (eps, 1], got {theta!r}")
    return _terms(params.p_a, params.mu, params.ln_M, delta3, theta)


def eb_nocsi_ach(params, opts=DEFAULT_SEARCH, delta3=0.0, kind="nocsi-ach"):
    """Achievable energy-per-bit without CSI: sup over theta of P'(theta) / S."""
    _check(params, delta3)
    pa, mu, ln_M = params.p_a, params.mu, params.ln_M
    theta, val = maximize_1d(lambda t: _terms(pa, mu, ln_M, delta3, t).ln_p_tot,
                             params.eps, 1.0, opts, open_lo=True, spacing="geometric")
    diagnostics = {"coarse_grid_points": opts.coarse_grid_points, "delta3": delta3}
    return BoundResult.from_log_power(kind, val, params.S, {"theta": theta}, diagnostics)


def eb_nocsi_ach_known_activity(params, opts=DEFAULT_SEARCH, delta3=0.0):
    """Achievability with the active set revealed: p_a -> 1 at fixed p_a * mu."""
    known = replace(params, p_a=1.0, mu=params.pa_mu)
    res = eb_nocsi_ach(known, opts, delta3, kind="nocsi-ach-known-activity")
    res.diagnostics["activity"] = "known"
    return res


def _conv_lhs(params):
    ln_m1 = 0.0 if params.k == 1 else _ln_m_minus_1(params.ln_M)
    return params.ln_M - params.eps * ln_m1 - _h(params.eps)


def nocsi_conv_gap(params, p_tot):
    """RHS - LHS of the no-CSI converse constraint, in nats per active user.

    LHS = ln M - eps ln(M - 1) - h(eps);
    RHS = M V(1/(p_a mu M), p_tot) - V(1/(p_a mu), p_tot).
    """
    if not p_tot >= 0.0:
        raise DomainError(f"p_tot must be nonnegative, got {p_tot!r}")
    s = 1.0 / params.pa_mu
    rhs = verdu_MV(s, params.ln_M, p_tot) - verdu_V(s, p_tot)
    return rhs - _conv_lhs(params)


def eb_nocsi_conv(params, opts=DEFAULT_SEARCH):
    """Converse energy-per-bit without CSI: smallest power closing the gap."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonMonotoneWarning)
        p_star = bisect_monotone(lambda p: nocsi_conv_gap(params, p), 0.0,
                                 1e-6, 1e6, tol=0.0, log_scale=True)
    diagnostics = {
        "residual": nocsi_conv_gap(params, p_star),
        "warnings": [str(w.message) for w in caught],
    }
    return BoundResult.from_log_power("nocsi-conv", math.log(p_star), params.S,
                                      {}, diagnostics)
