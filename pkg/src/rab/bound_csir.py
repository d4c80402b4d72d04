"""Energy-per-bit bounds when the receiver knows the fading (CSIR).

Achievability: a Gaussian random-coding scheme decoded with a Euclidean
metric, where a fraction ``nu`` of the active users is decoded. The
required total power is

    P'(theta, psi) = 4 (e^gamma - 1)
                     / (xi(psi, psi + theta) - 4 (e^gamma - 1) xi(psi + theta, psi + theta + 1 - nu))

and the bound at fixed ``nu`` is the supremum over theta in (eps - 1 + nu, nu]
and psi in [0, nu - theta]. Since any admissible ``nu`` yields a valid
bound, :func:`eb_csir_ach` also minimises over ``nu``.

Converse: the larger of a Fano-type requirement (worst case over the
fraction theta of users left undecoded by a genie) and the single-user
quasi-static outage requirement.

Internally nu is carried as ``omega = 1 - nu`` so values next to 1 keep
full precision, and every power is handled as its natural log.
"""

import math
from dataclasses import dataclass, replace

from rab.errors import DomainError
from rab.numerics import (
    DEFAULT_QUADRATURE,
    DEFAULT_SEARCH,
    bisect_monotone,
    expect_exponential,
    maximize_1d,
    minimize_1d,
)
from rab.results import BoundResult
from rab.specfun import _h, _ln_m_minus_1, _xi_len, q_func, q_inv_log

_LN4 = math.log(4.0)


@dataclass(frozen=True)
class CsirAchPoint:
    """One (nu, theta, psi) evaluation; ``p_tot`` is +inf where infeasible."""

    nu: float
    eps_prime: float
    theta: float
    psi: float
    gamma_theta: float
    p_tot: float


def _gamma(pa, mu, ln_M, omega, theta):
    # nu = 1 - omega, so 1 - nu + theta = omega + theta
    kappa = 1.0 - pa + pa * (omega + theta)
    return (pa * mu * _h(omega + theta)
            + mu * kappa * _h(theta * pa / kappa)
            + theta * pa * mu * ln_M)


def _log_expm1(x):
    if x > 700.0:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def _log_p_tot(pa, mu, ln_M, omega, theta, psi):
    """ln P'(theta, psi), or +inf where the denominator is not positive."""
    ln_a = _LN4 + _log_expm1(_gamma(pa, mu, ln_M, omega, theta))
    xi_top = _xi_len(psi, theta)
    if xi_top <= 0.0:
        return math.inf
    xi_tail = _xi_len(psi + theta, omega)
    if xi_tail > 0.0:
        # 4 (e^gamma - 1) xi_tail >= xi_top, decided without forming e^gamma
        t = ln_a + math.log(xi_tail) - math.log(xi_top)
        if t >= 0.0:
            return math.inf
        denom = -xi_top * math.expm1(t)
    else:
        denom = xi_top
    return ln_a - math.log(denom)


def _check_nu_theta(params, nu, theta):
    if not 1.0 - params.eps < nu <= 1.0:
        raise DomainError(f"nu must lie in (1 - eps, 1], got {nu!r}")
    eps_prime = params.eps - 1.0 + nu
    if not eps_prime < theta <= nu:
        raise DomainError(f"theta must lie in ({eps_prime!r}, {nu!r}], got {theta!r}")


def gamma_theta(params, nu, theta):
    """Exponent gamma_theta in nats (binomial counting terms plus theta p_a mu ln M)."""
    _check_nu_theta(params, nu, theta)
    return _gamma(params.p_a, params.mu, params.ln_M, 1.0 - nu, theta)


def log_p_tot_csir_ach(params, nu, theta, psi):
    _check_nu_theta(params, nu, theta)
    if not 0.0 <= psi <= nu - theta:
        raise DomainError(f"psi must lie in [0, nu - theta], got {psi!r}")
    return _log_p_tot(params.p_a, params.mu, params.ln_M, 1.0 - nu, theta, psi)


def p_tot_csir_ach(params, nu, theta, psi):
    """Required total active power P'(theta, psi); +inf at infeasible points."""
    lp = log_p_tot_csir_ach(params, nu, theta, psi)
    try:
        return math.exp(lp)
    except OverflowError:
        return math.inf


def csir_ach_point(params, nu, theta, psi):
    return CsirAchPoint(nu, params.eps - 1.0 + nu, theta, psi,
                        gamma_theta(params, nu, theta),
                        p_tot_csir_ach(params, nu, theta, psi))


def _sup_theta_psi(params, omega, opts, counter=None):
    """sup over (theta, psi) of ln P' at nu = 1 - omega; returns (val, theta, psi)."""
    pa, mu, ln_M, eps = params.p_a, params.mu, params.ln_M, params.eps
    nu = 1.0 - omega

    def over_psi(theta):
        if counter is not None:
            counter[0] += 1
        psi_hi = nu - theta
        if psi_hi <= 0.0:
            return 0.0, _log_p_tot(pa, mu, ln_M, omega, theta, 0.0)
        return maximize_1d(lambda psi: _log_p_tot(pa, mu, ln_M, omega, theta, psi),
                           0.0, psi_hi, opts)

    theta, val = maximize_1d(lambda t: over_psi(t)[1], eps - omega, nu, opts,
                             open_lo=True, spacing="geometric")
    psi = over_psi(theta)[0] if math.isfinite(theta) else math.nan
    return val, theta, psi


def eb_csir_ach(params, opts=DEFAULT_SEARCH):
    """Achievable energy-per-bit with CSIR, minimised over the decoded fraction nu."""
    counter = [0]

    def outer(omega):
        return _sup_theta_psi(params, omega, opts, counter)[0]

    # nu in (1 - eps, 1]  <=>  omega in [0, eps)
    omega, val = minimize_1d(outer, 0.0, params.eps, opts, open_hi=True,
                             points=opts.outer_grid_points)
    diagnostics = {
        "coarse_grid_points": opts.coarse_grid_points,
        "outer_grid_points": opts.outer_grid_points,
        "refine_tolerance": opts.refine_tolerance,
        "inner_searches": counter[0],
        "nu_selection": "minimised over nu",
    }
    if not math.isfinite(val):
        return BoundResult.from_log_power("csir-ach", math.inf, params.S,
                                          diagnostics=diagnostics)
    _, theta, psi = _sup_theta_psi(params, omega, opts)
    witnesses = {"nu": 1.0 - omega, "theta": theta, "psi": psi}
    return BoundResult.from_log_power("csir-ach", val, params.S, witnesses, diagnostics)


def _log_fano(pa_mu, ln_M, ln_m1, h_eps, eps, theta):
    e = pa_mu * (theta * ln_M - eps * ln_m1 - h_eps)
    if e <= 0.0:
        return -math.inf
    return _log_expm1(e) - math.log(_xi_len(1.0 - theta, theta))


def _fano_consts(params):
    ln_m1 = 0.0 if params.k == 1 else _ln_m_minus_1(params.ln_M)
    return params.pa_mu, params.ln_M, ln_m1, _h(params.eps), params.eps


def p_tot_csir_conv_fano(params, theta):
    """Power demanded by the Fano constraint at undecoded fraction theta.

    The exponent is negative for small theta; the constraint is then vacuous
    and 0 is returned.
    """
    if not 0.0 < theta <= 1.0:
        raise DomainError(f"theta must lie in (0, 1], got {theta!r}")
    lp = _log_fano(*_fano_consts(params), theta)
    if lp == -math.inf:
        return 0.0
    try:
        return math.exp(lp)
    except OverflowError:
        return math.inf


def pupe_single_ue(params, p_tot, quad=DEFAULT_QUADRATURE):
    """PUPE floor of one user sending k bits alone over quasi-static fading.

    Evaluates 1 - E[Q(Q^-1(1/M) - sqrt(2 p_tot g / (p_a mu)))], g ~ Exp(1),
    in the equivalent form E[Q(sqrt(2 p_tot g / (p_a mu)) - Q^-1(1/M))],
    which avoids subtracting from 1.
    """
    if not p_tot >= 0.0:
        raise DomainError(f"p_tot must be nonnegative, got {p_tot!r}")
    if p_tot == 0.0:
        return -math.expm1(-params.ln_M)
    q0 = q_inv_log(-params.ln_M)
    two_s = 2.0 * p_tot / params.pa_mu

    def f(g):
        return q_func(math.sqrt(two_s * g) - q0)

    breaks = [max(q0 + d, 0.0) ** 2 / two_s for d in (-8.0, 0.0, 8.0)]
    return min(expect_exponential(f, quad, breakpoints=breaks), 1.0)


def _single_ue_power(params, quad):
    # tighten so the absolute tolerance resolves PUPE values near eps
    quad = replace(quad, abs_tol=min(quad.abs_tol, quad.rel_tol * params.eps))
    return bisect_monotone(lambda p: pupe_single_ue(params, p, quad), params.eps,
                           1e-6, 1e6, tol=0.0, log_scale=True)


def eb_csir_conv(params, opts=DEFAULT_SEARCH, quad=DEFAULT_QUADRATURE):
    """Converse energy-per-bit with CSIR: the tighter of the Fano and single-user constraints."""
    consts = _fano_consts(params)
    theta, ln_fano = maximize_1d(lambda t: _log_fano(*consts, t), 0.0, 1.0, opts,
                                 open_lo=True, spacing="geometric")
    p_single = _single_ue_power(params, quad)
    ln_single = math.log(p_single)
    if ln_fano >= ln_single:
        active, ln_p = "fano", ln_fano
    else:
        active, ln_p = "single-ue", ln_single
    diagnostics = {
        "active_constraint": active,
        "p_tot_fano": math.exp(ln_fano) if ln_fano > -math.inf else 0.0,
        "p_tot_single_ue": p_single,
        "coarse_grid_points": opts.coarse_grid_points,
    }
    witnesses = {"theta": theta}
    return BoundResult.from_log_power("csir-conv", ln_p, params.S, witnesses, diagnostics)
