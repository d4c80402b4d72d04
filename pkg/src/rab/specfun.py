"""Special functions and stable primitives shared by every bound.

Everything here works in nats. The codebook size M = 2**k is never formed;
callers pass ``ln_M`` (or a :class:`SystemParams`) instead, so k = 1024 is
as cheap and as safe as k = 1.

Scalar paths use :mod:`math` because the bound optimisers call these
functions millions of times.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from rab.errors import DomainError

LN2 = math.log(2.0)
_LN10 = math.log(10.0)
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
# Below this p, Q^-1 switches to the log-domain Newton solver.
_Q_INV_DIRECT_MIN = 1e-15


@dataclass(frozen=True)
class SystemParams:
    """One problem instance: payload ``k`` bits, UE density ``mu``,
    activity probability ``p_a`` and target PUPE ``eps``.

    Derived quantities (``ln_M``, ``pa_mu``, ``S``) are properties so they can
    never drift from the fields; use :func:`dataclasses.replace` to mutate.
    """

    k: int
    mu: float
    p_a: float
    eps: float

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu!r}")
        if not 0.0 < self.p_a <= 1.0:
            raise DomainError(f"p_a must lie in (0, 1], got {self.p_a!r}")
        # 1 - 2^-k, formed without materialising 2^k
        eps_max = -math.expm1(-self.k * LN2)
        if not 0.0 < self.eps < eps_max:
            raise DomainError(f"eps must lie in (0, 1 - 2^-k), got {self.eps!r}")

    @classmethod
    def from_pa_mu(cls, k, pa_mu, p_a, eps):
        """Build from the active density p_a*mu instead of mu."""
        return cls(k=k, mu=pa_mu / p_a, p_a=p_a, eps=eps)

    @property
    def ln_M(self):
        return self.k * LN2

    @property
    def pa_mu(self):
        return self.p_a * self.mu

    @property
    def S(self):
        """Spectral efficiency in bits per channel use."""
        return self.pa_mu * self.k


@dataclass(frozen=True)
class EnergyPerBit:
    """Energy-per-bit held as its natural log.

    ``ln_linear = +inf`` is the infeasible state. A finite ``ln_linear`` whose
    exponential overflows is still feasible: ``db`` stays exact and
    ``overflow`` is set.
    """

    ln_linear: float

    @classmethod
    def from_linear(cls, value):
        if math.isnan(value) or value <= 0.0:
            raise DomainError(f"energy-per-bit must be positive, got {value!r}")
        return cls(math.log(value))

    @classmethod
    def infeasible(cls):
        return cls(math.inf)

    @property
    def feasible(self):
        return math.isfinite(self.ln_linear)

    @property
    def overflow(self):
        return self.feasible and math.isinf(self.linear)

    @property
    def linear(self):
        if not self.feasible:
            return math.inf
        try:
            return math.exp(self.ln_linear)
        except OverflowError:
            return math.inf

    @property
    def db(self):
        if not self.feasible:
            return math.inf
        return 10.0 * self.ln_linear / _LN10


def _check_prob(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {p!r}")


def _h_core(q):
    # q <= 0.5 here, so 1 - q is exact and log1p(-q) keeps full precision
    if q == 0.0:
        return 0.0
    return -q * math.log(q) - (1.0 - q) * math.log1p(-q)


def _h(p):
    """Binary entropy in nats without domain checks."""
    return _h_core(p if p <= 0.5 else 1.0 - p)


def h_nats(p):
    """Binary entropy in nats, with 0 ln 0 = 0."""
    _check_prob(p)
    return _h(p)


def h_bits(p):
    """Binary entropy in bits."""
    return h_nats(p) / LN2


def q_func(x):
    """Gaussian tail probability Q(x) = P[N(0,1) > x].

    Accepts scalars or arrays. For tail arguments where Q underflows use
    :func:`log_q`.
    """
    if isinstance(x, np.ndarray):
        return 0.5 * special.erfc(x / _SQRT2)
    return 0.5 * math.erfc(x / _SQRT2)


def log_q(x):
    """ln Q(x), accurate far into the upper tail."""
    if isinstance(x, np.ndarray):
        return special.log_ndtr(-x)
    return float(special.log_ndtr(-x))


def q_inv(p):
    """Inverse Gaussian tail: the x with Q(x) = p, for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"q_inv needs p in (0, 1), got {p!r}")
    if p < _Q_INV_DIRECT_MIN:
        return q_inv_log(math.log(p))
    return -float(special.ndtri(p))


def q_inv_log(ln_p):
    """Inverse Gaussian tail for p = exp(ln_p); ln_p may be far below -745.

    Small tails are solved by Newton's method on ln Q, safeguarded by a
    bisection bracket.
    """
    if not ln_p < 0.0:
        raise DomainError(f"q_inv_log needs ln_p < 0, got {ln_p!r}")
    if ln_p > math.log(_Q_INV_DIRECT_MIN):
        return q_inv(math.exp(ln_p))

    lo, hi = 0.0, 40.0
    while log_q(hi) > ln_p:
        lo, hi = hi, 2.0 * hi
    # asymptotic start: Q(x) ~ phi(x)/x
    y = -2.0 * ln_p
    x = math.sqrt(max(y - math.log(y) - 2.0 * _LN_SQRT_2PI, 1.0))
    x = min(max(x, lo), hi)
    for _ in range(100):
        lq = log_q(x)
        resid = lq - ln_p
        if resid > 0.0:
            lo = x
        else:
            hi = x
        # d/dx ln Q(x) = -phi(x)/Q(x)
        slope = -math.exp(-0.5 * x * x - _LN_SQRT_2PI - lq)
        step = resid / slope
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4e-16 * x:
            return x_new
        x = x_new
    return x


def _tlog(t):
    """t - log1p(t) without cancellation for small t."""
    if -0.1 < t < 0.1:
        # log1p(t) = 2 atanh(u) with u = t/(2+t), and t - 2u = t u
        u = t / (2.0 + t)
        w = u * u
        tail = 1 / 3 + w * (1 / 5 + w * (1 / 7 + w * (1 / 9 + w * (1 / 11 + w * (1 / 13 + w / 15)))))
        return t * u - 2.0 * u * w * tail
    return t - math.log1p(t)


def _neg_log(b):
    # b - 1 is exact for b in [0.5, 2]
    if b > 0.5:
        return -math.log1p(b - 1.0)
    return -math.log(b)


def _xi_len(a, d):
    """xi(a, a + d) without checks; a >= 0, d >= 0, a + d <= 1."""
    if d <= 0.0:
        return 0.0
    if a <= 0.0:
        return d * (1.0 + _neg_log(d))
    b = a + d
    if d >= a:
        # a * tlog(d/a) = d - a ln(b/a), and d/a may overflow for tiny a
        return d * _neg_log(b) + d - a * (math.log(b) - math.log(a))
    return d * _neg_log(b) + a * _tlog(d / a)


def xi(a, b):
    """Integral of -ln x over [a, b], i.e. a ln a - b ln b + b - a.

    This is the limiting normalised sum of decreasingly sorted unit-exponential
    fading powers between quantile fractions a and b.
    """
    if not 0.0 <= a <= b <= 1.0:
        raise DomainError(f"xi needs 0 <= a <= b <= 1, got a={a!r}, b={b!r}")
    return _xi_len(a, b - a)


def _verdu_phi(r, g):
    # F(r, g) = r * phi(r, g); conjugate form of the difference of roots
    sr = math.sqrt(r)
    a = math.sqrt(g * (sr + 1.0) ** 2 + 1.0)
    b = math.sqrt(g * (sr - 1.0) ** 2 + 1.0)
    return 4.0 * g * g / (a + b) ** 2


def verdu_F(r, g):
    """Auxiliary term F(r, g) of the random-matrix log-determinant functional.

    Computed as 4 g^2 r / (A + B)^2, which equals (A - B)^2 / 4 but has no
    cancellation, so r down to the subnormal range is fine.
    """
    if not r > 0.0:
        raise DomainError(f"verdu_F needs r > 0, got {r!r}")
    if not g >= 0.0:
        raise DomainError(f"verdu_F needs g >= 0, got {g!r}")
    if g == 0.0:
        return 0.0
    return r * _verdu_phi(r, g)


def verdu_V(r, g):
    """Asymptotic normalised E ln det(I + ...) for aspect ratio r at SNR g (nats)."""
    F = verdu_F(r, g)
    if g == 0.0:
        return 0.0
    return r * math.log1p(g - F) + math.log1p(r * g - F) - F / g


def verdu_MV(s, ln_M, g):
    """M * V(s / M, g) for M = exp(ln_M), with no overflow or cancellation.

    Uses F = r * phi so every O(r) term is scaled by M analytically:
    M V = s ln(1 + g - r phi) + s (g - phi) log1p(x)/x - s phi / g,
    x = r (g - phi). Tends to s ln(1 + g) as ln_M grows.
    """
    if not s > 0.0:
        raise DomainError(f"verdu_MV needs s > 0, got {s!r}")
    if not g >= 0.0:
        raise DomainError(f"verdu_MV needs g >= 0, got {g!r}")
    if g == 0.0:
        return 0.0
    r = s * math.exp(-ln_M)
    phi = _verdu_phi(r, g)
    x = r * (g - phi)
    ratio = 1.0 if abs(x) < 1e-300 else math.log1p(x) / x
    return s * (math.log1p(g - r * phi) + (g - phi) * ratio - phi / g)


def _ln_m_minus_1(ln_M):
    return ln_M + math.log1p(-math.exp(-ln_M))


def ln_M_minus_1(params):
    """ln(M - 1) = ln(2^k - 1), evaluated from ln M alone."""
    if params.k < 1:
        raise DomainError("ln(M - 1) needs k >= 1")
    if params.k == 1:
        return 0.0
    return _ln_m_minus_1(params.ln_M)
