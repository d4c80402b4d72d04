"""Monte Carlo checks of the probabilistic ingredients behind the bounds.

Each check draws from a generator keyed by ``(seed, check id, chunk index)``
with a fixed chunk size, so results do not depend on how trials are
scheduled and a given :class:`McConfig` always reproduces the same report.
Complex Gaussians are circularly symmetric with unit variance (1/2 per
real component).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from rab.errors import DomainError
from rab.specfun import xi

_CHECK_IDS = {
    "sorted_fading_partial_sum": 1,
    "beta_projection_law": 2,
    "mgf_identity_check": 3,
    "chi2_tail_check": 4,
}
_KS_CRIT_1PCT = 1.63
_Z_PASS = 3.0


@dataclass(frozen=True)
class McConfig:
    """Sampling configuration. ``n == k_a`` is allowed: the error subspace
    then fills the whole space and the projection fraction is exactly 1."""

    seed: int = 20240101
    trials: int = 10_000
    n: int = 200
    k_a: int = 20
    t: int = 5

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.trials < 1:
            raise DomainError("trials must be positive")
        if self.t < 1:
            raise DomainError("t must be at least 1")
        if self.k_a < self.t:
            raise DomainError("k_a must be at least t")
        if self.n < self.k_a:
            raise DomainError("n must be at least k_a")


@dataclass(frozen=True)
class McReport:
    check: str
    estimate: float
    std_error: float
    reference: float
    z_score: float
    passed: bool
    ks_stat: float = None
    detail: str = ""


def _chunks(cfg, check, chunk_size):
    """Yield (rng, count) pairs covering cfg.trials in fixed-size chunks."""
    cid = _CHECK_IDS[check]
    for i, start in enumerate(range(0, cfg.trials, chunk_size)):
        ss = np.random.SeedSequence(cfg.seed, spawn_key=(cid, i))
        yield np.random.default_rng(ss), min(chunk_size, cfg.trials - start)


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf
    return float(x.mean()), se


def _z(est, ref, se):
    if se > 0.0:
        return (est - ref) / se
    return 0.0 if est == ref else math.copysign(math.inf, est - ref)


def sorted_fading_partial_sum(cfg, a, b):
    """Normalised partial sum of sorted unit-exponential powers vs xi(a, b).

    Per trial, ``k_a`` powers are sorted decreasingly and entries
    ceil(a k_a)+1 .. ceil(b k_a) (1-based) are summed and divided by k_a.
    """
    if not 0.0 <= a < b <= 1.0:
        raise DomainError(f"need 0 <= a < b <= 1, got a={a!r}, b={b!r}")
    k = cfg.k_a
    lo, hi = math.ceil(a * k), math.ceil(b * k)
    sums = []
    for rng, m in _chunks(cfg, "sorted_fading_partial_sum", 8):
        g = rng.standard_exponential((m, k))
        g = -np.sort(-g, axis=1)
        sums.append(g[:, lo:hi].sum(axis=1) / k)
    est, se = _mean_se(np.concatenate(sums))
    ref = xi(a, b)
    z = _z(est, ref, se)
    return McReport("sorted_fading_partial_sum", est, se, ref, z, abs(z) <= _Z_PASS)


def _projection_fractions(cfg):
    n_t = cfg.n - cfg.k_a + cfg.t
    out = []
    for rng, m in _chunks(cfg, "beta_projection_law", 1000):
        basis, _ = np.linalg.qr(_complex_normal(rng, (m, n_t, cfg.t)))
        # fixed unit vector e_1: projected energy is the squared first row
        out.append(np.sum(np.abs(basis[:, 0, :]) ** 2, axis=1))
    return np.concatenate(out)


def beta_projection_law(cfg):
    """Squared projection of a fixed unit vector onto a random t-dim subspace
    of C^(n - k_a + t), compared with Beta(t, n - k_a) by a KS test at 1%."""
    frac = _projection_fractions(cfg)
    est, se = _mean_se(frac)
    dof2 = cfg.n - cfg.k_a
    crit = _KS_CRIT_1PCT / math.sqrt(cfg.trials)
    if dof2 == 0:
        # point mass at 1
        ks = float(np.max(np.abs(frac - 1.0)))
        return McReport("beta_projection_law", est, se, 1.0, _z(est, 1.0, se),
                        ks < 1e-10, ks, "full-space subspace")
    ref = cfg.t / (cfg.t + dof2)
    ks = float(stats.kstest(frac, stats.beta(cfg.t, dof2).cdf).statistic)
    return McReport("beta_projection_law", est, se, ref, _z(est, ref, se), ks < crit, ks,
                    f"KS critical value {crit:.6g}")


def mgf_reference(n, gamma, b_abs, u_norm_sq):
    phi = 1.0 + gamma * b_abs * b_abs
    return math.exp(-n * math.log(phi) - gamma * u_norm_sq / phi)


def mgf_identity_check(cfg, gamma, b_abs, u_norm_sq, n=None):
    """E exp(-gamma |b a + u|^2) for a ~ CN(0, I_n) against its closed form.

    ``n`` defaults to ``cfg.n``. Passes when |z| <= 3.
    """
    n = cfg.n if n is None else n
    if n < 1:
        raise DomainError("n must be positive")
    if b_abs < 0.0 or u_norm_sq < 0.0:
        raise DomainError("|b| and |u|^2 must be nonnegative")
    if not 1.0 + gamma * b_abs * b_abs > 0.0:
        raise DomainError("gamma must exceed -1/|b|^2; the MGF diverges otherwise")
    u = np.zeros(n, dtype=complex)
    u[0] = math.sqrt(u_norm_sq)
    vals = []
    for rng, m in _chunks(cfg, "mgf_identity_check", 100_000):
        v = b_abs * _complex_normal(rng, (m, n)) + u
        vals.append(np.exp(-gamma * np.sum(np.abs(v) ** 2, axis=1)))
    est, se = _mean_se(np.concatenate(vals))
    ref = mgf_reference(n, gamma, b_abs, u_norm_sq)
    z = _z(est, ref, se)
    return McReport("mgf_identity_check", est, se, ref, z, abs(z) <= _Z_PASS,
                    detail=f"relative error {abs(est - ref) / ref:.3g}")


def chi2_bound(kind, dof, noncentrality, x):
    """Analytic tail bound for a real chi-square variable with ``dof`` degrees.

    central-lower:    P[chi <= d/x] <= exp(-d/2 (ln x + 1/x - 1)),  x > 1
    noncentral-upper: P[chi >= x + a + d]
                      <= exp(-(x + d + 2a - sqrt(d + 2a) sqrt(2x + d + 2a))/2),  x > 0
    """
    if dof < 1:
        raise DomainError("dof must be at least 1")
    if kind == "central-lower":
        if not x > 1.0:
            raise DomainError("central-lower needs x > 1")
        return math.exp(-0.5 * dof * (math.log(x) + 1.0 / x - 1.0))
    if kind == "noncentral-upper":
        if not x > 0.0:
            raise DomainError("noncentral-upper needs x > 0")
        if noncentrality < 0.0:
            raise DomainError("noncentrality must be nonnegative")
        s = dof + 2.0 * noncentrality
        return math.exp(-0.5 * (x + s - math.sqrt(s) * math.sqrt(2.0 * x + s)))
    raise DomainError(f"unknown chi-square check kind {kind!r}")


def chi2_tail_check(cfg, kind, dof, noncentrality, x):
    """One-sided check: the empirical tail may exceed the bound by at most 3 sigma."""
    bound = chi2_bound(kind, dof, noncentrality, x)
    hits = 0
    for rng, m in _chunks(cfg, "chi2_tail_check", 100_000):
        if kind == "central-lower":
            hits += int(np.count_nonzero(rng.chisquare(dof, m) <= dof / x))
        else:
            draw = (rng.noncentral_chisquare(dof, noncentrality, m) if noncentrality > 0.0
                    else rng.chisquare(dof, m))
            hits += int(np.count_nonzero(draw >= x + noncentrality + dof))
    p = hits / cfg.trials
    # floor the standard error at one hit so a zero count is not overconfident
    se = math.sqrt(max(p * (1.0 - p), 1.0 / cfg.trials) / cfg.trials)
    z = _z(p, bound, se)
    return McReport("chi2_tail_check", p, se, bound, z, z <= _Z_PASS, detail=kind)


DEFAULT_CHECKS = (
    ("sorted_fading_partial_sum",
     lambda seed: sorted_fading_partial_sum(McConfig(seed, 100, 100_000, 100_000, 1), 0.25, 0.5)),
    ("beta_projection_law",
     lambda seed: beta_projection_law(McConfig(seed, 10_000, 200, 20, 5))),
    ("mgf_identity_check",
     lambda seed: mgf_identity_check(McConfig(seed, 1_000_000, 8, 1, 1), 0.3, 1.0, 2.0)),
    ("chi2_tail_check[central-lower]",
     lambda seed: chi2_tail_check(McConfig(seed, 1_000_000, 8, 1, 1), "central-lower", 10, 0.0, 2.0)),
    ("chi2_tail_check[noncentral-upper]",
     lambda seed: chi2_tail_check(McConfig(seed, 1_000_000, 8, 1, 1), "noncentral-upper",
                                  100, 10.0, 20.0)),
)


def run_default_checks(seed):
    """Run every check at its default configuration; returns (name, report) pairs."""
    return [(name, fn(seed)) for name, fn in DEFAULT_CHECKS]
