"""Critical densities and core-size/degree predictions.

Everything here reduces to the Poisson tail f_t(lam) = P(Poisson(lam) >= t)
and the function h(mu) = mu / f_{k-1}(mu)^(r-1): the critical density is
min_mu h(mu)/r, and above it mu(c) is the larger root of h(mu)/r = c.  Core
fractions follow as alpha = f_k(mu), beta = mu f_{k-1}(mu)/r, and the core
degree law is a Poisson truncated below k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MU_LO = 1e-6
MU_HI = 50.0  # beyond this the tails are 1 to machine precision


@dataclass(frozen=True)
class CriticalPoint:
    r: int
    k: int
    c_crit: float
    mu_crit: float


@dataclass(frozen=True)
class CorePrediction:
    r: int
    k: int
    c: float
    mu: float
    alpha: float
    beta: float
    zeta: float
    rho: dict[int, float]


def poisson_pmf(j: int, lam: float) -> float:
    if j < 0:
        return 0.0
    return math.exp(j * math.log(lam) - lam - math.lgamma(j + 1))


def poisson_tail(t: int, lam: float) -> float:
    """f_t(lam) = P(Poisson(lam) >= t), relative error below 1e-12.

    Computed as 1 - (head sum) when the head is small, otherwise by direct
    upward recurrence on the tail terms with compensated summation.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    t = int(t)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 1.0

    def _kahan_sum(first_term, start, stop_when):
        total = 0.0
        comp = 0.0
        term = first_term
        i = start
        while True:
            y = term - comp
            s = total + y
            comp = (s - total) - y
            total = s
            i += 1
            if stop_when(i, term, total):
                break
            term *= lam / i
        return total

    head = _kahan_sum(math.exp(-lam), 0, lambda i, term, tot: i >= t)
    if head < 0.5:
        return 1.0 - head
    first = poisson_pmf(t, lam)
    if first == 0.0:
        return 0.0
    tail = _kahan_sum(
        first, t, lambda i, term, tot: term < tot * 1e-17 and i > lam
    )
    return tail


def h_of_mu(mu: float, r: int, k: int) -> float:
    """mu / f_{k-1}(mu)^(r-1); blows up at 0+ and is ~mu for large mu."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return mu / poisson_tail(k - 1, mu) ** (r - 1)


def _dlog_h(mu: float, r: int, k: int) -> float:
    """Derivative of log h; its unique sign change locates the minimiser."""
    return 1.0 / mu - (r - 1) * poisson_pmf(k - 2, mu) / poisson_tail(k - 1, mu)


def degree_identity_residual(r: int, k: int, mu: float) -> float:
    """Residual of e^(-mu) mu^(k-1) / ((k-2)! f_{k-1}(mu)) = 1/(r-1), which
    is the stationarity condition of h at the critical point."""
    lhs = (
        math.exp(-mu)
        * mu ** (k - 1)
        / (math.factorial(k - 2) * poisson_tail(k - 1, mu))
    )
    return abs(lhs - 1.0 / (r - 1))


def critical_point(r: int, k: int) -> CriticalPoint:
    """Minimise h(mu)/r by bisecting the derivative sign on (1e-6, 50]."""
    if r < 2 or k < 2 or (r, k) == (2, 2):
        raise ValueError("need r, k >= 2 and (r, k) != (2, 2)")
    lo, hi = MU_LO, MU_HI
    if not (_dlog_h(lo, r, k) < 0 < _dlog_h(hi, r, k)):
        raise RuntimeError("minimiser bracket failed")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _dlog_h(mid, r, k) < 0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    return CriticalPoint(r=r, k=k, c_crit=h_of_mu(mu, r, k) / r, mu_crit=mu)


def mu_of_c(r: int, k: int, c: float) -> float:
    """Larger root of h(mu)/r = c for c at or above the critical density."""
    cp = critical_point(r, k)
    if c < cp.c_crit - 1e-12:
        raise ValueError("below critical density")
    if c <= cp.c_crit:
        return cp.mu_crit
    lo = cp.mu_crit
    hi = max(2.0 * cp.mu_crit, r * c + 1.0)
    while h_of_mu(hi, r, k) / r < c:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h_of_mu(mid, r, k) / r < c:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _lambda_from_zeta(k: int, zeta: float) -> float:
    """Solve lam * f_{k-1}(lam) / f_k(lam) = zeta (strictly increasing,
    with value k at 0+)."""

    def g(x):
        return x * poisson_tail(k - 1, x) / poisson_tail(k, x)

    if zeta < k:
        raise ValueError("zeta below the truncated-Poisson minimum")
    lo, hi = 1e-9, 1.0
    while g(hi) < zeta:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("zeta bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < zeta:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def core_prediction(r: int, k: int, c: float, tail_mass: float = 1e-12) -> CorePrediction:
    """Core vertex/edge fractions and the truncated-Poisson degree law.

    rho_j is reported for j = k upward until the remaining mass drops below
    ``tail_mass``.
    """
    mu = mu_of_c(r, k, c)
    alpha = poisson_tail(k, mu)
    beta = mu * poisson_tail(k - 1, mu) / r
    zeta = r * beta / alpha
    lam = _lambda_from_zeta(k, zeta)
    fk = poisson_tail(k, lam)
    rho = {}
    cum = 0.0
    j = k
    term = poisson_pmf(k, lam)
    while cum < 1.0 - tail_mass and j < k + 400:
        rho[j] = term / fk
        cum += rho[j]
        j += 1
        term *= lam / j
    return CorePrediction(
        r=r, k=k, c=c, mu=mu, alpha=alpha, beta=beta, zeta=zeta, rho=rho
    )


def q2_ratio_prediction(r: int, c: float) -> float:
    """Limit of the contraction ratio 2(r-1)Q2/Lambda for the 2-core at
    density c; equals 1 exactly at the critical density."""
    mu = mu_of_c(r, 2, c)
    return (r - 1) * math.exp(-mu) * mu / poisson_tail(1, mu)
