"""Exact violation probabilities and mean age for the tractable bufferless cases.

Closed forms cover M/M/1/1, D/M/1/1 and zero-wait with exponential service.
For M/GI/1/1 and D/GI/1/1 with any supported service law the violation
probability is ``nu * E[g(k)]`` with ``E[g(k)] = int_0^inf P(g(k) > y) dy`` and
the tail obtained by conditioning on the previous service time ``x``::

    P(g(k) > y) = int P(X_k + I_k > max(y + d - x, y) | X_{k-1} = x) dF_X(x)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .dists import Deterministic, DistributionSpec, Erlang, Exponential, ShiftedExponential

EXP_IDLE = "exp"  # Poisson arrivals: idle time ~ Exp(lambda), independent of the past
CEIL_IDLE = "ceil"  # periodic arrivals: idle time = ceil(lambda x)/lambda - x after a service x
IDLE_MODELS = (EXP_IDLE, CEIL_IDLE)

_SERIES_REL = 1e-4
_EQUAL_REL = 1e-9
_QUAD_TOL = 1e-11
_TAIL_EPS = 1e-12


class ExistenceError(ValueError):
    """The stationary violation probability does not exist for these parameters."""


@dataclass(frozen=True)
class AnalyticResult:
    value: float
    method: str  # closed_form | quadrature | monte_carlo_integral
    abs_error_bound: float = 0.0

    def __float__(self) -> float:
        return float(self.value)


def _clip01(p: float) -> float:
    return min(max(p, 0.0), 1.0)


def _check_rates(**rates):
    for name, r in rates.items():
        if not r > 0:
            raise ValueError(f"{name} must be positive, got {r}")


def _check_d(d):
    if not d >= 0:
        raise ValueError(f"age limit must be non-negative, got {d}")


# ---------------------------------------------------------------- closed forms


def mm11_mean_g(lam: float, mu: float, d: float) -> float:
    """``E[g(k)]`` for M/M/1/1."""
    delta = mu - lam
    rel = abs(delta) / mu
    if rel < _EQUAL_REL:
        return 0.5 * mu * math.exp(-mu * d) * (d + 2.0 / mu) ** 2
    if rel < _SERIES_REL:
        # The 1/(mu-lam)^2 term cancels against the -lam d/(mu-lam) term;
        # expand (e^{delta d} - 1 - delta d)/(delta d)^2 = sum (delta d)^j/(j+2)!
        z = delta * d
        s, term, j = 0.0, 0.5, 0
        while abs(term) > 1e-18 * max(abs(s), 1e-300) and j < 200:
            s += term
            j += 1
            term *= z / (j + 2)
        return math.exp(-mu * d) * (mu * mu / lam * d * d * s + d * (mu + lam) / lam + 1.0 / lam + 1.0 / mu)
    return (mu * mu * (math.exp(-lam * d) - math.exp(-mu * d)) / (lam * delta * delta)
            + math.exp(-mu * d) * (1.0 / lam + 1.0 / mu - lam * d / delta))


def mm11_violation(lam: float, mu: float, d: float) -> AnalyticResult:
    _check_rates(lam=lam, mu=mu)
    _check_d(d)
    nu = lam * mu / (lam + mu)
    return AnalyticResult(_clip01(nu * mm11_mean_g(lam, mu, d)), "closed_form")


def mm11_expected_aoi(lam: float, mu: float) -> AnalyticResult:
    _check_rates(lam=lam, mu=mu)
    if math.isinf(lam):
        return AnalyticResult(2.0 / mu, "closed_form")
    return AnalyticResult(1.0 / lam + 2.0 / mu - 1.0 / (mu + lam), "closed_form")


def _lattice_index(lam: float, d: float) -> tuple[int, int]:
    """``(floor(lam d), ceil(lam d))`` with products within 1e-12 of an integer snapped."""
    x = lam * d
    r = round(x)
    if abs(x - r) <= 1e-12 * max(1.0, abs(x)):
        return int(r), int(r)
    return math.floor(x), math.ceil(x)


def _require_existence(lam: float, d: float) -> None:
    if lam * d < 1.0 - 1e-12:
        raise ExistenceError(
            f"with periodic arrivals the violation probability exists only for d >= 1/lambda "
            f"(d={d}, 1/lambda={1.0 / lam})")


def ceil_mean_exponential(lam: float, mu: float) -> float:
    """``E[ceil(lam X)]`` for ``X ~ Exp(mu)``."""
    _check_rates(lam=lam, mu=mu)
    return 1.0 / -math.expm1(-mu / lam)


def dm11_departure_rate(lam: float, mu: float) -> float:
    _check_rates(lam=lam, mu=mu)
    return lam * -math.expm1(-mu / lam)


def dm11_violation(lam: float, mu: float, d: float) -> AnalyticResult:
    _check_rates(lam=lam, mu=mu)
    _check_d(d)
    _require_existence(lam, d)
    lo, hi = _lattice_index(lam, d)
    c = hi / lam
    one_minus = -math.expm1(-mu / lam)
    mean_g = (math.exp(-mu * c) / (lam * one_minus)
              + math.exp(-mu * lo / lam) * (c - d + 1.0 / mu)
              + math.exp(-mu * d) / mu * (math.expm1(mu / lam) * lo - 1.0))
    return AnalyticResult(_clip01(lam * one_minus * mean_g), "closed_form")


def zero_wait_exp_violation(mu: float, d: float) -> AnalyticResult:
    _check_rates(mu=mu)
    _check_d(d)
    return AnalyticResult((1.0 + mu * d) * math.exp(-mu * d), "closed_form")


# ------------------------------------------------------------------ quadrature


def _quad(f, a, b, points=()) -> tuple[float, float]:
    if b <= a:
        return 0.0, 0.0
    pts = sorted({p for p in points if a < p < b})
    # QUADPACK's breakpoint routine wants finite limits
    val, err = integrate.quad(f, a, b, points=pts or None, limit=500,
                              epsabs=_QUAD_TOL, epsrel=_QUAD_TOL)
    return val, err


def _phi(z: float) -> float:
    """``(1 - e^{-z})/z`` with its limit 1 at 0."""
    return 1.0 if z == 0 else -math.expm1(-z) / z


def _exp_plus_exp_tail(rate_x: float, lam: float, s: float) -> float:
    """``P(X + I > s)`` for independent ``X ~ Exp(rate_x)``, ``I ~ Exp(lam)``."""
    if s <= 0:
        return 1.0
    return math.exp(-rate_x * s) * (1.0 + rate_x * s * _phi((lam - rate_x) * s))


def sum_with_exp_idle_tail(service: DistributionSpec, lam: float, s: float) -> float:
    """``P(X + I > s)`` for ``X ~ service`` and an independent ``I ~ Exp(lam)``."""
    if s <= 0:
        return 1.0
    if isinstance(service, Exponential):
        return _exp_plus_exp_tail(service.rate, lam, s)
    if isinstance(service, ShiftedExponential):
        return 1.0 if s <= service.shift else _exp_plus_exp_tail(service.rate, lam, s - service.shift)
    if isinstance(service, Deterministic):
        return 1.0 if s < service.value else math.exp(-lam * (s - service.value))
    if isinstance(service, Erlang):
        conv, _ = _quad(lambda u: float(service.pdf(u)) * math.exp(-lam * (s - u)), 0.0, s)
        return float(service.sf(s)) + conv
    raise TypeError(f"unsupported service law {service!r}")


def _upper_support(service: DistributionSpec) -> float:
    """A point beyond which the service tail is negligible."""
    if isinstance(service, Deterministic):
        return service.value
    x = max(service.mean, service.lower + 1e-3)
    while float(service.sf(x)) > 1e-17:
        x *= 2.0
    return x


def _conditional_tail(service, lam, idle_model, y, d):
    """``x -> P(g(k) > y | X_{k-1} = x)``."""
    if idle_model == EXP_IDLE:
        return lambda x: sum_with_exp_idle_tail(service, lam, max(y + d - x, y))
    return lambda x: float(service.sf(max(y + d, y + x) - math.ceil(lam * x - 1e-12) / lam))


def _x_breakpoints(service, lam, idle_model, y, d, x_max):
    pts = {d, service.lower}
    if idle_model == CEIL_IDLE:
        m = np.arange(1, math.ceil(lam * x_max) + 1)
        pts.update((m / lam).tolist())
        # kink where y + x - slot end crosses the service lower bound
        pts.update(((m / lam) + service.lower - y).tolist())
    else:
        pts.add(y + d - service.lower)
    return [p for p in pts if 0 < p < x_max]


def gk_tail_gg11(lam: float, service: DistributionSpec, idle_model: str, y: float, d: float) -> float:
    """``P(g(k) > y)`` for a GI/GI/1/1 system whose idle law is fixed by the
    arrival process (``"exp"`` for Poisson, ``"ceil"`` for periodic)."""
    return _gk_tail(lam, service, idle_model, y, d)[0]


def _gk_tail(lam, service, idle_model, y, d):
    if idle_model not in IDLE_MODELS:
        raise ValueError(f"unsupported idle model {idle_model!r}; expected one of {IDLE_MODELS}")
    _check_rates(lam=lam)
    _check_d(d)
    if y < 0:
        return 1.0, 0.0
    cond = _conditional_tail(service, lam, idle_model, y, d)
    if isinstance(service, Deterministic):
        return _clip01(cond(service.value)), 0.0
    x_max = _upper_support(service)
    if idle_model == EXP_IDLE:
        pts = _x_breakpoints(service, lam, idle_model, y, d, x_max)
        edges = [0.0] + sorted(pts) + [x_max]
        total, err = 0.0, 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            v, e = _quad(lambda x: cond(x) * float(service.pdf(x)), a, b)
            total += v
            err += e
        return _clip01(total), err

    # below d only the slot end m/lam matters, so each slot is closed form
    slots = np.arange(1, math.ceil(lam * min(d, x_max) - 1e-12) + 1)
    lo = np.minimum((slots - 1) / lam, d)
    hi = np.minimum(slots / lam, d)
    mass = np.asarray(service.cdf(hi)) - np.asarray(service.cdf(lo))
    total = float(np.sum(np.asarray(service.sf(y + d - slots / lam)) * mass))
    if d >= x_max:
        return _clip01(total), 0.0
    # above d: smooth within each slot once split where the tail argument
    # crosses the service lower bound
    pts = _x_breakpoints(service, lam, idle_model, y, d, x_max)
    edges = np.array([d] + sorted(p for p in pts if p > d) + [x_max])
    a, b = edges[:-1], edges[1:]
    slot_end = np.ceil(lam * 0.5 * (a + b)) / lam

    def piece_integrals(order):
        nodes, weights = np.polynomial.legendre.leggauss(order)
        half = 0.5 * (b - a)[:, None]
        x = 0.5 * (a + b)[:, None] + half * nodes
        vals = np.asarray(service.sf(y + x - slot_end[:, None])) * np.asarray(service.pdf(x))
        return (half * weights * vals).sum(axis=1)

    fine, coarse = piece_integrals(24), piece_integrals(12)
    diff = np.abs(fine - coarse)
    err = 0.0
    for i in np.flatnonzero(diff > _QUAD_TOL):
        v, e = _quad(lambda x, c=slot_end[i]: float(service.sf(y + x - c)) * float(service.pdf(x)), a[i], b[i])
        fine[i], diff[i] = v, e
    total += float(fine.sum())
    err += float(diff.sum())
    return _clip01(total), err


def departure_rate(lam: float, service: DistributionSpec, idle_model: str) -> float:
    """``1/(E[X] + E[I])``: ``lam mu/(lam + mu)`` for Poisson arrivals and
    ``lam / E[ceil(lam X)]`` for periodic ones."""
    _check_rates(lam=lam)
    if idle_model == EXP_IDLE:
        return 1.0 / (1.0 / lam + service.mean)
    if idle_model == CEIL_IDLE:
        return lam / ceil_mean(lam, service)
    raise ValueError(f"unsupported idle model {idle_model!r}")


def ceil_mean(lam: float, service: DistributionSpec) -> float:
    """``E[ceil(lam X)] = sum_{m >= 0} P(X > m/lam)``."""
    if isinstance(service, Deterministic):
        return float(_lattice_index(lam, service.value)[1])
    if isinstance(service, Exponential):
        return ceil_mean_exponential(lam, service.rate)
    total, m = 0.0, 0
    while True:
        term = float(service.sf(m / lam))
        total += term
        m += 1
        if term < 1e-17 and m / lam > service.mean:
            return total


def general_violation(lam: float, service: DistributionSpec, idle_model: str, d: float) -> AnalyticResult:
    """``nu * int_0^inf P(g(k) > y) dy`` for M/GI/1/1 (``"exp"``) or D/GI/1/1 (``"ceil"``)."""
    if idle_model not in IDLE_MODELS:
        raise ValueError(f"unsupported idle model {idle_model!r}; expected one of {IDLE_MODELS}")
    _check_rates(lam=lam)
    _check_d(d)
    if idle_model == CEIL_IDLE:
        _require_existence(lam, d)
    nu = departure_rate(lam, service, idle_model)

    if idle_model == CEIL_IDLE and isinstance(service, Deterministic):
        v = service.value
        idle = _lattice_index(lam, v)[1] / lam - v
        g = min(max(2 * v + idle - d, 0.0), v + idle)
        return AnalyticResult(_clip01(nu * g), "closed_form")

    errs = []

    def tail(y):
        v, e = _gk_tail(lam, service, idle_model, y, d)
        errs.append(e)
        return v

    y_pts = [service.lower, max(service.lower - d, 0.0)]
    if idle_model == CEIL_IDLE:
        y_pts += [m / lam for m in range(1, 4)]
    if isinstance(service, Deterministic):
        y_pts += [service.value, 2 * service.value - d]
    total, err = 0.0, 0.0
    a, b = 0.0, max(d, service.mean, 1.0 / lam)
    while True:
        v, e = _quad(tail, a, b, y_pts)
        total += v
        err += e
        if v < _TAIL_EPS and tail(b) < _TAIL_EPS:
            break
        a, b = b, 2.0 * b
    bound = nu * (err + max(errs, default=0.0))
    return AnalyticResult(_clip01(nu * total), "quadrature", bound)
