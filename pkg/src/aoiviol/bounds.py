"""Monte-Carlo upper bounds on the violation probability for GI/GI/1/1 and
GI/GI/1/2*, the path-based lower bound, and the worst-case overestimate check.

Both upper bounds replace the unknown idle (and waiting) time by an
inter-arrival gap, which dominates it pathwise::

    Gamma1 = min((X' + Zc + X - d)^+, X + Zc)             GI/GI/1/1
    Gamma2 = min((X + X' + Zh - d)^+, X + (Zh - X')^+)     GI/GI/1/2*

with ``X', X`` two independent service times and ``Zc``/``Zh`` an
inter-arrival time.  The bound is ``nu_hat * E[Gamma]`` for any
``nu_hat >= nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dists import DistributionSpec, RngStream, rate_of
from .sample_path import Discipline, SamplePath
from .stats import Estimate, RunningMoments, batch_means_se

CHUNK = 1 << 20


@dataclass(frozen=True)
class BoundConfig:
    """How ``nu_hat`` is chosen and how many samples back the expectation.

    ``nu_hat_mode`` is ``"exact"`` (the true departure rate, passed as
    ``nu_value``), ``"user"`` (any value the caller vouches for) or
    ``"min_rate"`` (``min(lambda, mu)``, always valid).
    """

    nu_hat_mode: str = "min_rate"
    nu_value: float | None = None
    n_samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.nu_hat_mode not in ("exact", "user", "min_rate"):
            raise ValueError(f"unknown nu_hat mode {self.nu_hat_mode!r}")
        if self.nu_hat_mode != "min_rate" and not (self.nu_value is not None and self.nu_value > 0):
            raise ValueError(f"nu_hat mode {self.nu_hat_mode!r} needs a positive nu_value")
        if self.n_samples < 2:
            raise ValueError("need at least two samples")

    @classmethod
    def exact(cls, nu: float, **kw) -> "BoundConfig":
        return cls("exact", nu, **kw)

    @classmethod
    def user(cls, nu: float, **kw) -> "BoundConfig":
        return cls("user", nu, **kw)

    @classmethod
    def min_rate(cls, **kw) -> "BoundConfig":
        return cls("min_rate", None, **kw)

    def nu_hat(self, lam: float, mu: float) -> float:
        if self.nu_hat_mode == "min_rate":
            return min(lam, mu)
        return float(self.nu_value)


@dataclass(frozen=True)
class BoundReport:
    phi: float  # raw nu_hat * E[Gamma]; may exceed 1
    nu_hat: float
    eta: float
    worst_case_budget: float  # nu_hat * eta
    std_error: float
    d: float
    arrival_rate: float
    service_rate: float
    n_samples: int
    phi_clamped: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "phi_clamped", min(max(self.phi, 0.0), 1.0))


def eta(lam: float, mu: float, nu: float) -> float:
    """Overestimation budget ``1/lam + 1/mu - 1/nu`` (zero for Poisson arrivals)."""
    for name, r in (("lam", lam), ("mu", mu), ("nu", nu)):
        if not r > 0:
            raise ValueError(f"{name} must be positive, got {r}")
    return 1.0 / lam + 1.0 / mu - 1.0 / nu


def worst_case_budget(nu_hat: float, eta_value: float) -> float:
    return nu_hat * eta_value


def _gamma1(x_prev, z, x, d):
    return np.minimum(np.maximum(x_prev + z + x - d, 0.0), x + z)


def _gamma2(x_prev, z, x, d):
    return np.minimum(np.maximum(x + x_prev + z - d, 0.0), x + np.maximum(z - x_prev, 0.0))


def _phi_curve(gamma, arrival, service, ds, cfg, nu):
    ds = [float(d) for d in ds]
    if any(d < 0 for d in ds):
        raise ValueError("age limits must be non-negative")
    lam, mu = rate_of(arrival), rate_of(service)
    nu_hat = cfg.nu_hat(lam, mu)
    if nu is None:
        nu = nu_hat if cfg.nu_hat_mode == "min_rate" else float(cfg.nu_value)
    eta_value = eta(lam, mu, nu)
    moments = [RunningMoments() for _ in ds]
    gen = RngStream(cfg.seed).generator
    left = cfg.n_samples
    while left:
        m = min(CHUNK, left)
        # one draw per chunk is shared by every d: smooth, monotone curves
        x_prev = np.asarray(service.sample(gen, m), dtype=float)
        x = np.asarray(service.sample(gen, m), dtype=float)
        z = np.asarray(arrival.sample(gen, m), dtype=float)
        for mom, d in zip(moments, ds):
            mom.update(gamma(x_prev, z, x, d))
        left -= m
    return [
        BoundReport(nu_hat * mom.mean, nu_hat, eta_value, worst_case_budget(nu_hat, eta_value),
                    nu_hat * mom.std_error, d, lam, mu, cfg.n_samples)
        for mom, d in zip(moments, ds)
    ]


def phi1_curve(arrival: DistributionSpec, service: DistributionSpec, ds, cfg: BoundConfig,
               nu: float | None = None) -> list[BoundReport]:
    """GI/GI/1/1 bound over several age limits with common random numbers.

    ``nu`` is the departure rate used for ``eta``; it defaults to the
    configured value (or to ``nu_hat`` in ``min_rate`` mode).
    """
    return _phi_curve(_gamma1, arrival, service, ds, cfg, nu)


def phi2_curve(arrival: DistributionSpec, service: DistributionSpec, ds, cfg: BoundConfig,
               nu: float | None = None) -> list[BoundReport]:
    """GI/GI/1/2* bound over several age limits with common random numbers."""
    return _phi_curve(_gamma2, arrival, service, ds, cfg, nu)


def phi1(arrival: DistributionSpec, service: DistributionSpec, d: float, cfg: BoundConfig,
         nu: float | None = None) -> BoundReport:
    return phi1_curve(arrival, service, [d], cfg, nu)[0]


def phi2(arrival: DistributionSpec, service: DistributionSpec, d: float, cfg: BoundConfig,
         nu: float | None = None) -> BoundReport:
    return phi2_curve(arrival, service, [d], cfg, nu)[0]


def gamma_star_values(path: SamplePath, d: float) -> np.ndarray:
    if d < 0:
        raise ValueError("age limit must be non-negative")
    inter = path.X + path.I
    # same association as the stored peak age, so GI/GI/1/1 paths give g exactly
    return np.minimum(np.maximum(inter + path.X_prev - d, 0.0), inter)


def gamma_star_lower_bound(path: SamplePath):
    """Return ``d -> Estimate`` of the path average of
    ``min((X_k + X_{k-1} + I_k - d)^+, X_k + I_k)`` per unit time.

    It coincides with the violation estimate on GI/GI/1/1 paths and bounds it
    from below on GI/GI/1/2* paths.
    """
    if path.discipline is Discipline.ZERO_WAIT:
        raise ValueError("lower bound is defined for GI/GI/1/1 and GI/GI/1/2* paths")

    def at(d: float) -> Estimate:
        gs = gamma_star_values(path, d)
        value = min(max(float(gs.sum() / path.horizon), 0.0), 1.0)
        return Estimate(value, batch_means_se(gs, path.inter_departure), len(gs))

    return at


@dataclass(frozen=True)
class GuaranteeReport:
    passed: bool
    phi: float
    violation: float
    gap: float  # phi - violation
    allowed: float  # (nu_hat/nu) * violation + nu_hat * eta + 3 * combined std error
    nu: float
    eta: float
    budget: float  # nu_hat * eta


def guarantee_check(phi_report: BoundReport, violation: Estimate | float, nu: float) -> GuaranteeReport:
    """Check ``phi <= (nu_hat/nu) P + nu_hat eta`` up to three combined standard errors,
    where ``eta`` uses the true departure rate ``nu``."""
    p = float(violation.value if isinstance(violation, Estimate) else violation)
    se_p = violation.std_error if isinstance(violation, Estimate) else 0.0
    eta_value = eta(phi_report.arrival_rate, phi_report.service_rate, nu)
    ratio = phi_report.nu_hat / nu
    budget = phi_report.nu_hat * eta_value
    se = math.hypot(phi_report.std_error, ratio * se_p)
    allowed = ratio * p + budget + 3.0 * se
    return GuaranteeReport(phi_report.phi <= allowed, phi_report.phi, p, phi_report.phi - p,
                           allowed, nu, eta_value, budget)
