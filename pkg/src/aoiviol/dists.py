"""Inter-arrival and service-time laws shared by the simulator, the analytic
engine and the bound sampler.

All four families are scale families, so every law can be re-targeted to a
new rate with :func:`with_rate`, which is how the experiment sweeps move
``lambda`` while keeping the shape fixed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class RngStream:
    """Seeded random stream backed by numpy's counter-based Philox generator.

    The same seed and the same sequence of draws give bitwise identical
    output on every platform numpy supports.
    """

    def __init__(self, seed: int | np.random.SeedSequence = 0):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            self._seq = np.random.SeedSequence(int(seed) & (2**64 - 1))
        self.generator = np.random.Generator(np.random.Philox(self._seq))

    @property
    def seed(self) -> int | None:
        entropy = self._seq.entropy
        return entropy if isinstance(entropy, int) else None

    def spawn(self, n: int) -> list["RngStream"]:
        """Independent child streams; children never overlap the parent."""
        return [RngStream(child) for child in self._seq.spawn(n)]


@dataclass(frozen=True)
class Deterministic:
    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"deterministic value must be positive, got {self.value}")

    @property
    def mean(self) -> float:
        return self.value

    @property
    def lower(self) -> float:
        return self.value

    def sample(self, gen: np.random.Generator, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        return np.where(np.asarray(x) >= self.value, 1.0, 0.0)[()]

    def sf(self, x: ArrayLike) -> ArrayLike:
        return np.where(np.asarray(x) >= self.value, 0.0, 1.0)[()]

    def pdf(self, x: ArrayLike) -> ArrayLike:
        raise ValueError("deterministic law has no density")

    def __str__(self) -> str:
        return f"deterministic({self.value:.12g})"


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive, got {self.rate}")

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def lower(self) -> float:
        return 0.0

    def sample(self, gen: np.random.Generator, size=None):
        return gen.exponential(1.0 / self.rate, size)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return (-np.expm1(-self.rate * x))[()]

    def sf(self, x: ArrayLike) -> ArrayLike:
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return np.exp(-self.rate * x)[()]

    def pdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)[()]

    def __str__(self) -> str:
        return f"exp({self.rate:.12g})"


@dataclass(frozen=True)
class ShiftedExponential:
    """``shift + Exp(rate)``. Note ``rate`` is the rate of the exponential
    part only; the total mean is ``shift + 1/rate``."""

    shift: float
    rate: float

    def __post_init__(self):
        if not (self.shift >= 0 and math.isfinite(self.shift)):
            raise ValueError(f"shift must be non-negative, got {self.shift}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive, got {self.rate}")

    @classmethod
    def with_mean(cls, shift: float, mean: float) -> "ShiftedExponential":
        if mean <= shift:
            raise ValueError(f"mean {mean} must exceed shift {shift}")
        return cls(shift, 1.0 / (mean - shift))

    @property
    def mean(self) -> float:
        return self.shift + 1.0 / self.rate

    @property
    def lower(self) -> float:
        return self.shift

    def sample(self, gen: np.random.Generator, size=None):
        return self.shift + gen.exponential(1.0 / self.rate, size)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        u = np.maximum(np.asarray(x, dtype=float) - self.shift, 0.0)
        return (-np.expm1(-self.rate * u))[()]

    def sf(self, x: ArrayLike) -> ArrayLike:
        u = np.maximum(np.asarray(x, dtype=float) - self.shift, 0.0)
        return np.exp(-self.rate * u)[()]

    def pdf(self, x: ArrayLike) -> ArrayLike:
        u = np.asarray(x, dtype=float) - self.shift
        return np.where(u >= 0, self.rate * np.exp(-self.rate * np.maximum(u, 0.0)), 0.0)[()]

    def __str__(self) -> str:
        return f"sexp({self.shift:.12g},{self.rate:.12g})"


@dataclass(frozen=True)
class Erlang:
    shape: int
    rate: float

    def __post_init__(self):
        if int(self.shape) != self.shape or self.shape < 1:
            raise ValueError(f"shape must be a positive integer, got {self.shape}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive, got {self.rate}")
        object.__setattr__(self, "shape", int(self.shape))

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def lower(self) -> float:
        return 0.0

    def sample(self, gen: np.random.Generator, size=None):
        return gen.gamma(self.shape, 1.0 / self.rate, size)

    def sf(self, x: ArrayLike) -> ArrayLike:
        # integer shape: Poisson-sum form of the upper incomplete gamma
        rx = self.rate * np.maximum(np.asarray(x, dtype=float), 0.0)
        term = np.ones_like(rx)
        total = np.ones_like(rx)
        for j in range(1, self.shape):
            term = term * rx / j
            total = total + term
        return (np.exp(-rx) * total)[()]

    def cdf(self, x: ArrayLike) -> ArrayLike:
        return (1.0 - np.asarray(self.sf(x)))[()]

    def pdf(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        k = self.shape
        dens = self.rate**k * xp ** (k - 1) * np.exp(-self.rate * xp) / math.factorial(k - 1)
        return np.where(x >= 0, dens, 0.0)[()]

    def __str__(self) -> str:
        return f"erlang({self.shape},{self.rate:.12g})"


DistributionSpec = Union[Deterministic, Exponential, ShiftedExponential, Erlang]


def sample(spec: DistributionSpec, rng: RngStream, size=None):
    return spec.sample(rng.generator, size)


def mean(spec: DistributionSpec) -> float:
    return spec.mean


def cdf(spec: DistributionSpec, x: ArrayLike) -> ArrayLike:
    return spec.cdf(x)


def complementary_cdf(spec: DistributionSpec, x: ArrayLike) -> ArrayLike:
    return spec.sf(x)


def rate_of(spec: DistributionSpec) -> float:
    """``1/E[.]``: lambda for an inter-arrival law, mu for a service law."""
    return 1.0 / spec.mean


def with_rate(spec: DistributionSpec, rate: float) -> DistributionSpec:
    """Rescale ``spec`` so that its mean becomes ``1/rate``, keeping the shape."""
    factor = spec.mean * rate  # new = old / factor
    if isinstance(spec, Deterministic):
        return Deterministic(1.0 / rate)
    if isinstance(spec, Exponential):
        return Exponential(rate)
    if isinstance(spec, ShiftedExponential):
        return ShiftedExponential(spec.shift / factor, spec.rate * factor)
    if isinstance(spec, Erlang):
        return Erlang(spec.shape, spec.shape * rate)
    raise TypeError(f"unsupported distribution {spec!r}")


_GRAMMAR = re.compile(r"^\s*([a-z]+)\s*\(([^()]*)\)\s*$")
_ARITY = {"deterministic": 1, "exp": 1, "sexp": 2, "erlang": 2}


def parse_distribution(text: str) -> DistributionSpec:
    """Parse ``deterministic(v)``, ``exp(rate)``, ``sexp(shift,rate)`` or
    ``erlang(k,rate)``."""
    m = _GRAMMAR.match(text)
    if not m or m.group(1) not in _ARITY:
        raise ValueError(f"cannot parse distribution {text!r}")
    name = m.group(1)
    parts = [p.strip() for p in m.group(2).split(",") if p.strip()]
    if len(parts) != _ARITY[name]:
        raise ValueError(f"{name} takes {_ARITY[name]} argument(s), got {len(parts)} in {text!r}")
    try:
        args = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"non-numeric argument in {text!r}") from None
    if name == "deterministic":
        return Deterministic(args[0])
    if name == "exp":
        return Exponential(args[0])
    if name == "sexp":
        return ShiftedExponential(args[0], args[1])
    if not args[0].is_integer():
        raise ValueError(f"erlang shape must be an integer in {text!r}")
    return Erlang(int(args[0]), args[1])
