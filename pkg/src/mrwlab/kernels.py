"""Increment kernels attached to transitions of the driving chain.

Three representations are supported:

* point mass at a single value,
* finite discrete table of (value, probability) atoms,
* named parametric family sampled by inverse CDF.

Exact (enumeration-based) computations require the first two; the parametric
kind only supports sampling.  All sampling consumes exactly one uniform from
the caller's ``random.Random`` stream so that trajectories are bit
reproducible given the trial seed.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Sequence, Union

Real = Union[int, float, Fraction]

_STD_NORMAL = NormalDist()


class UnsupportedKernel(Exception):
    """Raised when an exact computation meets a kernel without atoms."""


@dataclass(frozen=True)
class PointMass:
    value: Real

    @property
    def is_exact(self) -> bool:
        return True

    def atoms(self) -> list[tuple[Real, Real]]:
        return [(self.value, 1)]

    def sample(self, u: float) -> float:
        return float(self.value)

    def mean(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class DiscreteKernel:
    values: tuple[Real, ...]
    probs: tuple[Real, ...]
    _cum: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.values) != len(self.probs) or not self.values:
            raise ValueError("values and probs must be nonempty and aligned")
        total = sum(float(p) for p in self.probs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"kernel probabilities sum to {total!r}, not 1")
        if any(float(p) < 0 for p in self.probs):
            raise ValueError("kernel probabilities must be nonnegative")
        cum = []
        acc = 0.0
        for p in self.probs:
            acc += float(p)
            cum.append(acc)
        cum[-1] = 1.0
        object.__setattr__(self, "_cum", tuple(cum))

    @property
    def is_exact(self) -> bool:
        return True

    def atoms(self) -> list[tuple[Real, Real]]:
        return list(zip(self.values, self.probs))

    def sample(self, u: float) -> float:
        return float(self.values[bisect.bisect_right(self._cum, u)])

    def mean(self) -> float:
        return float(sum(float(v) * float(p) for v, p in zip(self.values, self.probs)))


@dataclass(frozen=True)
class ParametricKernel:
    """Named continuous family, sampled by inverse CDF of one uniform.

    Supported: ``normal(mu, sigma)``, ``exponential(rate)``, ``uniform(a, b)``.
    """

    family: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.family not in ("normal", "exponential", "uniform"):
            raise ValueError(f"unknown kernel family {self.family!r}")
        n_expected = {"normal": 2, "exponential": 1, "uniform": 2}[self.family]
        if len(self.params) != n_expected:
            raise ValueError(f"{self.family} kernel takes {n_expected} parameters")
        if self.family == "normal" and self.params[1] <= 0:
            raise ValueError("normal sigma must be positive")
        if self.family == "exponential" and self.params[0] <= 0:
            raise ValueError("exponential rate must be positive")
        if self.family == "uniform" and self.params[0] >= self.params[1]:
            raise ValueError("uniform requires a < b")

    @property
    def is_exact(self) -> bool:
        return False

    def atoms(self) -> list[tuple[Real, Real]]:
        raise UnsupportedKernel(f"{self.family} kernel has no finite atom table")

    def sample(self, u: float) -> float:
        if self.family == "normal":
            mu, sigma = self.params
            return mu + sigma * _STD_NORMAL.inv_cdf(min(max(u, 1e-17), 1 - 1e-17))
        if self.family == "exponential":
            return -math.log1p(-min(u, 1.0 - 1e-17)) / self.params[0]
        a, b = self.params
        return a + (b - a) * u

    def mean(self) -> float:
        if self.family == "normal":
            return self.params[0]
        if self.family == "exponential":
            return 1.0 / self.params[0]
        return 0.5 * (self.params[0] + self.params[1])


Kernel = Union[PointMass, DiscreteKernel, ParametricKernel]


def scale_kernel(kernel: Kernel, c: Real) -> Kernel:
    """Kernel of ``c * X`` for positive ``c`` (negative ``c`` reflects)."""
    if isinstance(kernel, PointMass):
        return PointMass(kernel.value * c)
    if isinstance(kernel, DiscreteKernel):
        return DiscreteKernel(tuple(v * c for v in kernel.values), kernel.probs)
    if kernel.family == "normal":
        mu, sigma = kernel.params
        return ParametricKernel("normal", (mu * float(c), sigma * abs(float(c))))
    if kernel.family == "uniform":
        a, b = (kernel.params[0] * float(c), kernel.params[1] * float(c))
        return ParametricKernel("uniform", (min(a, b), max(a, b)))
    raise UnsupportedKernel(f"cannot scale {kernel.family} kernel")


def kernel_from_dict(payload: dict) -> Kernel:
    """Parse a kernel from its JSON form (see the model-spec schema)."""
    kind = payload.get("type")
    if kind == "point":
        return PointMass(_parse_real(payload["value"]))
    if kind == "discrete":
        values = tuple(_parse_real(v) for v in payload["values"])
        probs = tuple(_parse_real(p) for p in payload["probs"])
        return DiscreteKernel(values, probs)
    if kind == "parametric":
        return ParametricKernel(payload["family"], tuple(float(p) for p in payload["params"]))
    raise ValueError(f"unknown kernel type {kind!r}")


def kernel_to_dict(kernel: Kernel) -> dict:
    if isinstance(kernel, PointMass):
        return {"type": "point", "value": _real_to_json(kernel.value)}
    if isinstance(kernel, DiscreteKernel):
        return {
            "type": "discrete",
            "values": [_real_to_json(v) for v in kernel.values],
            "probs": [_real_to_json(p) for p in kernel.probs],
        }
    return {"type": "parametric", "family": kernel.family, "params": list(kernel.params)}


def _parse_real(x) -> Real:
    """Accept numbers, decimal strings, and rational strings like ``"2/3"``."""
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            return Fraction(s)
        if "." in s or "e" in s or "E" in s:
            return float(s)
        return int(s)
    raise ValueError(f"cannot parse number {x!r}")


def _real_to_json(x: Real):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return x


def exact_moment(kernel: Kernel, fn) -> Fraction | float:
    """Sum ``fn(value) * prob`` over the kernel's atoms (exact kernels only)."""
    total = 0
    for v, p in kernel.atoms():
        total += fn(v) * p
    return total
