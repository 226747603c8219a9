"""Discrete laws on the positive integers for infinite model families.

These drive the petal choice of flower chains and the excursion-length
variable of the generalized flower.  Sampling is inverse CDF on the full
law -- never truncated.  Enumeration (needed by exact evaluators) stops at
an index whose certified tail bound is below the requested threshold.

Heavy-tailed families whose inverse CDF cannot be reached by enumerating
the prefix (the ``1/(i log^2 i)`` family has a log-decaying tail) invert a
semi-analytic tail function instead; the tail is computed by Euler-Maclaurin
summation and is accurate to ~1e-13, which is the documented resolution of
the sampler for those families.
"""

from __future__ import annotations

import bisect
import math
from abc import ABC, abstractmethod

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta


class TailMassTooLarge(Exception):
    """Enumeration cannot certify the requested tail mass."""


class InvalidDistribution(Exception):
    """Law parameters violate their domain."""


_MAX_ENUM = 2_000_000


class DiscreteNLaw(ABC):
    """Probability law on {support_start, support_start + 1, ...}."""

    support_start: int = 1

    @abstractmethod
    def pmf(self, i: int) -> float: ...

    @abstractmethod
    def tail(self, i: int) -> float:
        """P(X > i)."""

    def tail_bound(self, i: int) -> float:
        """Certified upper bound on ``tail(i)``; defaults to ``tail`` itself."""
        return self.tail(i)

    def mean(self) -> float:
        return math.inf

    # -- sampling ---------------------------------------------------------

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("_cum", None)
        return state

    def _ensure_cache(self, n: int) -> None:
        cum = getattr(self, "_cum", None)
        if cum is not None and len(cum) >= n - self.support_start + 1:
            return
        idx = np.arange(self.support_start, max(n, self.support_start) + 1)
        probs = np.array([self.pmf(int(i)) for i in idx])
        self._cum = np.cumsum(probs)

    def sample(self, u: float) -> int:
        """Smallest i with CDF(i) >= u, by cache search plus tail inversion."""
        self._ensure_cache(self.support_start + 4095)
        cum = self._cum
        if u < cum[-1]:
            return self.support_start + int(np.searchsorted(cum, u, side="left"))
        y = 1.0 - u
        lo = self.support_start + len(cum) - 1
        hi = self._invert_tail_guess(y, lo)
        while self.tail(hi) > y:
            lo, hi = hi, hi * 2
            if hi > 1 << 240:
                return hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.tail(mid) > y:
                lo = mid
            else:
                hi = mid
        return hi

    def _invert_tail_guess(self, y: float, floor_idx: int) -> int:
        return max(2 * floor_idx, self.support_start + 1)

    # -- enumeration ------------------------------------------------------

    def enumerate_to(self, eps_tail: float, max_atoms: int = _MAX_ENUM) -> tuple[list[int], list[float]]:
        """Atoms (index, prob) until the certified tail drops below ``eps_tail``."""
        idx: list[int] = []
        probs: list[float] = []
        i = self.support_start
        while True:
            if self.tail_bound(i - 1) <= eps_tail and idx:
                break
            idx.append(i)
            probs.append(self.pmf(i))
            if self.tail_bound(i) <= eps_tail:
                break
            if len(idx) >= max_atoms:
                raise TailMassTooLarge(
                    f"tail still {self.tail_bound(i):.3e} > {eps_tail:.3e} after {max_atoms} atoms"
                )
            i += 1
        return idx, probs


class FiniteNLaw(DiscreteNLaw):
    """Explicit finite table on {1, ..., K}."""

    def __init__(self, probs: dict[int, float]):
        if not probs or any(p <= 0 for p in probs.values()):
            raise InvalidDistribution("finite law needs strictly positive masses")
        if abs(sum(probs.values()) - 1.0) > 1e-12:
            raise InvalidDistribution("finite law masses must sum to 1")
        self._probs = dict(sorted(probs.items()))
        self._idx = list(self._probs)
        self._cumlist = np.cumsum(list(self._probs.values()))
        self.support_start = self._idx[0]

    def pmf(self, i: int) -> float:
        return self._probs.get(i, 0.0)

    def tail(self, i: int) -> float:
        pos = bisect.bisect_right(self._idx, i)
        return float(1.0 - self._cumlist[pos - 1]) if pos else 1.0

    def mean(self) -> float:
        return float(sum(i * p for i, p in self._probs.items()))

    def sample(self, u: float) -> int:
        return self._idx[int(np.searchsorted(self._cumlist, u, side="right"))]

    def enumerate_to(self, eps_tail: float, max_atoms: int = _MAX_ENUM):
        return list(self._idx), list(self._probs.values())


class ZipfLaw(DiscreteNLaw):
    """pmf(i) = i^-s / zeta(s) on {1, 2, ...}, s > 1."""

    def __init__(self, s: float):
        if s <= 1:
            raise InvalidDistribution("zipf exponent must exceed 1")
        self.s = float(s)
        self._z = float(zeta(self.s, 1))

    def pmf(self, i: int) -> float:
        if i < 1:
            return 0.0
        return float(i) ** (-self.s) / self._z

    def tail(self, i: int) -> float:
        if i < 1:
            return 1.0
        return float(zeta(self.s, i + 1)) / self._z

    def mean(self) -> float:
        if self.s <= 2:
            return math.inf
        return float(zeta(self.s - 1, 1)) / self._z

    def _invert_tail_guess(self, y: float, floor_idx: int) -> int:
        # tail(n) ~ n^(1-s) / ((s-1) zeta(s))
        est = (y * (self.s - 1) * self._z) ** (1.0 / (1.0 - self.s))
        return max(int(est), 2 * floor_idx, 2)


class LogSquareLaw(DiscreteNLaw):
    """pmf(i) proportional to 1 / (i log^2 i) on {2, 3, ...}.

    sum_i pmf(i) |log pmf(i)| diverges, which makes this the fixture for
    failing log-moment criteria.  The tail decays like 1/log(i).
    """

    support_start = 2
    _N0 = 50_000

    def __init__(self):
        body = sum(self._f(i) for i in range(2, self._N0))
        self._z = body + self._raw_tail(self._N0 - 1)

    @staticmethod
    def _f(i) -> float:
        ll = math.log(i)
        return 1.0 / (i * ll * ll)

    @classmethod
    def _raw_tail(cls, n: int) -> float:
        # Euler-Maclaurin for sum_{i>n} f(i); integral of f is 1/log(x).
        a = n + 1
        la = math.log(a)
        f_a = 1.0 / (a * la * la)
        fp_a = -(la + 2.0) / (a * a * la * la * la)
        return 1.0 / la + 0.5 * f_a - fp_a / 12.0

    def pmf(self, i: int) -> float:
        if i < 2:
            return 0.0
        return self._f(i) / self._z

    def tail(self, i: int) -> float:
        if i < 2:
            return 1.0
        if i < self._N0:
            self._ensure_cache(i)
            return max(0.0, 1.0 - float(self._cum[i - 2]))
        return self._raw_tail(i) / self._z

    def _invert_tail_guess(self, y: float, floor_idx: int) -> int:
        # tail(n) ~ 1 / (z log n)
        expo = min(1.0 / (self._z * y), 500.0)
        return max(int(math.exp(expo)), 2 * floor_idx, 4)


class PolyLogLaw(DiscreteNLaw):
    """pmf(i) proportional to 1 / (i^2 log^2 i) on {2, 3, ...}.

    Finite mean but E[X log X] = infinity: the excursion-length fixture for
    the x-log-x counterexample chain.
    """

    support_start = 2
    _N0 = 1 << 18

    def __init__(self):
        idx = np.arange(2, self._N0)
        vals = 1.0 / (idx.astype(float) ** 2 * np.log(idx) ** 2)
        body = float(vals.sum())
        tail_int = quad(lambda x: 1.0 / (x * x * math.log(x) ** 2), self._N0 - 0.5, np.inf)[0]
        self._z = body + tail_int
        self._cum0 = np.cumsum(vals) / self._z
        # integral of 1/(x log^2 x) has the closed form -1/log(x)
        self._mean = float((vals / self._z * idx).sum()) + (
            1.0 / math.log(self._N0 - 0.5)
        ) / self._z

    def pmf(self, i: int) -> float:
        if i < 2:
            return 0.0
        ll = math.log(i)
        return 1.0 / (i * i * ll * ll) / self._z

    def tail(self, i: int) -> float:
        if i < 2:
            return 1.0
        if i < self._N0:
            return max(0.0, 1.0 - float(self._cum0[i - 2]))
        return quad(lambda x: 1.0 / (x * x * math.log(x) ** 2), i + 0.5, np.inf)[0] / self._z

    def tail_bound(self, i: int) -> float:
        if i < 2:
            return 1.0
        ll = math.log(i)
        return 1.0 / (i * ll * ll) / self._z

    def mean(self) -> float:
        return self._mean


class ParetoIntLaw(DiscreteNLaw):
    """Integer law on {2, 3, ...} with P(X > n) = (2 / (n + 1))^q."""

    support_start = 2

    def __init__(self, q: float):
        if q <= 0:
            raise InvalidDistribution("pareto exponent must be positive")
        self.q = float(q)

    def pmf(self, i: int) -> float:
        if i < 2:
            return 0.0
        return self.tail(i - 1) - self.tail(i)

    def tail(self, i: int) -> float:
        if i < 2:
            return 1.0
        return (2.0 / (i + 1.0)) ** self.q

    def mean(self) -> float:
        if self.q <= 1:
            return math.inf
        return 2.0 + sum(self.tail(i) for i in range(2, 100000))

    def _invert_tail_guess(self, y: float, floor_idx: int) -> int:
        return max(int(2.0 * y ** (-1.0 / self.q)), 2 * floor_idx, 3)


class GeometricLaw(DiscreteNLaw):
    """pmf(i) = (1 - r) r^(i-1) on {1, 2, ...}."""

    def __init__(self, r: float):
        if not 0 < r < 1:
            raise InvalidDistribution("geometric ratio must lie in (0, 1)")
        self.r = float(r)

    def pmf(self, i: int) -> float:
        return (1.0 - self.r) * self.r ** (i - 1)

    def tail(self, i: int) -> float:
        return self.r ** i if i >= 1 else 1.0

    def mean(self) -> float:
        return 1.0 / (1.0 - self.r)

    def sample(self, u: float) -> int:
        return max(1, math.ceil(math.log1p(-u) / math.log(self.r)))


_NAMED = {
    "zipf2": lambda: ZipfLaw(2.0),
    "zipf3": lambda: ZipfLaw(3.0),
    "logsq": LogSquareLaw,
    "polylog": PolyLogLaw,
}


def law_from_name(name: str) -> DiscreteNLaw:
    """Parse laws like ``zipf2``, ``zipf(2.5)``, ``geometric(0.5)``, ``logsq``."""
    name = name.strip()
    if name in _NAMED:
        return _NAMED[name]()
    if "(" in name and name.endswith(")"):
        head, arg = name[:-1].split("(", 1)
        value = float(arg)
        if head == "zipf":
            return ZipfLaw(value)
        if head == "geometric":
            return GeometricLaw(value)
        if head == "pareto":
            return ParetoIntLaw(value)
    raise InvalidDistribution(f"unknown law {name!r}")
