"""Built-in model zoo: the walk-on-a-flower chains, Sisyphus chains, the
birth-death coboundary chain, single-state walks, and the doubly-exponential
first-passage counterexample, each emitted as a validated :class:`ModelSpec`.

Every constructor returns a spec that passes ``build_model`` validation, and
the registry at the bottom carries the expected fluctuation behavior used by
the ``zoo regress`` command.

Increment values that would leave the double range are saturated at
``+-SATURATION`` (documented; it affects only astronomically rare petals and
never the cycle bookkeeping of the shipped fixtures).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .kernels import DiscreteKernel, Kernel, PointMass
from .laws import (
    DiscreteNLaw,
    FiniteNLaw,
    GeometricLaw,
    InvalidDistribution,
    ParetoIntLaw,
    PolyLogLaw,
    ZipfLaw,
    law_from_name,
)
from .model import FiniteRow, LawRow, ModelSpec

SATURATION = 1e300


def _sat(x: float) -> float:
    if x > SATURATION:
        return SATURATION
    if x < -SATURATION:
        return -SATURATION
    return x


def _inv(p: float) -> float:
    return _sat(1.0 / p) if p > 0.0 else SATURATION


# ---------------------------------------------------------------------------
# petal flower (plain / alternating / drop-table variants)


class _FlowerKernelOf:
    """Entry kernel K_{0i} of a flower chain; ``swap`` selects the dual."""

    def __init__(self, p0: DiscreteNLaw, variant: str, swap: bool):
        self.p0 = p0
        self.variant = variant
        self.swap = swap

    def _pair(self, i: int) -> tuple[float, float]:
        c = _inv(self.p0.pmf(i))
        down, up = -c, _sat(2.0 + c)
        if self.variant == "alternating" and i % 2 == 1:
            down, up = up, down
        if self.swap:
            down, up = up, down
        return down, up

    def __call__(self, i: int) -> Kernel:
        return PointMass(self._pair(i)[0])

    def exit_kernel(self, i: int) -> Kernel:
        return PointMass(self._pair(i)[1])


class _FlowerRowFn:
    def __init__(self, p0: DiscreteNLaw, kernel_of: _FlowerKernelOf):
        self.p0 = p0
        self.kernel_of = kernel_of

    def __call__(self, state):
        if state == 0:
            return LawRow(self.p0, _identity, self.kernel_of)
        return FiniteRow([0], [1], [self.kernel_of.exit_kernel(state)])


def _identity(i: int) -> int:
    return i


class _FlowerPi:
    def __init__(self, p0: DiscreteNLaw):
        self.p0 = p0

    def __call__(self, state) -> float:
        return 0.5 if state == 0 else 0.5 * self.p0.pmf(state)


class _FlowerDipTail:
    """P(1/p0(I) > y) for a p0 with nonincreasing pmf."""

    def __init__(self, p0: DiscreteNLaw):
        self.p0 = p0

    def __call__(self, y: float) -> float:
        if y <= 0:
            return 1.0
        thresh = 1.0 / y
        i = self.p0.support_start
        if self.p0.pmf(i) < thresh:
            return 1.0
        hi = i + 1
        while self.p0.pmf(hi) >= thresh:
            hi *= 2
        lo = i
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.p0.pmf(mid) >= thresh:
                lo = mid
            else:
                hi = mid
        return self.p0.tail(lo)


@dataclass
class FlowerStructure:
    """Regenerative description of a constant-cycle-sum flower chain.

    ``phi(r, w)`` is the within-cycle joint P(chi > r, S_r - S_start <= w)
    for offsets r >= 1; the Spitzer evaluator convolves it against the exact
    renewal array of the anchor returns.
    """

    cycle_sum: float
    length_pmf: Callable[[int], float]
    length_tail: Callable[[int], float]
    phi: Callable[[int, float], float]


class _PlainFlowerPhi:
    def __init__(self, dip_tail: _FlowerDipTail, swap: bool):
        self.dip_tail = dip_tail
        self.swap = swap

    def __call__(self, r: int, w: float) -> float:
        if r != 1:
            return 0.0
        if self.swap:
            # dual runs uphill first: level_1 = 2 + dip
            return 1.0 - self.dip_tail(w - 2.0) if w >= 2.0 else 0.0
        return 1.0 if w >= 0 else self.dip_tail(-w)


class _Chi2Pmf:
    def __call__(self, n: int) -> float:
        return 1.0 if n == 2 else 0.0


class _Chi2Tail:
    def __call__(self, n: int) -> float:
        return 1.0 if n < 2 else 0.0


def zoo_petal_flower(p0="zipf2", variant: str = "plain", _swap: bool = False) -> ModelSpec:
    """Flower chain: center 0, petals i with p_0i from ``p0`` and p_i0 = 1.

    Entering petal i costs ``-1/p_0i``; returning pays ``2 + 1/p_0i``, so
    every completed cycle adds exactly 2.  The alternating variant swaps the
    two values on odd petals, which makes the dual oscillate as well.
    """
    if isinstance(p0, str):
        p0 = law_from_name(p0)
    if variant not in ("plain", "alternating"):
        raise ValueError(f"unknown variant {variant!r}")
    kernel_of = _FlowerKernelOf(p0, variant, _swap)
    dip_tail = _FlowerDipTail(p0)
    meta = {
        "exact_kernels": True,
        "recurrence_certified": True,
        "anchor": 0,
        "dual_factory": _FlowerDual(p0, variant, not _swap),
    }
    if variant == "plain":
        meta["spitzer"] = FlowerStructure(
            cycle_sum=2.0,
            length_pmf=_Chi2Pmf(),
            length_tail=_Chi2Tail(),
            phi=_PlainFlowerPhi(dip_tail, _swap),
        )
    name = "petal-flower" if variant == "plain" else "petal-flower-alt"
    if _swap:
        name = f"dual({name})"
    return ModelSpec(
        name=name,
        row_fn=_FlowerRowFn(p0, kernel_of),
        start_states=[0],
        stationary_fn=_FlowerPi(p0),
        parameters={"p0": type(p0).__name__, "variant": variant},
        meta=meta,
    )


class _FlowerDual:
    def __init__(self, p0: DiscreteNLaw, variant: str, swap: bool):
        self.p0 = p0
        self.variant = variant
        self.swap = swap

    def __call__(self, spec: ModelSpec) -> ModelSpec:
        return zoo_petal_flower(self.p0, self.variant, _swap=self.swap)


# ---------------------------------------------------------------------------
# Example 11.2-style flower with a prescribed drop table


class _GapDrops:
    def __init__(self, power: float):
        self.power = power

    def __call__(self, i: int) -> float:
        return float(i) ** self.power


class _GapKernelOf:
    def __init__(self, p0: DiscreteNLaw, drops: Callable[[int], float]):
        self.p0 = p0
        self.drops = drops

    def __call__(self, i: int) -> Kernel:
        return PointMass(-_sat(self.drops(i)))

    def exit_kernel(self, i: int) -> Kernel:
        return PointMass(_sat(self.drops(i) + 2.0))


def zoo_integral_gap(p0="zipf3", drop_power: float = 1.5) -> ModelSpec:
    """Flower with drops x_i = i**drop_power: the chain separating the three
    integral criteria (cycle length is identically 2, cycle sum identically 2,
    and the single within-cycle drop is x_i)."""
    if isinstance(p0, str):
        p0 = law_from_name(p0)
    kernel_of = _GapKernelOf(p0, _GapDrops(drop_power))
    return ModelSpec(
        name="integral-gap",
        row_fn=_FlowerRowFn(p0, kernel_of),
        start_states=[0],
        stationary_fn=_FlowerPi(p0),
        parameters={"p0": type(p0).__name__, "drop_power": drop_power},
        meta={"exact_kernels": True, "recurrence_certified": True, "anchor": 0},
    )


# ---------------------------------------------------------------------------
# generalized petal flower (variable excursion length)


class _GpfState:
    def __call__(self, k: int):
        return (k, 1)


class _GpfEnterKernel:
    def __init__(self, variant: str, alpha: float):
        self.variant = variant
        self.alpha = alpha

    def __call__(self, k: int) -> Kernel:
        if self.variant == "xlogx":
            return PointMass(-(k - 1))
        return PointMass(-1.0)


class _GpfRowFn:
    def __init__(self, gamma_law: DiscreteNLaw, variant: str, alpha: float):
        self.gamma_law = gamma_law
        self.variant = variant
        self.alpha = alpha
        self.enter = _GpfEnterKernel(variant, alpha)

    def __call__(self, state):
        if state == 0:
            return LawRow(self.gamma_law, _GpfState(), self.enter)
        k, l = state
        if l < k - 1:
            if self.variant == "xlogx":
                kern = PointMass(0)
            else:
                kern = PointMass(-float(l + 1) ** (1.0 / self.alpha))
            return FiniteRow([(k, l + 1)], [1], [kern])
        if self.variant == "xlogx":
            return FiniteRow([0], [1], [PointMass(k)])
        total = sum(float(j) ** (1.0 / self.alpha) for j in range(1, k))
        return FiniteRow([0], [1], [PointMass(_sat(1.0 + total))])


class _GpfPi:
    def __init__(self, gamma_law: DiscreteNLaw):
        self.gamma_law = gamma_law
        self.mean = gamma_law.mean()

    def __call__(self, state) -> float:
        if state == 0:
            return 1.0 / self.mean
        return self.gamma_law.pmf(state[0]) / self.mean


class _GpfXlogxPhi:
    def __init__(self, gamma_law: DiscreteNLaw):
        self.gamma_law = gamma_law

    def __call__(self, r: int, w: float) -> float:
        if w >= 0:
            return self.gamma_law.tail(r)
        need = math.ceil(1.0 - w - 1e-9)  # Gamma >= need makes level <= w
        return self.gamma_law.tail(max(r, need - 1))


class _GpfMinPhi:
    def __init__(self, gamma_law: DiscreteNLaw, alpha: float):
        self.gamma_law = gamma_law
        self.alpha = alpha

    def __call__(self, r: int, w: float) -> float:
        level = -sum(float(j) ** (1.0 / self.alpha) for j in range(1, r + 1))
        return self.gamma_law.tail(r) if level <= w else 0.0


class _LawPmf:
    def __init__(self, law: DiscreteNLaw):
        self.law = law

    def __call__(self, n: int) -> float:
        return self.law.pmf(n)


class _LawTail:
    def __init__(self, law: DiscreteNLaw):
        self.law = law

    def __call__(self, n: int) -> float:
        return self.law.tail(n)


def zoo_generalized_petal_flower(
    gamma_law="polylog", variant: str = "xlogx", alpha: float = 1.5
) -> ModelSpec:
    """Flower with excursions of length Gamma through states (k, 1..k-1).

    ``xlogx``: one drop of depth Gamma-1, repaid at the return, cycle sum 1.
    ``min_counterexample``: staircase drops -l^(1/alpha), cycle sum 1; the
    pathwise cycle minimum is sum_{l<Gamma} l^(1/alpha).
    """
    if isinstance(gamma_law, str):
        gamma_law = law_from_name(gamma_law)
    if variant == "min_counterexample":
        if alpha <= 1:
            raise ValueError("min counterexample needs alpha > 1")
    elif variant != "xlogx":
        raise ValueError(f"unknown variant {variant!r}")
    if not math.isfinite(gamma_law.mean()):
        raise InvalidDistribution("excursion-length law must have finite mean")
    if gamma_law.support_start < 2:
        raise InvalidDistribution("excursion lengths must be >= 2")
    phi = (
        _GpfXlogxPhi(gamma_law)
        if variant == "xlogx"
        else _GpfMinPhi(gamma_law, alpha)
    )
    return ModelSpec(
        name="xlogx-flower" if variant == "xlogx" else "min-flower",
        row_fn=_GpfRowFn(gamma_law, variant, alpha),
        start_states=[0],
        stationary_fn=_GpfPi(gamma_law),
        parameters={"gamma_law": type(gamma_law).__name__, "variant": variant, "alpha": alpha},
        meta={
            "exact_kernels": True,
            "recurrence_certified": True,
            "anchor": 0,
            "spitzer": FlowerStructure(
                cycle_sum=1.0,
                length_pmf=_LawPmf(gamma_law),
                length_tail=_LawTail(gamma_law),
                phi=phi,
            ),
        },
    )


# ---------------------------------------------------------------------------
# Sisyphus chains


class _SisyphusRowFn:
    """p_{n,n+1} = (n/(n+1))^beta; increment on edge (a -> b) is x_of(b)."""

    def __init__(self, beta: float, x_of: Callable[[int], float]):
        self.beta = beta
        self.x_of = x_of

    def __call__(self, state):
        if state == 0:
            return FiniteRow([1], [1], [PointMass(self.x_of(1))])
        q = (state / (state + 1.0)) ** self.beta
        return FiniteRow(
            [state + 1, 0],
            [q, 1.0 - q],
            [PointMass(self.x_of(state + 1)), PointMass(self.x_of(0))],
        )


class _SisyphusPi:
    def __init__(self, beta: float):
        from scipy.special import zeta

        self.beta = beta
        self.mean_tau = 1.0 + float(zeta(beta, 1))

    def __call__(self, state) -> float:
        if state == 0:
            return 1.0 / self.mean_tau
        return float(state) ** (-self.beta) / self.mean_tau


class _InverseSquare:
    def __call__(self, b: int) -> float:
        return (b + 1.0) ** -2


class _IdentityX:
    def __call__(self, b: int) -> float:
        return float(b)


def zoo_sisyphus(alpha: float) -> ModelSpec:
    """Uphill chain with return-time tail n^-(1+alpha) and increments
    (M_n + 1)^-2; all increments are positive and the full cycle gain stays
    below 1 + pi^2/6."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    beta = 1.0 + alpha
    return ModelSpec(
        name="sisyphus",
        row_fn=_SisyphusRowFn(beta, _InverseSquare()),
        start_states=[0],
        stationary_fn=_SisyphusPi(beta),
        parameters={"alpha": alpha},
        meta={"exact_kernels": True, "recurrence_certified": True, "anchor": 0},
    )


def zoo_tail_comparison(alpha: float) -> ModelSpec:
    """Sisyphus chain with return tail n^-alpha and increments X_n = M_n,
    so the cycle sum is tau(tau-1)/2: stationary increment tails and cycle-sum
    tails have genuinely different exponents (alpha-1 versus alpha/2)."""
    if not 1.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (1, 2)")
    return ModelSpec(
        name="tail-comparison",
        row_fn=_SisyphusRowFn(alpha, _IdentityX()),
        start_states=[0],
        stationary_fn=_SisyphusPi(alpha),
        parameters={"alpha": alpha},
        meta={"exact_kernels": True, "recurrence_certified": True, "anchor": 0},
    )


# ---------------------------------------------------------------------------
# birth-death coboundary chain


def _gamma_bd(m: int) -> int:
    if m == 0:
        return 0
    return m // 2 if m % 2 == 0 else -(m + 1) // 2


class _BirthDeathRowFn:
    def __init__(self, y_values: tuple, y_probs: tuple):
        self.y_values = y_values
        self.y_probs = y_probs

    def _kernel(self, a: int, b: int) -> Kernel:
        shift = _gamma_bd(b) - _gamma_bd(a)
        if len(self.y_values) == 1:
            return PointMass(self.y_values[0] + shift)
        return DiscreteKernel(tuple(v + shift for v in self.y_values), self.y_probs)

    def __call__(self, state):
        if state == 0:
            return FiniteRow([1], [1], [self._kernel(0, 1)])
        down = (state + 2.0) / (2.0 * (state + 1.0))
        return FiniteRow(
            [state - 1, state + 1],
            [down, 1.0 - down],
            [self._kernel(state, state - 1), self._kernel(state, state + 1)],
        )


def _birth_death_pi(state) -> float:
    if state == 0:
        return 0.25
    return 1.0 / (state * (state + 2.0))


def zoo_birth_death(y_law="fair") -> ModelSpec:
    """Birth-death chain whose coboundary part gamma(2i) = -gamma(2i-1) = i
    has infinite stationary positive and negative parts.  ``y_law`` adds an
    iid integrable noise: "fair" is +-1, "zero" gives the pure coboundary
    (null-homologous, unbounded both ways)."""
    if y_law == "fair":
        values, probs = (-1.0, 1.0), (Fraction(1, 2), Fraction(1, 2))
    elif y_law == "zero":
        values, probs = (0.0,), (1,)
    elif isinstance(y_law, tuple):
        values, probs = y_law
    else:
        raise ValueError(f"unknown y_law {y_law!r}")
    name = "birth-death" if values != (0.0,) else "coboundary-birth-death"
    return ModelSpec(
        name=name,
        row_fn=_BirthDeathRowFn(tuple(values), tuple(probs)),
        start_states=[0],
        stationary_fn=_birth_death_pi,
        parameters={"y_law": str(y_law)},
        meta={"exact_kernels": True, "recurrence_certified": True, "anchor": 0},
    )


# ---------------------------------------------------------------------------
# single state (ordinary random walk)


def zoo_single_state(kernel: Kernel) -> ModelSpec:
    return ModelSpec(
        name="single-state",
        states=[0],
        transitions={0: {0: 1}},
        kernels={(0, 0): kernel},
        parameters={},
        meta={"anchor": 0},
    )


# ---------------------------------------------------------------------------
# Example 10.1: oscillating, yet all sigma^>(x) moments finite


class _SigmaMomentLaw(DiscreteNLaw):
    """Law of the petal index (0 = stay): tail n^-(1+alpha) from n = 2 on."""

    support_start = 0

    def __init__(self, alpha: float):
        self.beta = 1.0 + alpha
        self.p_half = 0.5 * (1.0 - 2.0 ** (-self.beta))

    def pmf(self, i: int) -> float:
        if i in (0, 1):
            return self.p_half
        return i ** (-self.beta) - (i + 1.0) ** (-self.beta)

    def tail(self, i: int) -> float:
        if i < 0:
            return 1.0
        if i == 0:
            return 1.0 - self.p_half
        if i == 1:
            return 2.0 ** (-self.beta)
        return (i + 0.0) ** (-self.beta)

    def mean(self) -> float:
        return math.inf if self.beta <= 2 else self.p_half + sum(
            self.tail(i) for i in range(1, 200000)
        )

    def _invert_tail_guess(self, y: float, floor_idx: int) -> int:
        return max(int(y ** (-1.0 / self.beta)) + 1, 2 * floor_idx, 2)


class _SigmaMomentKernelOf:
    def __init__(self, alpha: float, theta: float):
        self.expo = 1.0 + alpha
        self.theta = theta

    def f(self, i: int) -> float:
        e = self.theta * float(i) ** self.expo
        return 2.0 ** min(e, 995.0)

    def __call__(self, i: int) -> Kernel:
        if i == 0:
            return PointMass(0.0)
        return PointMass(self.f(i))


class _SigmaMomentRowFn:
    def __init__(self, law: _SigmaMomentLaw, kernel_of: _SigmaMomentKernelOf):
        self.law = law
        self.kernel_of = kernel_of

    def __call__(self, state):
        if state == 0:
            return LawRow(self.law, _identity, self.kernel_of)
        f = self.kernel_of.f(state)
        # keep the cycle sum exactly -state even when f saturates
        if f >= 2.0 ** 53 * max(state, 1):
            back = -f
        else:
            back = -(f + state)
        return FiniteRow([0], [1], [PointMass(back)])


class _SigmaMomentPi:
    def __init__(self, law: _SigmaMomentLaw):
        self.law = law
        self.mean_tau = 2.0 - law.pmf(0)

    def __call__(self, state) -> float:
        return self.law.pmf(state) / self.mean_tau if state else 1.0 / self.mean_tau


def zoo_sigma_moment_counterexample(alpha: float, theta: float) -> ModelSpec:
    """Negative-drift flower whose petal heights 2^(theta i^(1+alpha)) grow so
    fast that sigma^>(x) keeps moments of order 1+alpha although the walk
    oscillates.  Requires theta > 1 + alpha."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if theta <= 1.0 + alpha:
        raise ValueError("theta must exceed 1 + alpha")
    law = _SigmaMomentLaw(alpha)
    kernel_of = _SigmaMomentKernelOf(alpha, theta)
    return ModelSpec(
        name="sigma-moment",
        row_fn=_SigmaMomentRowFn(law, kernel_of),
        start_states=[0],
        stationary_fn=_SigmaMomentPi(law),
        parameters={"alpha": alpha, "theta": theta},
        meta={"exact_kernels": True, "recurrence_certified": True, "anchor": 0},
    )


# ---------------------------------------------------------------------------
# random affine maps in Markovian environment


def zoo_affine_env(transitions: dict, a_kernels: dict) -> ModelSpec:
    """MRW of log|A_n| for affine iterations modulated by a finite chain.

    ``a_kernels`` maps edges to discrete tables of the multiplier A (nonzero
    values); the emitted kernels carry the atoms log|a|.
    """
    states = sorted({s for s in transitions}, key=repr)
    kernels = {}
    for edge, table in a_kernels.items():
        values, probs = table
        if any(v == 0 for v in values):
            raise ValueError("multiplier A must be almost surely nonzero")
        logs = tuple(math.log(abs(float(v))) for v in values)
        if len(logs) == 1:
            kernels[edge] = PointMass(logs[0])
        else:
            kernels[edge] = DiscreteKernel(logs, tuple(probs))
    return ModelSpec(
        name="affine-env",
        states=states,
        transitions=transitions,
        kernels=kernels,
        parameters={},
        meta={"anchor": states[0]},
    )


def _default_affine_env() -> ModelSpec:
    transitions = {
        0: {0: Fraction(1, 2), 1: Fraction(1, 2)},
        1: {0: Fraction(1, 2), 1: Fraction(1, 2)},
    }
    a_kernels = {
        (0, 0): ((2.0,), (1,)),
        (0, 1): ((0.5,), (1,)),
        (1, 0): ((0.5,), (1,)),
        (1, 1): ((0.5,), (1,)),
    }
    return zoo_affine_env(transitions, a_kernels)


# ---------------------------------------------------------------------------
# registry


@dataclass
class ZooEntry:
    name: str
    factory: Callable[..., ModelSpec]
    defaults: dict
    expected: dict
    note: str


def _single_drift() -> ModelSpec:
    spec = zoo_single_state(PointMass(1))
    spec.name = "single-state-drift"
    return spec


def _single_symmetric() -> ModelSpec:
    spec = zoo_single_state(DiscreteKernel((-1, 1), (Fraction(1, 2), Fraction(1, 2))))
    spec.name = "single-state-symmetric"
    return spec


REGISTRY: dict[str, ZooEntry] = {}


def _register(name, factory, defaults, expected, note):
    REGISTRY[name] = ZooEntry(name, factory, defaults, expected, note)


_register(
    "petal-flower",
    zoo_petal_flower,
    {"p0": "zipf2", "variant": "plain"},
    {"category": "Osc", "embedded": "PD", "dual": "PD", "null_homologous": False},
    "walk oscillates, every embedded walk positive divergent, dual PD",
)
_register(
    "petal-flower-alt",
    zoo_petal_flower,
    {"p0": "zipf2", "variant": "alternating"},
    {"category": "Osc", "embedded": "PD", "dual": "Osc", "null_homologous": False},
    "walk and dual both oscillate, embedded walks positive divergent",
)
_register(
    "sisyphus",
    zoo_sisyphus,
    {"alpha": 0.5},
    {"category": "PD", "embedded": "PD", "null_homologous": False},
    "positive increments; return-time tail n^-(1+alpha)",
)
_register(
    "xlogx-flower",
    zoo_generalized_petal_flower,
    {"gamma_law": "polylog", "variant": "xlogx"},
    {"category": "PD", "embedded": "PD", "null_homologous": False},
    "PD with E[chi log chi] = inf: the log-moment criterion fails while the harmonic series converges",
)
_register(
    "min-flower",
    zoo_generalized_petal_flower,
    {"gamma_law": "pareto(4.0)", "variant": "min_counterexample", "alpha": 1.5},
    {"category": "PD", "embedded": "PD", "null_homologous": False},
    "PD with finite overshoot moments but infinite minimum moment",
)
_register(
    "tail-comparison",
    zoo_tail_comparison,
    {"alpha": 1.5},
    {"category": "PD", "rate": "PD+", "null_homologous": False},
    "cycle-sum tail n^(-alpha/2) versus stationary increment tail n^-(alpha-1)",
)
_register(
    "birth-death",
    zoo_birth_death,
    {"y_law": "fair"},
    {"category": "Osc", "embedded": "Osc", "rate": 0.0, "null_homologous": False,
     "stationary_mean_exists": False},
    "SLLN rate 0 although the stationary increment mean does not exist",
)
_register(
    "coboundary-birth-death",
    zoo_birth_death,
    {"y_law": "zero"},
    {"null_homologous": True, "nh_class": "NH-5"},
    "pure coboundary of an unbounded potential: null-homologous, class NH-5",
)
_register(
    "single-state-drift",
    _single_drift,
    {},
    {"category": "PD", "embedded": "PD", "null_homologous": False},
    "ordinary walk with unit drift",
)
_register(
    "single-state-symmetric",
    _single_symmetric,
    {},
    {"category": "Osc", "embedded": "Osc", "null_homologous": False},
    "fair +-1 walk",
)
_register(
    "sigma-moment",
    zoo_sigma_moment_counterexample,
    {"alpha": 1.0, "theta": 2.5},
    {"category": "Osc", "embedded": "ND", "null_homologous": False},
    "oscillates with negative-divergent embedded walks yet finite sigma^>(x) moments",
)
_register(
    "integral-gap",
    zoo_integral_gap,
    {"p0": "zipf3", "drop_power": 1.5},
    {"category": "PD", "embedded": "PD", "null_homologous": False},
    "two-step cycles whose drop moments separate the three integral criteria",
)
_register(
    "affine-env",
    _default_affine_env,
    {},
    {"category": "ND", "null_homologous": False},
    "log-multiplier walk of a contracting affine system",
)


def family_spec(name: str, params: Optional[dict] = None) -> ModelSpec:
    """Instantiate a registry entry, overriding default parameters."""
    entry = REGISTRY.get(name)
    if entry is None:
        raise KeyError(f"unknown zoo model {name!r}; see `zoo list`")
    kwargs = dict(entry.defaults)
    kwargs.update(params or {})
    return entry.factory(**kwargs)
