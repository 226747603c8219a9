"""Model layer: driving chain plus increment kernels, stationary laws, duals.

A model is either *finite* (explicit states, transition table, kernel table)
or an *infinite family* (rows produced lazily by a callable, closed-form
stationary law, certified tail truncation for enumeration).  Stationary laws
of finite rational specs are solved exactly over ``fractions.Fraction``;
float specs use damped power iteration with a residual certificate.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .kernels import (
    DiscreteKernel,
    Kernel,
    PointMass,
    UnsupportedKernel,
    kernel_from_dict,
    kernel_to_dict,
    scale_kernel,
    _parse_real,
    _real_to_json,
)
from .laws import DiscreteNLaw, InvalidDistribution, TailMassTooLarge

__all__ = [
    "NotStochastic",
    "Reducible",
    "TailMassTooLarge",
    "InvalidDistribution",
    "UnsupportedKernel",
    "FiniteRow",
    "LawRow",
    "ModelSpec",
    "StationaryLaw",
    "Model",
    "build_model",
    "dual_model",
    "negate_model",
    "scale_model",
    "load_spec",
    "save_spec",
]


class NotStochastic(Exception):
    """A transition row does not sum to one."""


class Reducible(Exception):
    """The reachable state set is not strongly connected."""


# ---------------------------------------------------------------------------
# rows


class FiniteRow:
    """Finitely supported transition row with per-edge kernels."""

    __slots__ = ("succ", "probs", "kernels", "cum", "values")

    def __init__(self, succ: Sequence, probs: Sequence, kernels: Sequence[Kernel]):
        self.succ = tuple(succ)
        self.probs = tuple(probs)
        self.kernels = tuple(kernels)
        cum, acc = [], 0.0
        for p in self.probs:
            acc += float(p)
            cum.append(acc)
        if cum:
            cum[-1] = max(cum[-1], 1.0)
        self.cum = cum
        # point-mass values inlined for the hot sampling loop
        self.values = tuple(
            float(k.value) if isinstance(k, PointMass) else None for k in self.kernels
        )

    def row_sum(self):
        return sum(self.probs)

    def step(self, u: float, rng) -> tuple:
        k = bisect.bisect_right(self.cum, u)
        if k >= len(self.succ):
            k = len(self.succ) - 1
        v = self.values[k]
        if v is None:
            v = self.kernels[k].sample(rng.random())
        return self.succ[k], v

    def enumerate(self, eps_tail: float) -> list[tuple]:
        return list(zip(self.succ, self.probs, self.kernels))

    def tail_defect(self, eps_tail: float) -> float:
        return 0.0


class LawRow:
    """Row over countably many successors indexed by a :class:`DiscreteNLaw`.

    ``state_of(i)`` maps the law's index to a state label and
    ``kernel_of(i)`` to the increment kernel on that edge.  Both callables
    must be picklable (module-level functions or callable instances).
    """

    def __init__(self, law: DiscreteNLaw, state_of: Callable, kernel_of: Callable):
        self.law = law
        self.state_of = state_of
        self.kernel_of = kernel_of

    def row_sum(self):
        return 1.0

    def step(self, u: float, rng) -> tuple:
        i = self.law.sample(u)
        kern = self.kernel_of(i)
        if isinstance(kern, PointMass):
            return self.state_of(i), float(kern.value)
        return self.state_of(i), kern.sample(rng.random())

    def enumerate(self, eps_tail: float) -> list[tuple]:
        idx, probs = self.law.enumerate_to(eps_tail)
        return [(self.state_of(i), p, self.kernel_of(i)) for i, p in zip(idx, probs)]

    def tail_defect(self, eps_tail: float) -> float:
        idx, _ = self.law.enumerate_to(eps_tail)
        return self.law.tail_bound(idx[-1])


Row = object  # FiniteRow | LawRow


# ---------------------------------------------------------------------------
# spec


@dataclass
class ModelSpec:
    """Declarative model description (finite table or parametric family)."""

    name: str
    states: Optional[list] = None
    transitions: Optional[dict] = None  # state -> {state: prob}
    kernels: Optional[dict] = None  # (state, state) -> Kernel
    row_fn: Optional[Callable] = None  # state -> Row  (infinite families)
    start_states: Optional[list] = None  # representative states of a family
    stationary_fn: Optional[Callable] = None  # closed-form pi for families
    eps_tail: float = 1e-12
    parameters: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return self.states is not None

    def row(self, state) -> Row:
        if self.finite:
            out = self.transitions.get(state)
            if out is None:
                raise KeyError(f"state {state!r} not in spec")
            succ = list(out)
            return FiniteRow(
                succ,
                [out[j] for j in succ],
                [self.kernels[(state, j)] for j in succ],
            )
        return self.row_fn(state)


# ---------------------------------------------------------------------------
# stationary law


class StationaryLaw:
    """Stationary distribution, exact (rational), tabulated, or closed form."""

    def __init__(
        self,
        mapping: Optional[dict] = None,
        fn: Optional[Callable] = None,
        residual: float = 0.0,
        exact: Optional[dict] = None,
    ):
        if mapping is None and fn is None:
            raise ValueError("need a mapping or a closed form")
        self.mapping = mapping
        self.fn = fn
        self.residual = residual
        self.exact = exact  # state -> Fraction, when available

    def prob(self, state) -> float:
        if self.mapping is not None and state in self.mapping:
            return float(self.mapping[state])
        if self.fn is not None:
            return float(self.fn(state))
        raise KeyError(state)

    def __call__(self, state) -> float:
        return self.prob(state)

    def as_dict(self) -> dict:
        if self.mapping is None:
            raise ValueError("closed-form law has no finite table")
        return {s: float(p) for s, p in self.mapping.items()}


# ---------------------------------------------------------------------------
# model


class Model:
    """Validated spec plus cached stationary law.  Immutable by convention."""

    def __init__(self, spec: ModelSpec, stationary: StationaryLaw):
        self.spec = spec
        self.stationary = stationary
        self._rows: dict = {}
        if spec.finite:
            self.states = list(spec.states)
            self.index = {s: k for k, s in enumerate(self.states)}
            n = len(self.states)
            self.P = np.zeros((n, n))
            for a, out in spec.transitions.items():
                for b, p in out.items():
                    self.P[self.index[a], self.index[b]] = float(p)
            self.pi_vec = np.array([stationary.prob(s) for s in self.states])
        else:
            self.states = None
            self.index = None
            self.P = None
            self.pi_vec = None

    # -- basic queries ------------------------------------------------------

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def finite(self) -> bool:
        return self.spec.finite

    def pi(self, state) -> float:
        return self.stationary.prob(state)

    def row(self, state) -> Row:
        row = self._rows.get(state)
        if row is None:
            row = self.spec.row(state)
            self._rows[state] = row
        return row

    def kernel(self, a, b) -> Kernel:
        if self.finite:
            return self.spec.kernels[(a, b)]
        for s, _p, k in self.row(a).enumerate(self.spec.eps_tail):
            if s == b:
                return k
        raise KeyError((a, b))

    @property
    def exact_kernels(self) -> bool:
        """True when every kernel (on enumerable edges) has a finite atom table."""
        if not self.finite:
            return bool(self.spec.meta.get("exact_kernels", False))
        return all(k.is_exact for k in self.spec.kernels.values())

    @property
    def rational(self) -> bool:
        return self.stationary.exact is not None

    def default_start(self):
        if self.finite:
            return self.states[0]
        return self.spec.start_states[0]

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_rows"] = {}
        return state

    def __repr__(self) -> str:
        kind = f"finite[{len(self.states)}]" if self.finite else "family"
        return f"Model({self.name!r}, {kind})"


# ---------------------------------------------------------------------------
# construction


def build_model(spec: ModelSpec, tol: float = 1e-12) -> Model:
    """Validate a spec and compute its stationary law.

    Raises:
        NotStochastic: a row sum is off by more than ``tol``.
        Reducible: the reachable set is not strongly connected.
        TailMassTooLarge: an infinite row cannot certify its tail.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if spec.finite:
        _validate_finite(spec, tol)
        law = _stationary_finite(spec, tol)
    else:
        _validate_family(spec, tol)
        if spec.stationary_fn is None:
            raise ValueError("infinite family requires a closed-form stationary law")
        law = StationaryLaw(fn=spec.stationary_fn, residual=0.0)
    return Model(spec, law)


def _validate_finite(spec: ModelSpec, tol: float) -> None:
    states = spec.states
    if not states:
        raise ValueError("empty state list")
    state_set = set(states)
    for a in states:
        out = spec.transitions.get(a)
        if not out:
            raise NotStochastic(f"state {a!r} has no outgoing row")
        total = sum(out.values())
        if isinstance(total, Fraction):
            off = abs(float(total - 1))
        else:
            off = abs(float(total) - 1.0)
        if off > tol:
            raise NotStochastic(f"row of {a!r} sums to {float(total)!r}")
        for b, p in out.items():
            if b not in state_set:
                raise ValueError(f"edge {a!r}->{b!r} leaves the state set")
            if float(p) < 0:
                raise NotStochastic(f"negative probability on {a!r}->{b!r}")
            if float(p) > 0 and (a, b) not in spec.kernels:
                raise ValueError(f"missing kernel on edge {a!r}->{b!r}")
            if float(p) == 0 and (a, b) in spec.kernels:
                raise ValueError(f"kernel on zero-probability edge {a!r}->{b!r}")
    for (a, b) in spec.kernels:
        p = spec.transitions.get(a, {}).get(b, 0)
        if float(p) <= 0:
            raise ValueError(f"kernel on zero-probability edge {a!r}->{b!r}")
    _check_strongly_connected(spec)


def _check_strongly_connected(spec: ModelSpec) -> None:
    states = spec.states
    start = states[0]
    fwd = {a: [b for b, p in spec.transitions[a].items() if float(p) > 0] for a in states}
    reach = _bfs(start, fwd)
    if reach != set(states):
        missing = sorted(set(states) - reach, key=repr)
        raise Reducible(f"states unreachable from {start!r}: {missing}")
    back: dict = {a: [] for a in states}
    for a, outs in fwd.items():
        for b in outs:
            back[b].append(a)
    coreach = _bfs(start, back)
    if coreach != set(states):
        missing = sorted(set(states) - coreach, key=repr)
        raise Reducible(f"states that cannot reach {start!r}: {missing}")


def _bfs(start, adj) -> set:
    seen = {start}
    stack = [start]
    while stack:
        a = stack.pop()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return seen


def _validate_family(spec: ModelSpec, tol: float) -> None:
    if not spec.start_states:
        raise ValueError("family spec must declare start states")
    # coarse mass certification; exact evaluators re-enumerate at spec.eps_tail
    eps_val = max(spec.eps_tail, 1e-4)
    for s in spec.start_states:
        row = spec.row_fn(s)
        atoms = row.enumerate(eps_val)
        total = sum(float(p) for _s, p, _k in atoms)
        defect = row.tail_defect(eps_val)
        if not (1.0 - tol - defect - 1e-9 <= total <= 1.0 + tol):
            raise NotStochastic(
                f"family row at {s!r}: enumerated mass {total} with tail bound {defect}"
            )


def _stationary_finite(spec: ModelSpec, tol: float) -> StationaryLaw:
    states = spec.states
    n = len(states)
    all_rational = all(
        isinstance(p, (int, Fraction))
        for out in spec.transitions.values()
        for p in out.values()
    )
    if all_rational:
        pi = _solve_rational(spec)
        mapping = {s: pi[s] for s in states}
        resid = _residual(spec, mapping)
        return StationaryLaw(mapping={s: float(pi[s]) for s in states}, residual=resid, exact=pi)
    # damped power iteration; the 1/2 lazy step handles periodic chains
    index = {s: k for k, s in enumerate(states)}
    P = np.zeros((n, n))
    for a, out in spec.transitions.items():
        for b, p in out.items():
            P[index[a], index[b]] = float(p)
    v = np.full(n, 1.0 / n)
    for it in range(500_000):
        w = 0.5 * (v + v @ P)
        w /= w.sum()
        v = w
        if it % 16 == 15:
            resid = float(np.max(np.abs(v @ P - v)))
            if resid < tol:
                break
    else:
        raise RuntimeError(f"power iteration did not reach residual {tol}")
    mapping = {s: float(v[index[s]]) for s in states}
    return StationaryLaw(mapping=mapping, residual=resid)


def _solve_rational(spec: ModelSpec) -> dict:
    """Exact solve of pi P = pi, sum(pi) = 1 by Gaussian elimination."""
    states = spec.states
    n = len(states)
    index = {s: k for k, s in enumerate(states)}
    # rows 0..n-2: (P^T - I) pi = 0 ; row n-1: sum pi = 1
    A = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    for a, out in spec.transitions.items():
        ia = index[a]
        for s, p in out.items():
            js = index[s]
            if js < n - 1:
                A[js][ia] += Fraction(p)
    for j in range(n - 1):
        A[j][j] -= 1
    A[n - 1] = [Fraction(1)] * n
    b[n - 1] = Fraction(1)
    piv_rows = list(range(n))
    for col in range(n):
        pr = next((r for r in range(col, n) if A[piv_rows[r]][col] != 0), None)
        if pr is None:
            raise Reducible("singular stationary system (chain not irreducible?)")
        piv_rows[col], piv_rows[pr] = piv_rows[pr], piv_rows[col]
        prow = piv_rows[col]
        inv = 1 / A[prow][col]
        A[prow] = [x * inv for x in A[prow]]
        b[prow] *= inv
        for r in range(n):
            row = piv_rows[r]
            if row != prow and A[row][col] != 0:
                f = A[row][col]
                A[row] = [x - f * y for x, y in zip(A[row], A[prow])]
                b[row] -= f * b[prow]
    pi = {states[c]: b[piv_rows[c]] for c in range(n)}
    if any(v <= 0 for v in pi.values()):
        raise Reducible("stationary solve produced nonpositive mass")
    return pi


def _residual(spec: ModelSpec, mapping: dict) -> float:
    out_mass: dict = {s: 0.0 for s in spec.states}
    for a, out in spec.transitions.items():
        for b, p in out.items():
            out_mass[b] += mapping[a] * float(p)
    return max(abs(out_mass[s] - mapping[s]) for s in spec.states)


# ---------------------------------------------------------------------------
# dual and simple transforms


def dual_model(model: Model, tol: float = 1e-12) -> Model:
    """Time reversal: transitions ``pi_j p_ji / pi_i``, kernels swapped edgewise."""
    factory = model.spec.meta.get("dual_factory")
    if factory is not None:
        return build_model(factory(model.spec), tol)
    if not model.finite:
        raise UnsupportedKernel("generic dual needs a finite model or a family dual factory")
    spec = model.spec
    states = spec.states
    exact_pi = model.stationary.exact
    transitions: dict = {s: {} for s in states}
    kernels: dict = {}
    for a, out in spec.transitions.items():
        for b, p in out.items():
            if float(p) <= 0:
                continue
            if exact_pi is not None and isinstance(p, (int, Fraction)):
                q = exact_pi[a] * Fraction(p) / exact_pi[b]
            else:
                q = model.pi(a) * float(p) / model.pi(b)
            transitions[b][a] = q
            kernels[(b, a)] = spec.kernels[(a, b)]
    if exact_pi is None:
        # power-iterated pi leaves O(residual / pi_min) defects; renormalize
        for s in states:
            total = sum(transitions[s].values())
            transitions[s] = {b: p / total for b, p in transitions[s].items()}
    dual_spec = ModelSpec(
        name=f"dual({spec.name})",
        states=list(states),
        transitions=transitions,
        kernels=kernels,
        parameters=dict(spec.parameters),
    )
    return build_model(dual_spec, tol)


def scale_model(model: Model, c: float, tol: float = 1e-12) -> Model:
    """Model with every increment multiplied by ``c`` (same driving chain)."""
    if c == 0:
        raise ValueError("scale must be nonzero")
    spec = model.spec
    if spec.finite:
        kernels = {e: scale_kernel(k, c) for e, k in spec.kernels.items()}
        new = ModelSpec(
            name=f"scale({spec.name},{c})",
            states=list(spec.states),
            transitions={a: dict(out) for a, out in spec.transitions.items()},
            kernels=kernels,
            parameters=dict(spec.parameters),
        )
        return build_model(new, tol)
    new = ModelSpec(
        name=f"scale({spec.name},{c})",
        row_fn=_ScaledRowFn(spec.row_fn, c),
        start_states=list(spec.start_states),
        stationary_fn=spec.stationary_fn,
        eps_tail=spec.eps_tail,
        parameters=dict(spec.parameters),
        meta={k: v for k, v in spec.meta.items() if k != "dual_factory"},
    )
    return build_model(new, tol)


def negate_model(model: Model, tol: float = 1e-12) -> Model:
    """Reflection: all increments negated."""
    return scale_model(model, -1.0, tol)


class _ScaledRowFn:
    def __init__(self, inner: Callable, c: float):
        self.inner = inner
        self.c = c

    def __call__(self, state) -> Row:
        row = self.inner(state)
        if isinstance(row, FiniteRow):
            return FiniteRow(row.succ, row.probs, [scale_kernel(k, self.c) for k in row.kernels])
        return LawRow(row.law, row.state_of, _ScaledKernelOf(row.kernel_of, self.c))


class _ScaledKernelOf:
    def __init__(self, inner: Callable, c: float):
        self.inner = inner
        self.c = c

    def __call__(self, i) -> Kernel:
        return scale_kernel(self.inner(i), self.c)


# ---------------------------------------------------------------------------
# spec files (JSON; schema documented in the README)


def load_spec(path: str) -> ModelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return spec_from_dict(payload)


def spec_from_dict(payload: dict) -> ModelSpec:
    if "family" in payload:
        from . import zoo  # deferred; zoo depends on this module

        fam = payload["family"]
        return zoo.family_spec(fam["name"], fam.get("params", {}))
    try:
        states = list(payload["states"])
        transitions = {}
        for a, out in payload["transitions"].items():
            key = _parse_state(a, states)
            transitions[key] = {
                _parse_state(b, states): _parse_real(p) for b, p in out.items()
            }
        kernels = {}
        for edge, kern in payload["kernels"].items():
            a, b = (x.strip() for x in edge.split("->"))
            kernels[(_parse_state(a, states), _parse_state(b, states))] = kernel_from_dict(kern)
    except (KeyError, ValueError, AttributeError) as exc:
        raise ValueError(f"malformed model spec: {exc}") from exc
    return ModelSpec(
        name=payload.get("name", "unnamed"),
        states=states,
        transitions=transitions,
        kernels=kernels,
        parameters=payload.get("parameters", {}),
    )


def save_spec(spec: ModelSpec, path: str) -> None:
    if not spec.finite:
        raise ValueError("only finite specs serialize to the table format")
    payload = {
        "name": spec.name,
        "states": spec.states,
        "transitions": {
            str(a): {str(b): _real_to_json(p) for b, p in out.items()}
            for a, out in spec.transitions.items()
        },
        "kernels": {
            f"{a}->{b}": kernel_to_dict(k) for (a, b), k in spec.kernels.items()
        },
        "parameters": spec.parameters,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def _parse_state(token, states: list):
    if token in states:
        return token
    try:
        as_int = int(token)
    except (TypeError, ValueError):
        return token
    return as_int if as_int in states else token
