"""Analytic functionals: truncated means, the J-function family, excursion
measures, moment functionals with divergence diagnostics, weighted occupation
series, and the structural identities (occupation formula, stationary drift,
duality).

Everything exists in two routes wherever the contracts ask for it: an exact
route (atom enumeration, taboo-matrix algebra, regenerative convolution) and
an empirical route (cycle pools and stopping-time samples from campaigns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .kernels import DiscreteKernel, PointMass, UnsupportedKernel
from .model import Model, dual_model
from .simulate import CycleStats
from .zoo import FlowerStructure

__all__ = [
    "LatticeBlowup",
    "NotPositiveDivergent",
    "EmptySample",
    "TruncatedMeanTable",
    "truncated_means",
    "JFunction",
    "eval_J",
    "ExcursionMeasure",
    "excursion_measure",
    "MomentEstimate",
    "moment_functional",
    "ExactLaw",
    "exact_distribution_Sn",
    "spitzer_series",
    "SpitzerResult",
    "identity_checks",
    "IdentityReport",
    "harmonic_renewal_check",
    "taboo_visits",
    "stationary_increment_atoms",
    "exact_return_law",
]


class LatticeBlowup(Exception):
    """The exact DP exceeded its atom guard."""


class NotPositiveDivergent(Exception):
    """Advisory: the harmonic-renewal comparison needs a positive divergent walk."""


class EmptySample(Exception):
    pass


class IncompatibleAnchor(Exception):
    pass


# ---------------------------------------------------------------------------
# truncated means and the J family


@dataclass
class TruncatedMeanTable:
    anchor: object
    grid: np.ndarray
    e_plus: np.ndarray  # E(S^+ ^ x)
    e_minus: np.ndarray  # E(S^- ^ x)
    source: str  # "exact" or "empirical(n)"
    top_k: int = 8

    @property
    def a_values(self) -> np.ndarray:
        return self.e_plus - self.e_minus

    def ultimately_positive(self) -> bool:
        """A(x) > 0 on the top K grid points (reported, not asserted)."""
        k = min(self.top_k, len(self.grid))
        return bool(np.all(self.a_values[-k:] > 0))


def truncated_means(
    source: Union[np.ndarray, Sequence[tuple]],
    grid: Sequence[float],
    anchor=None,
    exact: bool = False,
) -> TruncatedMeanTable:
    """Table of E(S^+ ^ x) and A(x) over a grid, from samples or an atom law."""
    grid = np.asarray(sorted(float(g) for g in grid))
    if exact:
        atoms = [(float(v), float(p)) for v, p in source]
        if not atoms:
            raise EmptySample("empty atom law")
        vals = np.array([v for v, _ in atoms])
        probs = np.array([p for _, p in atoms])
        e_plus = np.array(
            [float(np.sum(probs * np.minimum(np.maximum(vals, 0.0), x))) for x in grid]
        )
        e_minus = np.array(
            [float(np.sum(probs * np.minimum(np.maximum(-vals, 0.0), x))) for x in grid]
        )
        return TruncatedMeanTable(anchor, grid, e_plus, e_minus, "exact")
    samples = np.asarray(source, dtype=float)
    if samples.size == 0:
        raise EmptySample("empty sample pool")
    pos = np.maximum(samples, 0.0)
    neg = np.maximum(-samples, 0.0)
    e_plus = np.array([float(np.minimum(pos, x).mean()) for x in grid])
    e_minus = np.array([float(np.minimum(neg, x).mean()) for x in grid])
    return TruncatedMeanTable(anchor, grid, e_plus, e_minus, f"empirical({samples.size})")


class JFunction:
    """x / [E(S^+ ^ x)]^gamma with the degenerate branches pinned.

    Backed either by the full sample / atom law (denominator evaluated
    directly) or by a grid table (denominator linearly interpolated, which is
    exact between the atoms of a discrete law).
    """

    def __init__(
        self,
        anchor=None,
        gamma: float = 1.0,
        samples: Optional[np.ndarray] = None,
        atoms: Optional[Sequence[tuple]] = None,
        table: Optional[TruncatedMeanTable] = None,
    ):
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        self.anchor = anchor
        self.gamma = float(gamma)
        self._sorted = None
        self._csum = None
        self._weights = None
        self.table = table
        if samples is not None:
            pos = np.maximum(np.asarray(samples, dtype=float), 0.0)
            self.p_pos = float((pos > 0).mean())
            self._sorted = np.sort(pos)
            self._weights = np.full(len(pos), 1.0 / len(pos))
            self._csum = np.concatenate([[0.0], np.cumsum(self._sorted) / len(pos)])
            self._wsum = np.concatenate([[0.0], np.cumsum(self._weights)])
        elif atoms is not None:
            vals = np.array([float(v) for v, _ in atoms])
            probs = np.array([float(p) for _, p in atoms])
            self.p_pos = float(probs[vals > 0].sum())
            order = np.argsort(np.maximum(vals, 0.0))
            pos = np.maximum(vals, 0.0)[order]
            w = probs[order]
            self._sorted = pos
            self._weights = w
            self._csum = np.concatenate([[0.0], np.cumsum(pos * w)])
            self._wsum = np.concatenate([[0.0], np.cumsum(w)])
        elif table is not None:
            self.p_pos = float(table.e_plus[-1] > 0)
        else:
            raise ValueError("need samples, atoms, or a table")

    def denominator(self, x: np.ndarray) -> np.ndarray:
        # E(min(S^+, x)) = sum_{s <= x} s w(s) + x * P(S^+ > x), via prefix sums
        if self._sorted is not None:
            idx = np.searchsorted(self._sorted, x, side="right")
            total_w = self._wsum[-1]
            return self._csum[idx] + x * (total_w - self._wsum[idx])
        t = self.table
        out = np.interp(x, t.grid, t.e_plus)
        # beyond the grid: continue with the last chord's slope
        if len(t.grid) >= 2:
            slope = (t.e_plus[-1] - t.e_plus[-2]) / (t.grid[-1] - t.grid[-2])
        else:
            slope = 0.0
        above = x > t.grid[-1]
        out[above] = t.e_plus[-1] + slope * (x[above] - t.grid[-1])
        return out

    def __call__(self, x) -> np.ndarray:
        scalar = np.isscalar(x)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs < 0):
            raise ValueError("J is defined on x >= 0")
        out = np.empty_like(xs)
        zero = xs == 0.0
        out[zero] = 1.0
        pos = ~zero
        if self.p_pos <= 0.0:
            out[pos] = xs[pos]
        else:
            den = self.denominator(xs[pos])
            out[pos] = xs[pos] / np.power(den, self.gamma)
        return float(out[0]) if scalar else out


def eval_J(jf: JFunction, x) -> float:
    """J evaluated with the exact branch rules (J(0) = 1, degenerate -> x)."""
    return jf(x)


# ---------------------------------------------------------------------------
# excursion measures


@dataclass
class ExcursionMeasure:
    anchor: object
    alpha: float
    grid: np.ndarray
    tail: np.ndarray  # V^alpha((x, inf)) estimates
    se: np.ndarray
    n_cycles: int
    source: str

    def sandwich_holds(self, cycles: CycleStats) -> bool:
        """Pathwise-consistent check P(D > x) <= V <= E tau^alpha 1{D > x}."""
        for k, x in enumerate(self.grid):
            ind = (cycles.d_max > x).astype(float)
            lower = float(ind.mean())
            upper = float((cycles.lengths.astype(float) ** self.alpha * ind).mean())
            if not (lower - 1e-12 <= self.tail[k] <= upper + 1e-12):
                return False
        return True


def excursion_measure(
    cycles: CycleStats, alpha: float, grid: Sequence[float]
) -> ExcursionMeasure:
    """Empirical tails of the alpha-th moment of the within-cycle drawdown
    count, evaluated on a grid."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if cycles.n_cycles == 0:
        raise EmptySample("no complete cycles")
    grid = np.asarray(sorted(float(g) for g in grid))
    tails, ses = [], []
    for x in grid:
        counts = cycles.drop_counts(x).astype(float)
        vals = counts**alpha
        tails.append(float(vals.mean()))
        ses.append(float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0)
    return ExcursionMeasure(
        cycles.anchor, alpha, grid, np.array(tails), np.array(ses),
        cycles.n_cycles, f"empirical({cycles.n_cycles})",
    )


def flower_v_tail_exact(model: Model, alpha: float, x: float, cap: int = 200_000):
    """Closed-form / certified-enumeration V^alpha tail for flower chains.

    Returns (value, residual_bound) or None when the model carries no
    regenerative structure or the series cannot be certified within ``cap``.
    """
    structure: Optional[FlowerStructure] = model.spec.meta.get("spitzer")
    if structure is None:
        return None
    name = model.spec.parameters.get("variant", "")
    if model.name == "petal-flower" or name == "plain":
        # one drawdown per cycle: V^alpha((x,inf)) = P(dip > x) for every alpha
        return structure.phi(1, -x - 1e-12) if x >= 0 else 1.0, 0.0
    if name == "xlogx":
        # count(x) = (chi - 1) 1{chi - 1 > x}
        total, m = 0.0, 2
        while m < cap:
            pm = structure.length_pmf(m)
            if m - 1 > x:
                total += (m - 1) ** alpha * pm
            tail = structure.length_tail(m)
            if tail * (m**alpha) < 1e-10 and tail < 1e-12:
                return total, tail * (m**alpha)
            m += 1
        return None
    return None


# ---------------------------------------------------------------------------
# moment functionals with divergence diagnostics


@dataclass
class MomentEstimate:
    kind: str
    estimate: float
    se: float
    n: int
    top_share: float
    running_drift: float
    dyadic_means: list
    divergent: bool
    censored: int = 0
    tail_slope: Optional[float] = None

    def status(
        self,
        stable_drift: float = 0.05,
        fail_drift: float = 0.25,
        fail_share: float = 0.6,
        ceiling: float = 0.0,
        max_censored_frac: float = 0.005,
    ) -> str:
        """Three-valued verdict: "holds", "fails", or "inconclusive"."""
        if self.n == 0:
            return "inconclusive"
        if self.censored > max_censored_frac * self.n:
            return "inconclusive"
        if not self.divergent and self.running_drift <= stable_drift:
            return "holds"
        if (
            self.divergent
            and self.running_drift >= fail_drift
            and self.top_share >= fail_share
            and self.estimate >= ceiling
        ):
            return "fails"
        return "inconclusive"


def estimate_from_summands(
    kind: str,
    summands: np.ndarray,
    censored: int = 0,
    top_frac: float = 0.01,
    share_threshold: float = 0.5,
) -> MomentEstimate:
    """Summands must be nonnegative; the divergence flag fires when the top
    ``top_frac`` of them carries more than ``share_threshold`` of the total."""
    vals = np.asarray(summands, dtype=float)
    n = len(vals)
    if n == 0:
        return MomentEstimate(kind, math.nan, math.nan, 0, 0.0, 0.0, [], False, censored)
    had_inf = bool(np.any(~np.isfinite(vals)))
    vals = np.clip(np.nan_to_num(vals, nan=0.0, posinf=1e300, neginf=0.0), 0.0, 1e300)
    est = float(vals.mean())
    with np.errstate(over="ignore", invalid="ignore"):
        se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    if not math.isfinite(se):
        se = math.inf
    total = float(vals.sum())
    k = max(1, int(math.ceil(top_frac * n)))
    top = np.partition(vals, n - k)[n - k :]
    top_share = float(top.sum() / total) if total > 0 else 0.0
    half = float(vals[: n // 2].mean()) if n >= 2 else est
    drift = abs(est - half) / (abs(est) + 1e-300)
    dyads = []
    m = 1
    while m <= n:
        dyads.append(float(vals[:m].mean()))
        m *= 2
    if dyads and m // 2 != n:
        dyads.append(est)
    slope = None
    if n >= 200 and total > 0:
        q95 = float(np.quantile(vals, 0.95))
        upper = vals[vals > max(q95, 1e-300)]
        if len(upper) >= 10 and q95 > 0:
            slope = float(1.0 / np.mean(np.log(upper / q95)))
    return MomentEstimate(
        kind, est, se, n, top_share, drift,
        dyads, had_inf or top_share > share_threshold, censored, slope,
    )


def _stieltjes_weights(m: int, alpha: float) -> np.ndarray:
    """Jumps of count^alpha as the level crosses the sorted drawdowns."""
    j = np.arange(1, m + 1, dtype=float)
    return (m - j + 1.0) ** alpha - (m - j) ** alpha


def moment_functional(
    kind: str,
    cycles: CycleStats,
    jf: Optional[JFunction] = None,
    alpha: float = 1.0,
) -> MomentEstimate:
    """Per-cycle moment functionals of the fluctuation criteria.

    Kinds: ``E_J_D``, ``E_J_D_pow``, ``E_J_Sneg_pow``, ``E_Dalpha_J_D``,
    ``int_Jalpha_dV``, ``int_J_dValpha``, ``int_logJ_dV``, ``E_tau_pow``,
    ``E_abs_cycle_sum``, ``E_pos_cycle_sum``, ``E_neg_cycle_sum``.
    Integral kinds are pathwise Stieltjes sums against each cycle's drawdown
    count process, so they are unbiased under the cycle law.
    """
    if cycles.n_cycles == 0:
        raise EmptySample("no complete cycles")
    if jf is not None and jf.anchor is not None and jf.anchor != cycles.anchor:
        raise IncompatibleAnchor(f"{jf.anchor!r} vs {cycles.anchor!r}")
    d = cycles.d_max
    if kind == "E_J_D":
        return estimate_from_summands(kind, jf(d))
    if kind == "E_J_D_pow":
        return estimate_from_summands(kind, jf(d) ** (1.0 + alpha))
    if kind == "E_J_Sneg_pow":
        sneg = np.maximum(-cycles.sums, 0.0)
        return estimate_from_summands(kind, jf(sneg) ** (1.0 + alpha))
    if kind == "E_Dalpha_J_D":
        return estimate_from_summands(kind, d**alpha * jf(d))
    if kind == "E_tau_pow":
        return estimate_from_summands(kind, cycles.lengths.astype(float) ** (1.0 + alpha))
    if kind == "E_tau_logtau":
        t = cycles.lengths.astype(float)
        return estimate_from_summands(kind, t * np.log(np.maximum(t, 1.0)))
    if kind == "E_abs_cycle_sum":
        return estimate_from_summands(kind, np.abs(cycles.sums))
    if kind == "E_pos_cycle_sum":
        return estimate_from_summands(kind, cycles.pos_sums)
    if kind == "E_neg_cycle_sum":
        return estimate_from_summands(kind, cycles.neg_sums)
    if kind in ("int_Jalpha_dV", "int_J_dValpha", "int_logJ_dV"):
        vals = np.zeros(cycles.n_cycles)
        ptr = cycles.drops_indptr
        for c in range(cycles.n_cycles):
            drops = cycles.drops[ptr[c] : ptr[c + 1]]
            if len(drops) == 0:
                continue
            if kind == "int_Jalpha_dV":
                vals[c] = float(np.sum(jf(drops) ** alpha))
            elif kind == "int_logJ_dV":
                vals[c] = float(np.sum(np.log(np.maximum(jf(drops), 1.0))))
            else:
                srt = np.sort(drops)
                w = _stieltjes_weights(len(srt), alpha)
                vals[c] = float(np.sum(jf(srt) * w))
        return estimate_from_summands(kind, vals)
    raise ValueError(f"unknown moment kind {kind!r}")


def moment_of_samples(
    kind: str, values: np.ndarray, power: float, censored_mask: Optional[np.ndarray] = None
) -> MomentEstimate:
    """Moment of stopping-time samples; censored entries are excluded from the
    summands but counted, so estimates are reported as lower bounds."""
    vals = np.asarray(values, dtype=float)
    if censored_mask is not None:
        cens = int(np.sum(censored_mask))
        vals = vals[~np.asarray(censored_mask, dtype=bool)]
    else:
        cens = 0
    vals = vals[np.isfinite(vals)]
    return estimate_from_summands(kind, np.abs(vals) ** power, censored=cens)


# ---------------------------------------------------------------------------
# exact joint distribution of (M_n, S_n)


@dataclass
class ExactLaw:
    joint: dict  # (state, value) -> prob
    n: int
    defect: float  # mass lost to certified row truncation

    def state_marginal(self) -> dict:
        out: dict = {}
        for (s, _v), p in self.joint.items():
            out[s] = out.get(s, 0) + p
        return out

    def sum_atoms(self) -> list:
        out: dict = {}
        for (_s, v), p in self.joint.items():
            out[v] = out.get(v, 0) + p
        return sorted(out.items(), key=lambda kv: float(kv[0]))

    def prob_sum_le(self, x: float) -> float:
        return float(sum(float(p) for (_s, v), p in self.joint.items() if float(v) <= x))

    def total(self) -> float:
        return float(sum(float(p) for p in self.joint.values()))


def exact_distribution_Sn(
    model: Model,
    start,
    n: int,
    eps_tail: Optional[float] = None,
    guard: int = 10_000_000,
) -> ExactLaw:
    """Forward dynamic program over (state, accumulated sum) pairs.

    Exact for finite-discrete/point-mass kernels; rows of infinite families
    are enumerated to the certified tail and the lost mass is reported in
    ``defect``.  Raises :class:`LatticeBlowup` past ``guard`` atoms and
    :class:`UnsupportedKernel` on parametric kernels.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    eps = model.spec.eps_tail if eps_tail is None else eps_tail
    zero = Fraction(0) if model.rational else 0.0
    current: dict = {(start, zero if model.rational else 0.0): Fraction(1) if model.rational else 1.0}
    defect = 0.0
    for _step in range(n):
        nxt: dict = {}
        for (s, v), p in current.items():
            row = model.row(s)
            defect += float(p) * row.tail_defect(eps)
            for s2, q, kern in row.enumerate(eps):
                for a, pa in kern.atoms():
                    key = (s2, v + a)
                    w = p * q * pa
                    if key in nxt:
                        nxt[key] += w
                    else:
                        nxt[key] = w
        if len(nxt) > guard:
            raise LatticeBlowup(f"{len(nxt)} atoms exceeds guard {guard}")
        current = nxt
    return ExactLaw(current, n, defect)


# ---------------------------------------------------------------------------
# weighted occupation series (Spitzer-type)


@dataclass
class SpitzerResult:
    x: float
    alpha: float
    n_max: int
    partial_sums: np.ndarray  # cumulative at n = 1..n_max
    probs: np.ndarray  # P(S_n <= x)
    mode: str
    defect: float

    @property
    def total(self) -> float:
        return float(self.partial_sums[-1])

    def dyadic_blocks(self) -> list:
        blocks = []
        lo = 1
        while lo <= self.n_max:
            hi = min(2 * lo, self.n_max)
            idx = np.arange(lo, hi + 1)
            w = idx.astype(float) ** (self.alpha - 1.0)
            blocks.append(float(np.sum(w * self.probs[idx - 1])))
            if hi == self.n_max:
                break
            lo = hi + 1
        return blocks

    def cauchy_pass(self) -> bool:
        """Advisory convergence call: trailing dyadic blocks must decay."""
        b = self.dyadic_blocks()
        if len(b) < 4:
            return False
        last, prev, prev2 = b[-1], b[-2], b[-3]
        top = max(b)
        if top <= 0:
            return True
        return last < 0.1 * top and last <= prev * 0.75 + 1e-12 and prev <= prev2 + 1e-12


def spitzer_series(
    model: Model,
    start,
    x: float,
    alpha: float,
    n_max: int,
    mode: str = "exact",
    eps_tail: Optional[float] = None,
    guard: int = 2_000_000,
    campaign=None,
) -> SpitzerResult:
    """Partial sums of sum_n n^(alpha-1) P(S_n <= x).

    Exact mode uses the stepwise DP for enumerable models, or the
    regenerative convolution engine for flower families with constant cycle
    sums.  MC mode averages indicator sums over campaign paths.
    """
    if mode == "mc":
        if campaign is None or campaign.stopping is None:
            raise ValueError("mc mode needs a campaign with stopping collection")
        raise NotImplementedError("use spitzer_series_mc on raw paths")
    structure = model.spec.meta.get("spitzer")
    if not model.finite and structure is not None:
        if start != model.spec.meta.get("anchor", start):
            raise ValueError("regenerative engine evaluates at the anchor state")
        probs = _spitzer_regenerative(structure, x, n_max)
        return _finish_spitzer(x, alpha, n_max, probs, "exact-regenerative", 0.0)
    # stepwise DP
    eps = model.spec.eps_tail if eps_tail is None else eps_tail
    current = {(start, 0.0): 1.0}
    defect = 0.0
    probs = np.zeros(n_max)
    for step in range(1, n_max + 1):
        nxt: dict = {}
        for (s, v), p in current.items():
            row = model.row(s)
            defect += p * row.tail_defect(eps)
            for s2, q, kern in row.enumerate(eps):
                fq = float(q)
                for a, pa in kern.atoms():
                    key = (s2, v + float(a))
                    w = p * fq * float(pa)
                    if key in nxt:
                        nxt[key] += w
                    else:
                        nxt[key] = w
        if len(nxt) > guard:
            raise LatticeBlowup(f"{len(nxt)} atoms exceeds guard {guard} at step {step}")
        current = nxt
        probs[step - 1] = sum(p for (_s, v), p in current.items() if v <= x)
    return _finish_spitzer(x, alpha, n_max, probs, "exact-dp", defect)


def spitzer_series_mc(
    model: Model, start, x: float, alpha: float, horizon: int, trials: int, seed: int
) -> SpitzerResult:
    """Monte Carlo estimate of the weighted occupation series."""
    from .simulate import run_trajectory
    from ._seeds import trial_seed

    probs = np.zeros(horizon)
    for t in range(trials):
        traj = run_trajectory(model, start, horizon, trial_seed(seed, t))
        probs += (traj.partial_sums[1:] <= x).astype(float)
    probs /= trials
    return _finish_spitzer(x, alpha, horizon, probs, f"mc({trials})", 0.0)


def _finish_spitzer(x, alpha, n_max, probs, mode, defect) -> SpitzerResult:
    idx = np.arange(1, n_max + 1, dtype=float)
    terms = idx ** (alpha - 1.0) * probs
    return SpitzerResult(x, alpha, n_max, np.cumsum(terms), probs, mode, defect)


def _spitzer_regenerative(structure: FlowerStructure, x: float, n_max: int) -> np.ndarray:
    """P(S_n <= x) for n = 1..n_max from the renewal structure of a flower
    chain with constant cycle sum, exact up to float rounding."""
    N = n_max
    s = structure.cycle_sum
    f = np.zeros(N + 1)
    for m in range(1, N + 1):
        f[m] = structure.length_pmf(m)
    cols = [np.zeros(N + 1)]
    cols[0][0] = 1.0
    while True:
        prev = cols[-1]
        nxt = np.convolve(prev, f)[: N + 1]
        if not nxt.any():
            break
        cols.append(nxt)
        if len(cols) > N + 1:
            break
    U = np.stack(cols, axis=1)  # (N+1, J)
    J = U.shape[1]
    G = np.zeros((N + 1, J))
    for j in range(J):
        w = x - j * s
        for r in range(1, N + 1):
            G[r, j] = structure.phi(r, w)
    W = U @ G.T  # (N+1 times, N+1 lags)
    t_idx = np.add.outer(np.arange(N + 1), np.arange(N + 1))
    p_in = np.bincount(t_idx.ravel(), weights=W.ravel(), minlength=2 * N + 2)[: N + 1]
    j_ok = np.array([j * s <= x + 1e-12 for j in range(J)])
    at_anchor = U[:, j_ok].sum(axis=1) if j_ok.any() else np.zeros(N + 1)
    probs = (p_in + at_anchor)[1:]
    return np.minimum(probs, 1.0)


# ---------------------------------------------------------------------------
# taboo visits and the structural identities


def taboo_visits(model: Model, anchor) -> dict:
    """Expected visits to each state before the first return to ``anchor``,
    by solving the taboo linear system (exact over Fractions when rational).

    This is the oracle side of the occupation-formula check: it never uses
    the stationary law.
    """
    if not model.finite:
        raise UnsupportedKernel("taboo solve needs a finite model")
    states = model.states
    n = len(states)
    idx = model.index
    rational = model.rational and all(
        isinstance(p, (int, Fraction))
        for out in model.spec.transitions.values()
        for p in out.values()
    )
    if rational:
        # v = e_anchor + v P~ restricted to non-anchor columns
        A = [[Fraction(0)] * n for _ in range(n)]
        for a, out in model.spec.transitions.items():
            for b, p in out.items():
                if b != anchor:
                    A[idx[a]][idx[b]] = Fraction(p)
        # solve v (I - A) = e_anchor  ->  (I - A)^T v^T = e
        M = [[(1 if r == c else 0) - A[c][r] for c in range(n)] for r in range(n)]
        rhs = [Fraction(1) if states[r] == anchor else Fraction(0) for r in range(n)]
        sol = _solve_fraction(M, rhs)
        return {states[k]: sol[k] for k in range(n)}
    P = model.P.copy()
    P[:, idx[anchor]] = 0.0
    e = np.zeros(n)
    e[idx[anchor]] = 1.0
    v = np.linalg.solve(np.eye(n) - P.T, e)
    return {states[k]: float(v[k]) for k in range(n)}


def _solve_fraction(M: list, rhs: list) -> list:
    n = len(M)
    A = [row[:] + [rhs[r]] for r, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular taboo system")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[r][n] for r in range(n)]


def stationary_increment_atoms(model: Model) -> list:
    """Atoms of the stationary one-step increment law (finite models)."""
    if not model.finite:
        raise UnsupportedKernel("needs a finite model")
    exact_pi = model.stationary.exact
    out: dict = {}
    for (a, b), kern in model.spec.kernels.items():
        p_edge = model.spec.transitions[a][b]
        weight = (
            exact_pi[a] * Fraction(p_edge)
            if exact_pi is not None and isinstance(p_edge, (int, Fraction))
            else model.pi(a) * float(p_edge)
        )
        for v, pa in kern.atoms():
            out[v] = out.get(v, 0) + weight * pa
    return sorted(out.items(), key=lambda kv: float(kv[0]))


@dataclass
class IdentityReport:
    mode: str
    occupation: list  # (fn name, max abs residual over anchors)
    drift_residual: float
    duality_prob_residual: Optional[float]
    duality_kernel_residual: Optional[float]
    tol: float

    def ok(self) -> bool:
        checks = [r for _n, r in self.occupation] + [self.drift_residual]
        if self.duality_prob_residual is not None:
            checks.append(self.duality_prob_residual)
        if self.duality_kernel_residual is not None:
            checks.append(self.duality_kernel_residual)
        return all(r < self.tol for r in checks)


class _Battery:
    """Test functions f(state, x) for the occupation identity, built to stay
    exact under Fraction arithmetic."""

    @staticmethod
    def functions(model: Model) -> list:
        fns = [
            ("one", lambda s, x: 1),
            ("x", lambda s, x: x),
            ("abs_x", lambda s, x: abs(x)),
            ("x_plus_cap1", lambda s, x: min(max(x, 0), 1)),
            ("x_minus_cap2", lambda s, x: min(max(-x, 0), 2)),
            ("ind_x_le_0", lambda s, x: 1 if x <= 0 else 0),
        ]
        for j in model.states[: min(len(model.states), 6)]:
            fns.append((f"ind_state_{j!r}", _StateIndicator(j)))
        return fns


class _StateIndicator:
    def __init__(self, j):
        self.j = j

    def __call__(self, s, x):
        return 1 if s == self.j else 0


def identity_checks(
    model: Model, tol: float = 1e-10, n_dual: int = 4, anchors: Optional[list] = None
) -> IdentityReport:
    """Exact verification of the occupation formula, the stationary drift
    identity, and the duality relation on a finite atom-kernel model."""
    if not model.finite:
        raise UnsupportedKernel("identity checks need a finite model")
    if not model.exact_kernels:
        raise UnsupportedKernel("identity checks need atom kernels")
    states = model.states
    anchors = anchors or states
    exact_pi = model.stationary.exact

    def pi_of(s):
        return exact_pi[s] if exact_pi is not None else model.pi(s)

    def edge_mean(f, a, b):
        kern = model.spec.kernels[(a, b)]
        return sum(f(b, v) * pa for v, pa in kern.atoms())

    occ_res = []
    drift_res = 0.0
    fns = _Battery.functions(model)
    visits = {i: taboo_visits(model, i) for i in anchors}
    for name, f in fns:
        lhs = sum(
            pi_of(a) * p * edge_mean(f, a, b)
            for a, out in model.spec.transitions.items()
            for b, p in out.items()
            if float(p) > 0
        )
        worst = 0.0
        for i in anchors:
            v = visits[i]
            rhs = pi_of(i) * sum(
                v[a] * p * edge_mean(f, a, b)
                for a, out in model.spec.transitions.items()
                for b, p in out.items()
                if float(p) > 0
            )
            worst = max(worst, abs(float(lhs - rhs)))
        occ_res.append((name, worst))
        if name == "x":
            drift_res = worst
    dual = dual_model(model)
    prob_res, kern_res = _duality_paths(model, dual, n_dual)
    return IdentityReport("exact", occ_res, drift_res, prob_res, kern_res, tol)


def _duality_paths(model: Model, dual: Model, n_dual: int) -> tuple:
    states = model.states
    prob_res = 0.0
    kern_res = 0.0
    # kernel swap: dual kernel on (b, a) must equal the original on (a, b)
    for (a, b), kern in model.spec.kernels.items():
        dk = dual.spec.kernels.get((b, a))
        if dk is None:
            kern_res = math.inf
            continue
        av = sorted(((float(v), float(p)) for v, p in kern.atoms()))
        bv = sorted(((float(v), float(p)) for v, p in dk.atoms()))
        if len(av) != len(bv):
            kern_res = math.inf
            continue
        for (v1, p1), (v2, p2) in zip(av, bv):
            kern_res = max(kern_res, abs(v1 - v2), abs(p1 - p2))
    for n in range(1, n_dual + 1):
        paths = [(s,) for s in states]
        for _ in range(n):
            paths = [
                p + (b,)
                for p in paths
                for b in model.spec.transitions.get(p[-1], {})
                if float(model.spec.transitions[p[-1]][b]) > 0
            ]
        for path in paths:
            lhs = model.pi(path[0])
            for a, b in zip(path, path[1:]):
                lhs *= float(model.spec.transitions[a][b])
            rhs = dual.pi(path[-1])
            rev = path[::-1]
            for a, b in zip(rev, rev[1:]):
                rhs *= float(dual.spec.transitions.get(a, {}).get(b, 0.0))
            prob_res = max(prob_res, abs(lhs - rhs))
    return prob_res, kern_res


def identity_checks_mc(
    model: Model, cycles: CycleStats, anchor, tol_se: float = 4.0
) -> dict:
    """MC variant of the occupation identity from a cycle pool: compares the
    per-cycle occupation estimate of E_pi|X_1| and E_pi X_1 against direct
    stationary sampling is not available here, so both sides come from the
    pool (reported with standard errors, no hard pass/fail)."""
    if cycles.n_cycles == 0:
        raise EmptySample("no cycles")
    mean_len = float(cycles.lengths.mean())
    out = {
        "E_pi_absX": float((cycles.pos_sums + cycles.neg_sums).mean() / mean_len),
        "E_pi_X": float(cycles.sums.mean() / mean_len),
        "pi_anchor_kac": 1.0 / mean_len,
        "n_cycles": cycles.n_cycles,
    }
    return out


# ---------------------------------------------------------------------------
# harmonic renewal comparison for single-state walks


@dataclass
class HarmonicRenewalReport:
    y_grid: np.ndarray
    renewal_sums: np.ndarray  # sum_n P(0 <= S_n <= y)
    j_values: np.ndarray
    ratios: np.ndarray
    n_max: int
    bounded: bool
    bound: float


def harmonic_renewal_check(
    model: Model,
    y_grid: Sequence[float],
    n_max: int = 2000,
    ratio_bound: float = 10.0,
    force: bool = False,
) -> HarmonicRenewalReport:
    """Ratio of the renewal mass sum_n P(0 <= S_n <= y) to J(y) on a grid,
    for a single-state (ordinary walk) model with integer atoms."""
    if not model.finite or len(model.states) != 1:
        raise ValueError("harmonic renewal check needs a single-state model")
    kern = model.spec.kernels[(model.states[0], model.states[0])]
    atoms = [(float(v), float(p)) for v, p in kern.atoms()]
    mean = sum(v * p for v, p in atoms)
    if mean <= 0 and not force:
        raise NotPositiveDivergent(f"drift {mean} <= 0")
    if any(v != int(v) for v, _ in atoms):
        raise UnsupportedKernel("integer-lattice kernel required")
    y_grid = np.asarray(sorted(float(y) for y in y_grid))
    shifts = [(int(v), p) for v, p in atoms]
    max_up = max(s for s, _ in shifts)
    max_dn = max(-min(s for s, _ in shifts), 0)
    lo, hi = -max_dn * n_max, max_up * n_max
    width = hi - lo + 1
    probs = np.zeros(width)
    probs[-lo] = 1.0
    sums = np.zeros(len(y_grid))
    offsets = np.arange(lo, hi + 1)
    in_range = {k: (offsets >= 0) & (offsets <= y) for k, y in enumerate(y_grid)}
    for _n in range(1, n_max + 1):
        nxt = np.zeros(width)
        for s, p in shifts:
            if s >= 0:
                nxt[s:] += p * probs[: width - s] if s else p * probs
            else:
                nxt[:s] += p * probs[-s:]
        probs = nxt
        for k in range(len(y_grid)):
            sums[k] += float(probs[in_range[k]].sum())
    jf = JFunction(anchor=model.states[0], gamma=1.0, atoms=atoms)
    jv = np.array([jf(y) for y in y_grid])
    ratios = sums / np.maximum(jv, 1e-300)
    top = ratios[y_grid >= y_grid[-1] / 10.0]
    bounded = bool(top.max() / max(top.min(), 1e-300) <= ratio_bound)
    return HarmonicRenewalReport(y_grid, sums, jv, ratios, n_max, bounded, ratio_bound)


# ---------------------------------------------------------------------------
# exact return-cycle law for small structured models


def exact_return_law(
    model: Model, anchor, max_len: int = 64, eps_tail: Optional[float] = None
) -> tuple[list, float]:
    """Atoms of (S_tau at the anchor) by path enumeration up to ``max_len``;
    returns (atoms, residual unreturned mass)."""
    eps = model.spec.eps_tail if eps_tail is None else eps_tail
    frontier: dict = {}
    returned: dict = {}
    row = model.row(anchor)
    for s2, q, kern in row.enumerate(eps):
        for a, pa in kern.atoms():
            key = (s2, a)
            target = returned if s2 == anchor else frontier
            target[key] = target.get(key, 0) + q * pa
    for _step in range(1, max_len):
        nxt: dict = {}
        for (s, v), p in frontier.items():
            row = model.row(s)
            for s2, q, kern in row.enumerate(eps):
                for a, pa in kern.atoms():
                    key = (s2, v + a)
                    if s2 == anchor:
                        returned[key] = returned.get(key, 0) + p * q * pa
                    else:
                        nxt[key] = nxt.get(key, 0) + p * q * pa
        frontier = nxt
        if not frontier:
            break
    atoms: dict = {}
    for (_s, v), p in returned.items():
        atoms[v] = atoms.get(v, 0) + p
    residual = float(sum(float(p) for p in frontier.values()))
    return sorted(atoms.items(), key=lambda kv: float(kv[0])), residual
