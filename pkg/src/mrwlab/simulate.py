"""Trajectory generation, cycle decomposition, stopping times, ladder
structures, and reproducible parallel campaigns.

Determinism contract: a trajectory is a pure function of
``(model, start, horizon, seed)``; campaign trial ``t`` uses the derived seed
``trial_seed(master, t)`` and aggregation folds results in trial order, so
campaign output is independent of the worker count.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._seeds import trial_seed
from .kernels import DiscreteKernel, PointMass
from .model import Model

__all__ = [
    "Trajectory",
    "CycleStats",
    "CensoredStat",
    "StoppingRecord",
    "LadderRecord",
    "run_trajectory",
    "cycle_decompose",
    "stopping_times",
    "ladder_process",
    "run_campaign",
    "CampaignResult",
    "sample_embedded_batch",
]


@dataclass
class Trajectory:
    """One simulated path; ``partial_sums[0] == 0`` and each later entry is
    the float left-fold of the stored increments."""

    start: object
    states: list
    increments: np.ndarray
    partial_sums: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.increments)


def run_trajectory(model: Model, start, horizon: int, seed: int) -> Trajectory:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rng = random.Random(seed)
    rand = rng.random
    row_of = model.row
    state = start
    states = [start]
    xs = []
    append_s = states.append
    append_x = xs.append
    for _ in range(horizon):
        state, x = row_of(state).step(rand(), rng)
        append_s(state)
        append_x(x)
    inc = np.asarray(xs, dtype=float)
    ps = np.empty(horizon + 1)
    ps[0] = 0.0
    np.cumsum(inc, out=ps[1:])
    return Trajectory(start, states, inc, ps)


# ---------------------------------------------------------------------------
# cycles


@dataclass
class CycleStats:
    """Per-return-cycle records at an anchor state.

    ``drops`` stores every positive within-cycle drawdown (S_k - S_cyclestart)^-
    flattened, with ``drops_indptr`` delimiting cycles, so excursion measures
    can be evaluated on any grid afterwards.
    """

    anchor: object
    lengths: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    sums: np.ndarray = field(default_factory=lambda: np.empty(0))
    d_max: np.ndarray = field(default_factory=lambda: np.empty(0))
    u_max: np.ndarray = field(default_factory=lambda: np.empty(0))
    h_max: np.ndarray = field(default_factory=lambda: np.empty(0))
    running_max: np.ndarray = field(default_factory=lambda: np.empty(0))
    pos_sums: np.ndarray = field(default_factory=lambda: np.empty(0))
    neg_sums: np.ndarray = field(default_factory=lambda: np.empty(0))
    drops: np.ndarray = field(default_factory=lambda: np.empty(0))
    drops_indptr: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    n_discarded_partial: int = 0

    @property
    def n_cycles(self) -> int:
        return len(self.lengths)

    def drop_counts(self, x: float) -> np.ndarray:
        """Per-cycle count of within-cycle epochs with drawdown > x."""
        if len(self.drops) == 0:
            return np.zeros(self.n_cycles, dtype=np.int64)
        flags = (self.drops > x).astype(np.int64)
        cum = np.concatenate([[0], np.cumsum(flags)])
        return cum[self.drops_indptr[1:]] - cum[self.drops_indptr[:-1]]

    @staticmethod
    def merge(parts: Sequence["CycleStats"]) -> "CycleStats":
        parts = [p for p in parts if p is not None]
        if not parts:
            raise ValueError("nothing to merge")
        anchor = parts[0].anchor
        out = CycleStats(anchor)
        out.lengths = np.concatenate([p.lengths for p in parts])
        out.sums = np.concatenate([p.sums for p in parts])
        out.d_max = np.concatenate([p.d_max for p in parts])
        out.u_max = np.concatenate([p.u_max for p in parts])
        out.h_max = np.concatenate([p.h_max for p in parts])
        out.running_max = np.concatenate([p.running_max for p in parts])
        out.pos_sums = np.concatenate([p.pos_sums for p in parts])
        out.neg_sums = np.concatenate([p.neg_sums for p in parts])
        out.drops = np.concatenate([p.drops for p in parts])
        ptr = [np.zeros(1, dtype=np.int64)]
        offset = 0
        for p in parts:
            ptr.append(p.drops_indptr[1:] + offset)
            offset += len(p.drops)
        out.drops_indptr = np.concatenate(ptr)
        out.n_discarded_partial = sum(p.n_discarded_partial for p in parts)
        return out


def cycle_decompose(traj: Trajectory, anchor) -> CycleStats:
    """Complete anchor-to-anchor cycles of a trajectory (trailing partial
    cycle discarded).  Empty result if the anchor is never revisited."""
    ps = traj.partial_sums
    times = [k for k, s in enumerate(traj.states) if s == anchor]
    stats = CycleStats(anchor)
    if len(times) < 2:
        stats.n_discarded_partial = 1 if times and times[-1] < traj.horizon else 0
        return stats
    t = np.asarray(times, dtype=np.int64)
    starts, ends = t[:-1], t[1:]
    ncyc = len(starts)
    stats.lengths = ends - starts
    stats.sums = ps[ends] - ps[starts]
    # consecutive anchor visits make the cycles contiguous in time
    body = ps[: ends[-1] + 1]
    mins = np.minimum.reduceat(body, starts + 1)
    maxs = np.maximum.reduceat(body, starts + 1)
    stats.d_max = np.maximum(0.0, ps[starts] - mins)
    stats.u_max = np.maximum(0.0, maxs - ps[starts])
    stats.h_max = np.maximum(0.0, maxs - ps[ends])
    stats.running_max = np.maximum.accumulate(ps)[ends]
    xs = traj.increments[: ends[-1]]
    stats.pos_sums = np.add.reduceat(np.maximum(xs, 0.0), starts)
    stats.neg_sums = np.add.reduceat(np.maximum(-xs, 0.0), starts)
    cyc_of = np.repeat(np.arange(ncyc), stats.lengths)
    rel = ps[np.arange(starts[0] + 1, ends[-1] + 1)] - ps[starts][cyc_of]
    neg = -rel
    keep = neg > 0
    stats.drops = neg[keep]
    offsets = np.concatenate([[0], np.cumsum(stats.lengths)[:-1]]).astype(np.int64)
    counts = np.add.reduceat(keep.astype(np.int64), offsets)
    stats.drops_indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    stats.n_discarded_partial = 1 if times[-1] < traj.horizon else 0
    return stats


# ---------------------------------------------------------------------------
# stopping times


@dataclass
class CensoredStat:
    value: float
    censored: bool
    horizon: int


@dataclass
class StoppingRecord:
    x: float
    sigma_gt: CensoredStat  # first passage over x
    sigma_le: CensoredStat  # first entry into (-inf, -x]
    s_at_sigma_le: float  # S at that epoch (nan if censored)
    rho: CensoredStat  # last exit from (-inf, x]
    n_occ: CensoredStat  # occupation count of (-inf, x]
    sigma_min: CensoredStat
    min_s: CensoredStat
    sigma_bar_gt: CensoredStat  # first passage over x after tau(M_0)
    tau_nu: CensoredStat  # first anchor return with embedded walk above x


def _first_true(mask: np.ndarray) -> int:
    idx = int(np.argmax(mask))
    return idx if mask[idx] else -1


def stopping_times(
    traj: Trajectory, x: float, certification_window: Optional[int] = None
) -> StoppingRecord:
    """All level-x stopping statistics of one path, horizon-censored.

    Infinite-time quantities (last exit, occupation count, minimum epoch) are
    marked uncensored only under the certification heuristic: the final
    window of the path stays above the level plus a drift-based margin.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    ps = traj.partial_sums
    H = traj.horizon
    M = certification_window or max(1, H // 4)
    tail = ps[H - M + 1 :]
    drift = ps[H] / H
    margin = max(0.0, drift * M / 2.0)

    def certified(level: float) -> bool:
        return bool(tail.min() > level + margin)

    body = ps[1:]
    i = _first_true(body > x)
    sigma_gt = CensoredStat(float(i + 1) if i >= 0 else float(H), i < 0, H)
    i = _first_true(body <= -x)
    sigma_le = CensoredStat(float(i + 1) if i >= 0 else float(H), i < 0, H)
    s_at = float(body[i]) if i >= 0 else float("nan")
    le_mask = ps <= x
    rho_val = int(np.max(np.nonzero(le_mask)[0])) if le_mask.any() else 0
    rho = CensoredStat(float(rho_val), not certified(x), H)
    n_occ = CensoredStat(float(int((body <= x).sum())), not certified(x), H)
    min_val = float(body.min())
    argmin = int(np.argmin(body)) + 1
    min_ok = certified(min_val)
    sigma_min = CensoredStat(float(argmin), not min_ok, H)
    min_s = CensoredStat(min_val, not min_ok, H)

    start = traj.start
    ret = -1
    for k in range(1, H + 1):
        if traj.states[k] == start:
            ret = k
            break
    if ret < 0:
        sigma_bar = CensoredStat(float(H), True, H)
    else:
        j = _first_true(body[ret:] > x)
        sigma_bar = CensoredStat(float(ret + j + 1) if j >= 0 else float(H), j < 0, H)
    t_nu = -1
    for k in range(1, H + 1):
        if traj.states[k] == start and ps[k] > x:
            t_nu = k
            break
    tau_nu = CensoredStat(float(t_nu) if t_nu > 0 else float(H), t_nu < 0, H)
    return StoppingRecord(
        x, sigma_gt, sigma_le, s_at, rho, n_occ, sigma_min, min_s, sigma_bar, tau_nu
    )


# ---------------------------------------------------------------------------
# ladders


@dataclass
class LadderRecord:
    sigma_gt_epochs: np.ndarray  # strictly ascending ladder epochs
    ladder_heights: np.ndarray
    ladder_states: list
    sigma_le_epochs: np.ndarray  # weakly descending ladder epochs
    return_times: np.ndarray  # tau_n(anchor)
    zeta: np.ndarray  # embedded strict-ladder indices
    tau_gt: np.ndarray  # tau^>_n = tau_{zeta_n}
    d_cycle: np.ndarray  # D_n at the anchor
    d_ladder: np.ndarray  # D^{i,>}_n between embedded ladder epochs
    sandwich_ok: bool


def ladder_process(traj: Trajectory, anchor) -> LadderRecord:
    ps = traj.partial_sums
    body = ps[1:]
    up_epochs, up_heights, up_states = [], [], []
    best = 0.0
    for k in range(1, traj.horizon + 1):
        if ps[k] > best:
            best = ps[k]
            up_epochs.append(k)
            up_heights.append(ps[k])
            up_states.append(traj.states[k])
    down_epochs = []
    low = 0.0
    for k in range(1, traj.horizon + 1):
        if ps[k] <= low:
            low = ps[k]
            down_epochs.append(k)
    cyc = cycle_decompose(traj, anchor)
    returns = np.asarray(
        [k for k, s in enumerate(traj.states) if s == anchor and k >= 1], dtype=np.int64
    )
    zeta, tau_gt = [], []
    best_emb = 0.0
    for n, t in enumerate(returns, start=1):
        if ps[t] > best_emb:
            best_emb = ps[t]
            zeta.append(n)
            tau_gt.append(t)
    d_ladder = []
    prev = 0
    for t in tau_gt:
        seg = ps[prev + 1 : t + 1]
        d_ladder.append(max(0.0, ps[prev] - seg.min()))
        prev = t
    sandwich = True
    if tau_gt and traj.states[0] == anchor and cyc.n_cycles >= zeta[0]:
        z1 = zeta[0]
        d1 = cyc.d_max[0]
        dl1 = d_ladder[0]
        sandwich = d1 - 1e-12 <= dl1 <= float(np.sum(cyc.d_max[:z1])) + 1e-12
    return LadderRecord(
        sigma_gt_epochs=np.asarray(up_epochs, dtype=np.int64),
        ladder_heights=np.asarray(up_heights),
        ladder_states=up_states,
        sigma_le_epochs=np.asarray(down_epochs, dtype=np.int64),
        return_times=returns,
        zeta=np.asarray(zeta, dtype=np.int64),
        tau_gt=np.asarray(tau_gt, dtype=np.int64),
        d_cycle=cyc.d_max,
        d_ladder=np.asarray(d_ladder),
        sandwich_ok=sandwich,
    )


# ---------------------------------------------------------------------------
# campaigns


@dataclass
class CampaignResult:
    model_name: str
    start: object
    horizon: int
    trials: int
    seed: int
    collect: str
    x_grid: tuple
    cycles: Optional[CycleStats]
    stopping: Optional[dict]  # stat -> x -> {"value": arr, "censored": arr}
    first_return: Optional[np.ndarray]
    first_return_censored: Optional[np.ndarray]
    final_sums: Optional[np.ndarray]
    certified_fraction: float

    def summary_dict(self) -> dict:
        """JSON-ready summary with stable field names (moments and counts)."""
        out = {
            "schema_version": 1,
            "model": self.model_name,
            "start": repr(self.start),
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.seed,
            "collect": self.collect,
            "x_grid": list(self.x_grid),
        }
        if self.first_return is not None:
            fr = self.first_return.astype(float)
            out["first_return"] = {
                "mean": float(fr.mean()),
                "censored": int(self.first_return_censored.sum()),
                "tail_counts": {
                    str(n): int((fr > n).sum()) for n in (1, 2, 4, 8, 16, 32)
                },
            }
        if self.cycles is not None and self.cycles.n_cycles:
            c = self.cycles
            out["cycles"] = {
                "count": int(c.n_cycles),
                "mean_length": float(c.lengths.mean()),
                "mean_sum": float(c.sums.mean()),
                "mean_d": float(c.d_max.mean()),
                "discarded_partial": int(c.n_discarded_partial),
            }
        if self.stopping is not None:
            stats = {}
            for s in _STOP_STATS:
                per_x = {}
                for x in self.x_grid:
                    cell = self.stopping[s][x]
                    vals = cell["value"]
                    finite = vals[np.isfinite(vals)]
                    entry = {"mean": float(finite.mean()) if len(finite) else None}
                    if "censored" in cell:
                        entry["censored"] = int(cell["censored"].sum())
                    per_x[f"{x:g}"] = entry
                stats[s] = per_x
            for s in _PATH_STATS:
                cell = self.stopping[s]
                entry = {"mean": float(cell["value"].mean())}
                if "censored" in cell:
                    entry["censored"] = int(cell["censored"].sum())
                stats[s] = entry
            out["stopping"] = stats
            out["certified_fraction"] = self.certified_fraction
        return out

    def write_csv(self, path: str) -> None:
        """One row per trial; stopping-time columns carry censor flags."""
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if self.collect == "first_return":
                w.writerow(["trial", "first_return", "censored"])
                for t in range(self.trials):
                    w.writerow(
                        [t, int(self.first_return[t]), int(self.first_return_censored[t])]
                    )
                return
            header = ["trial", "final_s"]
            cols = []
            if self.stopping is not None:
                for s in _STOP_STATS:
                    for x in self.x_grid:
                        name = f"{s}[x={x:g}]"
                        cell = self.stopping[s][x]
                        cols.append((name, cell["value"], cell.get("censored")))
                for s in _PATH_STATS:
                    cell = self.stopping[s]
                    cols.append((s, cell["value"], cell.get("censored")))
            for name, _v, c in cols:
                header.append(name)
                if c is not None:
                    header.append(name + "_censored")
            w.writerow(header)
            for t in range(self.trials):
                row = [t, repr(float(self.final_sums[t]))]
                for _name, v, c in cols:
                    row.append(repr(float(v[t])))
                    if c is not None:
                        row.append(int(c[t]))
                w.writerow(row)


_STOP_STATS = (
    "sigma_gt",
    "sigma_le",
    "s_at_sigma_le",
    "rho",
    "n_occ",
    "sigma_bar_gt",
    "tau_nu",
)
_PATH_STATS = ("sigma_min", "min_s", "max_s", "final_s", "argmax_pos", "argmin_pos")


def _simulate_first_return(model: Model, start, horizon: int, seed: int) -> tuple[int, bool]:
    rng = random.Random(seed)
    rand = rng.random
    row_of = model.row
    state = start
    for k in range(1, horizon + 1):
        state, _x = row_of(state).step(rand(), rng)
        if state == start:
            return k, False
    return horizon, True


def _run_chunk(args) -> dict:
    (model, start, horizon, lo, hi, master_seed, collect, x_grid, window) = args
    out: dict = {"lo": lo}
    cyc_parts = []
    fr_vals = np.empty(hi - lo, dtype=np.int64)
    fr_cens = np.empty(hi - lo, dtype=bool)
    stop_vals = {
        s: {x: np.empty(hi - lo) for x in x_grid} for s in _STOP_STATS
    }
    stop_cens = {
        s: {x: np.empty(hi - lo, dtype=bool) for x in x_grid}
        for s in ("sigma_gt", "sigma_le", "rho", "n_occ", "sigma_bar_gt", "tau_nu")
    }
    path_vals = {s: np.empty(hi - lo) for s in _PATH_STATS}
    path_cens = {s: np.empty(hi - lo, dtype=bool) for s in ("sigma_min", "min_s")}
    certified = 0
    final_sums = np.empty(hi - lo)
    for t in range(lo, hi):
        seed_t = trial_seed(master_seed, t)
        j = t - lo
        if collect == "first_return":
            v, c = _simulate_first_return(model, start, horizon, seed_t)
            fr_vals[j], fr_cens[j] = v, c
            continue
        traj = run_trajectory(model, start, horizon, seed_t)
        final_sums[j] = traj.partial_sums[-1]
        if collect in ("cycles", "both"):
            cyc_parts.append(cycle_decompose(traj, start))
        if collect in ("stopping", "both"):
            for x in x_grid:
                rec = stopping_times(traj, x, window)
                stop_vals["sigma_gt"][x][j] = rec.sigma_gt.value
                stop_cens["sigma_gt"][x][j] = rec.sigma_gt.censored
                stop_vals["sigma_le"][x][j] = rec.sigma_le.value
                stop_cens["sigma_le"][x][j] = rec.sigma_le.censored
                stop_vals["s_at_sigma_le"][x][j] = rec.s_at_sigma_le
                stop_vals["rho"][x][j] = rec.rho.value
                stop_cens["rho"][x][j] = rec.rho.censored
                stop_vals["n_occ"][x][j] = rec.n_occ.value
                stop_cens["n_occ"][x][j] = rec.n_occ.censored
                stop_vals["sigma_bar_gt"][x][j] = rec.sigma_bar_gt.value
                stop_cens["sigma_bar_gt"][x][j] = rec.sigma_bar_gt.censored
                stop_vals["tau_nu"][x][j] = rec.tau_nu.value
                stop_cens["tau_nu"][x][j] = rec.tau_nu.censored
            rec0 = stopping_times(traj, x_grid[0] if x_grid else 0.0, window)
            path_vals["sigma_min"][j] = rec0.sigma_min.value
            path_cens["sigma_min"][j] = rec0.sigma_min.censored
            path_vals["min_s"][j] = rec0.min_s.value
            path_cens["min_s"][j] = rec0.min_s.censored
            path_vals["max_s"][j] = float(traj.partial_sums.max())
            path_vals["final_s"][j] = float(traj.partial_sums[-1])
            path_vals["argmax_pos"][j] = float(np.argmax(traj.partial_sums)) / horizon
            path_vals["argmin_pos"][j] = float(np.argmin(traj.partial_sums[1:]) + 1) / horizon
            if not rec0.min_s.censored:
                certified += 1
    if collect == "first_return":
        out["first_return"] = fr_vals
        out["first_return_censored"] = fr_cens
        return out
    out["final_sums"] = final_sums
    if cyc_parts:
        out["cycles"] = CycleStats.merge(cyc_parts)
    if collect in ("stopping", "both"):
        out["stop_vals"] = stop_vals
        out["stop_cens"] = stop_cens
        out["path_vals"] = path_vals
        out["path_cens"] = path_cens
        out["certified"] = certified
    return out


def run_campaign(
    model: Model,
    start,
    horizon: int,
    trials: int,
    seed: int,
    workers: int = 1,
    collect: str = "both",
    x_grid: Sequence[float] = (0.0,),
    certification_window: Optional[int] = None,
) -> CampaignResult:
    """Run ``trials`` independent trajectories and fold their statistics.

    ``collect``: "cycles", "stopping", "both", or "first_return" (stops each
    trial at the first return to ``start``; only the return-time law is kept).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x_grid = tuple(float(x) for x in x_grid)
    window = certification_window
    chunk = max(1, min(trials, (trials + max(workers, 1) * 4 - 1) // (max(workers, 1) * 4)))
    ranges = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
    jobs = [
        (model, start, horizon, lo, hi, seed, collect, x_grid, window) for lo, hi in ranges
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    parts.sort(key=lambda p: p["lo"])

    if collect == "first_return":
        fr = np.concatenate([p["first_return"] for p in parts])
        frc = np.concatenate([p["first_return_censored"] for p in parts])
        return CampaignResult(
            model.name, start, horizon, trials, seed, collect, x_grid,
            None, None, fr, frc, None, 0.0,
        )
    final_sums = np.concatenate([p["final_sums"] for p in parts])
    cycles = None
    if collect in ("cycles", "both"):
        cyc_parts = [p.get("cycles") for p in parts if p.get("cycles") is not None]
        cycles = CycleStats.merge(cyc_parts) if cyc_parts else CycleStats(start)
    stopping = None
    certified_fraction = 0.0
    if collect in ("stopping", "both"):
        stopping = {}
        for s in _STOP_STATS:
            stopping[s] = {}
            for x in x_grid:
                stopping[s][x] = {
                    "value": np.concatenate([p["stop_vals"][s][x] for p in parts]),
                }
        for s in ("sigma_gt", "sigma_le", "rho", "n_occ", "sigma_bar_gt", "tau_nu"):
            for x in x_grid:
                stopping[s][x]["censored"] = np.concatenate(
                    [p["stop_cens"][s][x] for p in parts]
                )
        for s in _PATH_STATS:
            stopping[s] = {"value": np.concatenate([p["path_vals"][s] for p in parts])}
        for s in ("sigma_min", "min_s"):
            stopping[s]["censored"] = np.concatenate([p["path_cens"][s] for p in parts])
        certified_fraction = sum(p.get("certified", 0) for p in parts) / trials
    return CampaignResult(
        model.name, start, horizon, trials, seed, collect, x_grid,
        cycles, stopping, None, None, final_sums, certified_fraction,
    )


# ---------------------------------------------------------------------------
# bulk sampler for finite exact models (used by the oracle cross-checks)


def sample_embedded_batch(
    model: Model, start, n: int, size: int, seed: int
) -> np.ndarray:
    """Vectorized iid samples of S_n for finite models with atom kernels.

    This is a bulk facility independent of the per-trial campaign engine;
    it is deterministic given ``seed`` (numpy PCG64 stream).
    """
    if not model.finite:
        raise ValueError("bulk sampler requires a finite model")
    rng = np.random.default_rng(seed)
    nstates = len(model.states)
    cum = np.cumsum(model.P, axis=1)
    cum[:, -1] = 1.0
    values = {}
    for (a, b), k in model.spec.kernels.items():
        ia, ib = model.index[a], model.index[b]
        if isinstance(k, PointMass):
            values[(ia, ib)] = (np.array([float(k.value)]), np.array([1.0]))
        elif isinstance(k, DiscreteKernel):
            values[(ia, ib)] = (
                np.array([float(v) for v in k.values]),
                np.array([float(p) for p in k.probs]),
            )
        else:
            raise ValueError("bulk sampler requires atom kernels")
    state = np.full(size, model.index[start], dtype=np.int64)
    total = np.zeros(size)
    for _ in range(n):
        u = rng.random(size)
        nxt = np.empty(size, dtype=np.int64)
        for s in np.unique(state):
            mask = state == s
            nxt[mask] = np.searchsorted(cum[s], u[mask], side="right")
        np.clip(nxt, 0, nstates - 1, out=nxt)
        x = np.empty(size)
        for (ia, ib), (vals, probs) in values.items():
            mask = (state == ia) & (nxt == ib)
            cnt = int(mask.sum())
            if cnt == 0:
                continue
            if len(vals) == 1:
                x[mask] = vals[0]
            else:
                x[mask] = rng.choice(vals, size=cnt, p=probs)
        total += x
        state = nxt
    return total
