"""Verdict layer: null-homology detection with potential reconstruction,
fluctuation-type classification from three evidence sources, rate (Kesten /
SLLN) classification, and theorem-consistency suites over an implication
graph with red-alarm detection.

Statuses are three-valued ("holds" / "fails" / "inconclusive"); an alarm
requires a strict premise "holds" and a strict conclusion "fails", so noisy
estimates degrade to "inconclusive" rather than false alarms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._seeds import trial_seed
from .criteria import (
    JFunction,
    MomentEstimate,
    estimate_from_summands,
    moment_functional,
    moment_of_samples,
    spitzer_series,
    spitzer_series_mc,
    stationary_increment_atoms,
    truncated_means,
)
from .kernels import PointMass
from .model import Model, dual_model
from .simulate import CycleStats, run_campaign, run_trajectory

__all__ = [
    "NullHomologousInput",
    "ClassifyConfig",
    "NullHomologyReport",
    "Verdict",
    "TrichotomyReport",
    "TheoremReport",
    "null_homology_test",
    "fluctuation_verdict",
    "trichotomy_and_slln",
    "theorem_suite",
    "ladder_stationary_check",
]


class NullHomologousInput(Exception):
    """The operation needs a nontrivial model."""


@dataclass
class ClassifyConfig:
    horizon: int = 512
    trials: int = 2000
    seed: int = 1
    workers: int = 1
    x_grid: tuple = (0.0, 1.0)
    frontier_cap: int = 20000
    spitzer_n: int = 512
    second_anchor: object = None


# ---------------------------------------------------------------------------
# null homology


@dataclass
class NullHomologyReport:
    null_homologous: Optional[bool]  # None = undecided (MC candidate only)
    g: Optional[dict]
    nh_class: Optional[str]
    advisory: bool
    evidence: list

    def is_trivial(self) -> bool:
        return bool(self.null_homologous)


def null_homology_test(
    model: Model,
    anchor=None,
    mode: str = "exact",
    frontier_cap: int = 20000,
    cycles: Optional[CycleStats] = None,
    tol: float = 1e-12,
) -> NullHomologyReport:
    """Detect coboundary increments and reconstruct the potential.

    Exact mode explores edges breadth-first from the anchor: the model is
    null-homologous iff every kernel is a point mass and the edge values are
    consistent with a potential g.  For infinite families the exploration
    stops at ``frontier_cap`` states and the NH subclass is advisory.
    """
    anchor = model.spec.meta.get("anchor") if anchor is None else anchor
    if anchor is None:
        anchor = model.default_start()
    evidence: list = []
    if mode == "mc":
        if cycles is None or cycles.n_cycles == 0:
            raise ValueError("mc mode needs a cycle pool")
        max_abs = float(np.abs(cycles.sums).max())
        evidence.append(("max |cycle sum|", max_abs, tol))
        if max_abs > tol:
            return NullHomologyReport(False, None, None, False, evidence)
        if model.exact_kernels:
            return null_homology_test(model, anchor, "exact", frontier_cap, tol=tol)
        return NullHomologyReport(None, None, None, True, evidence)
    # exact BFS; exploration tail mass is coarse (graph walk, not probability)
    g = {anchor: 0.0}
    order = [anchor]
    head = 0
    advisory = not model.finite
    edges_checked = 0
    eps = max(model.spec.eps_tail, 1e-4)
    while head < len(order):
        a = order[head]
        head += 1
        try:
            atoms = model.row(a).enumerate(eps)
        except Exception as exc:
            evidence.append(("row enumeration truncated", repr(a), repr(exc)))
            advisory = True
            continue
        for b, _p, kern in atoms:
            if not isinstance(kern, PointMass):
                ats = kern.atoms() if kern.is_exact else None
                if ats is None or len({float(v) for v, _ in ats}) > 1:
                    evidence.append(("nondegenerate kernel", repr((a, b)), None))
                    return NullHomologyReport(False, None, None, False, evidence)
                val = float(ats[0][0])
            else:
                val = float(kern.value)
            edges_checked += 1
            target = g[a] + val
            if b in g:
                if abs(g[b] - target) > tol:
                    evidence.append(("inconsistent edge", repr((a, b)), abs(g[b] - target)))
                    return NullHomologyReport(False, None, None, False, evidence)
            else:
                g[b] = target
                if len(g) < frontier_cap:
                    order.append(b)
                else:
                    advisory = True
    if edges_checked == 0:
        evidence.append(("no edges explored", 0, None))
        return NullHomologyReport(None, None, None, True, evidence)
    vals = np.array(list(g.values()))
    lo, hi = float(vals.min()), float(vals.max())
    evidence.append(("explored states", len(g), frontier_cap))
    evidence.append(("g range", (lo, hi), None))
    if model.finite:
        if hi - lo <= tol:
            nh = "NH-1"
        else:
            nh = "NH-2"
        return NullHomologyReport(True, g, nh, False, evidence)
    # advisory classification for families: compare extremes at half depth
    half = {s: v for s, v in list(g.items())[: max(2, len(g) // 4)]}
    hvals = np.array(list(half.values()))
    grow_up = hi > float(hvals.max()) * 1.5 + 1.0
    grow_dn = lo < float(hvals.min()) * 1.5 - 1.0
    if hi - lo <= tol:
        nh = "NH-1"
    elif grow_up and grow_dn:
        nh = "NH-5"
    elif grow_dn:
        nh = "NH-3"
    elif grow_up:
        nh = "NH-4"
    else:
        nh = "NH-2"
    return NullHomologyReport(True, g, nh, True, evidence)


# ---------------------------------------------------------------------------
# fluctuation verdict


@dataclass
class Verdict:
    category: str  # PD | ND | Osc | NullHomologous | Inconclusive
    embedded: Optional[str]
    dual_category: Optional[str]
    trichotomy_rate: Optional[object]
    nh_class: Optional[str]
    evidence: list
    confidence: str

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "category": self.category,
            "embedded": self.embedded,
            "dual_category": self.dual_category,
            "trichotomy_rate": repr(self.trichotomy_rate),
            "nh_class": self.nh_class,
            "confidence": self.confidence,
            "evidence": [[str(e[0]), repr(e[1]), repr(e[2])] for e in self.evidence],
        }


def _hill_flag(values: np.ndarray, index_threshold: float = 1.05) -> bool:
    """Hill tail-index estimate on the top 5%; True when the index is at or
    below ``index_threshold`` (one-sided mean diverges, possibly only
    logarithmically)."""
    vals = values[values > 0]
    n = len(vals)
    if n < 400:
        return False
    k = max(20, n // 20)
    top = np.sort(vals)[-k:]
    x0 = top[0]
    if x0 <= 0 or top[-1] <= x0 * (1 + 1e-9):
        return False
    slope = 1.0 / float(np.mean(np.log(top / x0)))
    return slope <= index_threshold


def _auto_grid(samples: np.ndarray) -> np.ndarray:
    mags = np.abs(samples[samples != 0])
    if len(mags) == 0:
        return np.array([1.0, 2.0, 4.0, 8.0])
    lo = max(float(np.quantile(mags, 0.25)), 1e-9)
    hi = float(mags.max()) * 1.5
    if hi <= lo * 1.0001:
        hi = lo * 1000.0
    return np.unique(np.geomspace(lo, hi, 24))


def _classify_embedded(sums: np.ndarray, evidence: list) -> str:
    """Fluctuation type of an ordinary walk from iid increment samples."""
    n = len(sums)
    if n < 16:
        return "Inconclusive"
    abs_est = estimate_from_summands("E_abs_increment", np.abs(sums))
    if not abs_est.divergent:
        m = float(sums.mean())
        se = float(sums.std(ddof=1) / math.sqrt(n)) + 1e-300
        evidence.append(("embedded mean/se", m, se))
        if m > 4 * se:
            return "PD"
        if m < -4 * se:
            return "ND"
        return "Osc"
    evidence.append(("embedded E|Y| divergence flag", abs_est.top_share, 0.5))
    grid = _auto_grid(sums)
    j_up = JFunction(gamma=1.0, samples=sums)
    j_dn = JFunction(gamma=1.0, samples=-sums)
    pd_ok = _ult_pos_significant(sums, grid) and estimate_from_summands(
        "EJ(Y-)", j_up(np.maximum(-sums, 0.0))
    ).status() == "holds"
    nd_ok = _ult_pos_significant(-sums, grid) and estimate_from_summands(
        "EJ(Y+)", j_dn(np.maximum(sums, 0.0))
    ).status() == "holds"
    if pd_ok and not nd_ok:
        return "PD"
    if nd_ok and not pd_ok:
        return "ND"
    if not pd_ok and not nd_ok:
        return "Osc"
    return "Inconclusive"


def _ult_pos_significant(samples: np.ndarray, grid: np.ndarray, top_k: int = 8) -> bool:
    """A(x) > 0 on the top grid points with a 4-sigma margin."""
    n = len(samples)
    pos = np.maximum(samples, 0.0)
    neg = np.maximum(-samples, 0.0)
    for x in grid[-top_k:]:
        diff = np.minimum(pos, x) - np.minimum(neg, x)
        m = float(diff.mean())
        se = float(diff.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        if m <= 4 * se:
            return False
    return True


def _classify_full_walk(cycles: CycleStats, evidence: list) -> str:
    sums = cycles.sums
    n = len(sums)
    if n < 16:
        return "Inconclusive"
    grid = _auto_grid(sums)
    j_up = JFunction(gamma=1.0, samples=sums)
    j_dn = JFunction(gamma=1.0, samples=-sums)
    ejd = estimate_from_summands("EJ(D)", j_up(cycles.d_max))
    eju = estimate_from_summands("EJ(U)", j_dn(cycles.u_max))
    evidence.append(("full-walk EJ(D)", ejd.estimate, ejd.status()))
    evidence.append(("full-walk EJ(U)", eju.estimate, eju.status()))
    pd_ok = _ult_pos_significant(sums, grid) and ejd.status() == "holds"
    nd_ok = _ult_pos_significant(-sums, grid) and eju.status() == "holds"
    if pd_ok and not nd_ok:
        return "PD"
    if nd_ok and not pd_ok:
        return "ND"
    if not pd_ok and not nd_ok:
        # both one-sided criteria rejected: oscillation-leaning
        return "Osc?"
    return "Inconclusive"


def _classify_paths(stopping: dict, evidence: list) -> str:
    high = stopping["argmax_pos"]["value"]
    low = stopping["argmin_pos"]["value"]
    final = stopping["final_s"]["value"]
    high_late = float((high >= 0.5).mean())
    low_late = float((low >= 0.5).mean())
    evidence.append(("paths: record-high late fraction", high_late, 0.5))
    evidence.append(("paths: record-low late fraction", low_late, 0.5))
    if high_late >= 0.4 and low_late >= 0.4:
        return "Osc"
    if high_late >= 0.7 and low_late <= 0.3 and float((final > 0).mean()) >= 0.9:
        return "PD"
    if low_late >= 0.7 and high_late <= 0.3 and float((final < 0).mean()) >= 0.9:
        return "ND"
    return "Inconclusive"


def fluctuation_verdict(
    model: Model,
    anchor=None,
    config: Optional[ClassifyConfig] = None,
    campaign=None,
    classify_dual: bool = False,
) -> Verdict:
    """Three-source fluctuation verdict (embedded criterion, full-walk
    criterion, path diagnostics); source disagreements are reported, the
    paper's flower chains being the canonical embedded-PD / walk-Osc case."""
    config = config or ClassifyConfig()
    anchor = model.spec.meta.get("anchor") if anchor is None else anchor
    if anchor is None:
        anchor = model.default_start()
    nh = null_homology_test(model, anchor, "exact" if model.exact_kernels else "mc",
                            config.frontier_cap,
                            cycles=campaign.cycles if campaign else None)
    if nh.null_homologous:
        raise NullHomologousInput(f"model is null-homologous ({nh.nh_class})")
    if campaign is None:
        campaign = run_campaign(
            model, anchor, config.horizon, config.trials, config.seed,
            workers=config.workers, collect="both", x_grid=config.x_grid,
        )
    evidence: list = []
    emb = _classify_embedded(campaign.cycles.sums, evidence)
    full = _classify_full_walk(campaign.cycles, evidence)
    paths = _classify_paths(campaign.stopping, evidence)
    evidence.append(("source1 embedded", emb, None))
    evidence.append(("source2 full-walk criterion", full, None))
    evidence.append(("source3 path diagnostics", paths, None))
    if emb != full and full != "Inconclusive":
        evidence.append(("embedded/full disagreement", f"{emb} vs {full}", "reported"))
    category, confidence = _combine_sources(full, paths)
    dual_cat = None
    if classify_dual:
        try:
            dual = dual_model(model)
            dv = fluctuation_verdict(dual, anchor, config, classify_dual=False)
            dual_cat = dv.category
        except Exception as exc:  # family without a dual factory
            evidence.append(("dual classification skipped", repr(exc), None))
    return Verdict(category, emb, dual_cat, None, None, evidence, confidence)


def _combine_sources(full: str, paths: str) -> tuple[str, str]:
    if paths != "Inconclusive":
        if full == paths:
            return paths, "high"
        if full == "Osc?" and paths == "Osc":
            return "Osc", "high"
        if full in ("Inconclusive", "Osc?"):
            return paths, "medium"
        return "Inconclusive", "low"
    if full == "Osc?":
        return "Osc", "low"
    if full != "Inconclusive":
        return full, "medium"
    return "Inconclusive", "low"


# ---------------------------------------------------------------------------
# trichotomy and SLLN


@dataclass
class TrichotomyReport:
    rate_class: str  # linear | PD+ | ND+ | Osc+ | inconclusive
    mu: Optional[float]
    stationary_mean_exists: Optional[bool]
    heavy_cycle_flag: bool
    matches_occupation_drift: Optional[bool]
    checkpoints: list
    evidence: list

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "rate_class": self.rate_class,
            "mu": self.mu,
            "stationary_mean_exists": self.stationary_mean_exists,
            "heavy_cycle_flag": self.heavy_cycle_flag,
            "matches_occupation_drift": self.matches_occupation_drift,
            "checkpoints": self.checkpoints,
        }


def trichotomy_and_slln(
    model: Model, config: Optional[ClassifyConfig] = None, campaign=None
) -> TrichotomyReport:
    """Rate classification from dyadic checkpoints of S_n/n, with the
    stationary-drift existence diagnostic (the coboundary birth-death chain
    must come out as rate 0 with both one-sided stationary means flagged)."""
    config = config or ClassifyConfig()
    anchor = model.spec.meta.get("anchor", model.default_start())
    nh = null_homology_test(model, anchor, "exact" if model.exact_kernels else "mc",
                            config.frontier_cap,
                            cycles=campaign.cycles if campaign else None)
    if nh.null_homologous:
        raise NullHomologousInput(f"model is null-homologous ({nh.nh_class})")
    n_paths = min(max(8, config.trials // 64), 64)
    ks = [k for k in range(3, 40) if 2**k <= config.horizon]
    ratios = np.empty((n_paths, len(ks)))
    incs = []
    for p in range(n_paths):
        traj = run_trajectory(model, anchor, config.horizon, trial_seed(config.seed, p))
        incs.append(traj.increments)
        for c, k in enumerate(ks):
            n = 2**k
            ratios[p, c] = traj.partial_sums[n] / n
    increments = np.concatenate(incs)
    med = np.median(ratios, axis=0)
    checkpoints = [[int(2**k), float(m)] for k, m in zip(ks, med)]
    evidence: list = [("median ratios", [round(float(m), 4) for m in med], None)]
    if campaign is None:
        campaign = run_campaign(
            model, anchor, config.horizon, max(200, config.trials // 4), config.seed,
            workers=config.workers, collect="cycles",
        )
    cyc = campaign.cycles
    abs_est = estimate_from_summands("E|S_tau|", np.abs(cyc.sums))
    pos_est = estimate_from_summands("E_pi X+ occ", cyc.pos_sums)
    neg_est = estimate_from_summands("E_pi X- occ", cyc.neg_sums)
    heavy = abs_est.divergent
    # a Hill slope at or below 1 on the stationary increments means the
    # one-sided means diverge even when the divergence is only logarithmic
    pos_heavy = pos_est.divergent or _hill_flag(np.maximum(increments, 0.0))
    neg_heavy = neg_est.divergent or _hill_flag(np.maximum(-increments, 0.0))
    mean_exists = not (pos_heavy and neg_heavy)
    evidence.append(("E_pi X_1^+ divergent", pos_heavy, pos_est.top_share))
    evidence.append(("E_pi X_1^- divergent", neg_heavy, neg_est.top_share))
    mu_occ = float(cyc.sums.mean() / cyc.lengths.mean()) if cyc.n_cycles else None
    last, prev = med[-1], med[-2]
    stable = abs(last - prev) <= 0.1 * (1.0 + abs(last))
    growing = all(
        abs(med[i + 1]) >= 1.15 * abs(med[i]) for i in range(len(med) - 3, len(med) - 1)
    ) and abs(last) > 1.0 and abs(last) >= 2.0 * abs(med[max(0, len(med) - 5)])
    if stable and not growing:
        mu = float(last)
        match = None
        if mean_exists and mu_occ is not None:
            se = float(np.std(ratios[:, -1], ddof=1) / math.sqrt(n_paths)) + 1e-12
            match = bool(abs(mu - mu_occ) <= 4 * se + 0.1 * (1 + abs(mu)))
        return TrichotomyReport("linear", mu, mean_exists, heavy, match, checkpoints, evidence)
    if growing and heavy:
        finals = ratios[:, -1]
        if float((finals > 0).mean()) >= 0.9:
            cls = "PD+"
        elif float((finals < 0).mean()) >= 0.9:
            cls = "ND+"
        else:
            cls = "Osc+"
        return TrichotomyReport(cls, None, mean_exists, heavy, None, checkpoints, evidence)
    if growing and not heavy:
        evidence.append(("rate growth without heavy-cycle gate", True, None))
    return TrichotomyReport("inconclusive", None, mean_exists, heavy, None, checkpoints, evidence)


# ---------------------------------------------------------------------------
# theorem suite


@dataclass
class ConditionResult:
    cid: str
    status: str
    detail: dict = field(default_factory=dict)

    def row(self) -> str:
        extra = ", ".join(f"{k}={v}" for k, v in self.detail.items())
        return f"{self.cid:<18} {self.status:<13} {extra}"


@dataclass
class TheoremReport:
    model_name: str
    anchor: object
    alpha: float
    conditions: dict
    edges: list  # (premise, conclusion, gates, active, alarm)
    alarms: list
    notes: list

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "model": self.model_name,
            "anchor": repr(self.anchor),
            "alpha": self.alpha,
            "conditions": {
                cid: {"status": c.status, **{k: repr(v) for k, v in c.detail.items()}}
                for cid, c in sorted(self.conditions.items())
            },
            "edges": [
                {
                    "premise": p, "conclusion": c, "gates": list(g),
                    "active": a, "alarm": al,
                }
                for p, c, g, a, al in self.edges
            ],
            "alarms": self.alarms,
            "notes": self.notes,
        }

    def table_str(self) -> str:
        lines = [f"theorem suite: {self.model_name} @ alpha={self.alpha}"]
        for cid in sorted(self.conditions):
            lines.append("  " + self.conditions[cid].row())
        lines.append(
            f"implication graph: {len([e for e in self.edges if e[3]])} active edges, "
            f"{len(self.alarms)} red alarms"
        )
        for a in self.alarms:
            lines.append(f"  RED ALARM: {a}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


def _estimate_status(est: MomentEstimate, **kw) -> str:
    return est.status(**kw)


def _combine(*statuses: str) -> str:
    if "fails" in statuses:
        return "fails"
    if "inconclusive" in statuses:
        return "inconclusive"
    return "holds"


def _bool_status(flag: bool, solid: bool) -> str:
    if flag:
        return "holds"
    return "fails" if solid else "inconclusive"


def _spitzer_status(res) -> str:
    if res.cauchy_pass():
        return "holds"
    b = res.dyadic_blocks()
    if len(b) >= 5 and b[-1] >= 0.5 * max(b):
        return "fails"
    return "inconclusive"


def _stop_moment(stopping, stat, x, power) -> MomentEstimate:
    cell = stopping[stat][x]
    return moment_of_samples(f"{stat}^{power:g}[x={x:g}]", cell["value"], power,
                             cell.get("censored"))


def theorem_suite(
    model: Model,
    anchor=None,
    alpha: float = 1.0,
    config: Optional[ClassifyConfig] = None,
    campaign=None,
) -> TheoremReport:
    """Evaluate the moment/series conditions of the main criteria at level
    ``alpha`` and audit the implication graph for premise-holds /
    conclusion-fails contradictions."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    config = config or ClassifyConfig()
    anchor = model.spec.meta.get("anchor") if anchor is None else anchor
    if anchor is None:
        anchor = model.default_start()
    if campaign is None:
        campaign = run_campaign(
            model, anchor, config.horizon, config.trials, config.seed,
            workers=config.workers, collect="both", x_grid=config.x_grid,
        )
    cyc = campaign.cycles
    stopping = campaign.stopping
    x0 = config.x_grid[0]
    conds: dict = {}
    notes: list = []

    def put(cid, status, **detail):
        conds[cid] = ConditionResult(cid, status, detail)

    jf = JFunction(anchor=anchor, gamma=1.0, samples=cyc.sums)
    grid = _auto_grid(cyc.sums)
    table = truncated_means(cyc.sums, grid, anchor=anchor)
    solid_table = cyc.n_cycles >= 1000
    put("A_ult_pos", _bool_status(table.ultimately_positive(), solid_table),
        a_top=float(table.a_values[-1]))

    for cid, kind, kw in [
        ("type_alpha", "E_tau_pow", {}),
        ("tau_logtau", "E_tau_logtau", {}),
        ("EJD", "E_J_D", {}),
        ("EJD_pow", "E_J_D_pow", {}),
        ("J_sneg_pow", "E_J_Sneg_pow", {}),
        ("int_Jalpha_dV", "int_Jalpha_dV", {}),
        ("int_J_dValpha", "int_J_dValpha", {}),
        ("eq63", "int_logJ_dV", {}),
        ("EDalphaJD", "E_Dalpha_J_D", {}),
        ("E_abs_cycle", "E_abs_cycle_sum", {}),
    ]:
        est = moment_functional(kind, cyc, jf, alpha=alpha)
        put(cid, est.status(), estimate=round(est.estimate, 6), top_share=round(est.top_share, 3),
            divergent=est.divergent)

    verdict = fluctuation_verdict(model, anchor, config, campaign=campaign)
    v = verdict.category
    put("verdict_PD", "holds" if v == "PD" else ("fails" if v in ("ND", "Osc") else "inconclusive"),
        category=v)
    emb = verdict.embedded
    put("embedded_PD", "holds" if emb == "PD" else ("fails" if emb in ("ND", "Osc") else "inconclusive"),
        embedded=emb)
    put("61b", _combine(conds["A_ult_pos"].status, conds["EJD"].status))
    put("64a", _combine(conds["A_ult_pos"].status, conds["J_sneg_pow"].status,
                        conds["int_Jalpha_dV"].status))
    put("65a", _combine(conds["J_sneg_pow"].status, conds["int_J_dValpha"].status))

    # Spitzer series at alpha and 0
    try:
        if model.spec.meta.get("spitzer") is not None or (model.finite and model.exact_kernels):
            s0 = spitzer_series(model, anchor, x0, 0.0, config.spitzer_n)
            sa = spitzer_series(model, anchor, x0, alpha, config.spitzer_n)
        else:
            s0 = spitzer_series_mc(model, anchor, x0, 0.0, config.horizon,
                                   max(64, config.trials // 16), config.seed + 1)
            sa = spitzer_series_mc(model, anchor, x0, alpha, config.horizon,
                                   max(64, config.trials // 16), config.seed + 1)
        put("spitzer0", _spitzer_status(s0), total=round(s0.total, 4), mode=s0.mode)
        put("spitzer_alpha", _spitzer_status(sa), total=round(sa.total, 4), mode=sa.mode)
    except Exception as exc:
        put("spitzer0", "inconclusive", error=repr(exc))
        put("spitzer_alpha", "inconclusive", error=repr(exc))

    # stopping-time moments
    for cid, stat, power in [
        ("EsigmaGT", "sigma_gt", 1.0),
        ("sigma_pow", "sigma_gt", 1.0 + alpha),
        ("rho_alpha", "rho", alpha),
        ("N_alpha", "n_occ", alpha),
        ("sigmabar_pow", "sigma_bar_gt", 1.0 + alpha),
        ("taunu_pow", "tau_nu", 1.0 + alpha),
    ]:
        est = _stop_moment(stopping, stat, x0, power)
        status = est.status(max_censored_frac=0.005)
        if est.censored > 0.25 * max(est.n + est.censored, 1):
            status = "fails"
        put(cid, status, estimate=round(est.estimate, 4), censored=est.censored)
    est = moment_of_samples("sigma_min^a", stopping["sigma_min"]["value"], alpha,
                            stopping["sigma_min"]["censored"])
    put("sigmamin_alpha", est.status(max_censored_frac=0.05),
        estimate=round(est.estimate, 4), censored=est.censored)
    est = moment_of_samples("|min S|^a", stopping["min_s"]["value"], alpha,
                            stopping["min_s"]["censored"])
    put("min_alpha", est.status(max_censored_frac=0.05),
        estimate=round(est.estimate, 4), censored=est.censored)
    # survival and conditional moments of sigma<=(-x)
    cell = stopping["sigma_le"][x0]
    cens = np.asarray(cell["censored"], dtype=bool)
    surv_frac = float(cens.mean())
    fin_vals = cell["value"][~cens]
    fin_est = estimate_from_summands("sigle^a", np.abs(fin_vals) ** alpha)
    st = "holds" if (surv_frac >= 0.01 and fin_est.status() == "holds") else (
        "fails" if surv_frac < 1e-4 else "inconclusive"
    )
    put("sigle_alpha_surv", st, survival=round(surv_frac, 4),
        finite_part=round(fin_est.estimate, 4) if fin_est.n else None)
    s_at = campaign.stopping["s_at_sigma_le"][x0]["value"]
    s_fin = np.abs(s_at[~cens & np.isfinite(s_at)])
    est = estimate_from_summands("endpoint^a", s_fin**alpha)
    put("S_at_sigle_alpha", est.status() if surv_frac >= 0.01 else "inconclusive",
        estimate=round(est.estimate, 4) if est.n else None)
    conds["63b"] = conds["rho_alpha"]
    conds["63c"] = conds["sigmamin_alpha"]

    # finite-S stationary-increment criteria (exact finite sums)
    if model.finite and model.exact_kernels:
        atoms = stationary_increment_atoms(model)
        vals = np.array([float(v) for v, _ in atoms])
        probs = np.array([float(p) for _, p in atoms])
        jpi = JFunction(anchor="pi", gamma=1.0, atoms=atoms)
        a_pi = truncated_means(atoms, _auto_grid(vals), exact=True)
        neg = np.maximum(-vals, 0.0)
        e_j = float(np.sum(probs * jpi(neg)))
        e_j_pow = float(np.sum(probs * jpi(neg) ** (1 + alpha)))
        e_min = float(np.sum(probs * neg**alpha * jpi(neg)))
        put("A_pi_ult_pos", _bool_status(a_pi.ultimately_positive(), True))
        put("Jpi_1", _combine(conds["A_pi_ult_pos"].status, "holds"), value=round(e_j, 6))
        put("Jpi_KM", "holds", value=round(e_j_pow, 6))
        put("Jpi_min", "holds", value=round(e_min, 6))
        if math.isinf(e_j_pow) or math.isinf(e_min):
            notes.append("stationary-increment series overflowed; marked holds=False")
            put("Jpi_KM", "inconclusive", value=None)
            put("Jpi_min", "inconclusive", value=None)

    if conds["E_abs_cycle"].detail.get("divergent"):
        notes.append(
            "E|S_tau| divergence diagnostic fired: ultimate positivity of A is "
            "dispensable for the positive-divergence criterion (reported only)"
        )

    edges = _implication_edges(alpha, model.finite and model.exact_kernels)
    results, alarms = [], []
    for prem, conc, gates in edges:
        if prem not in conds or conc not in conds:
            continue
        active = all(conds[g].status == "holds" for g in gates if g in conds)
        alarm = active and conds[prem].status == "holds" and conds[conc].status == "fails"
        results.append((prem, conc, gates, active, alarm))
        if alarm:
            alarms.append(f"{prem} holds but {conc} fails (gates: {gates})")
    return TheoremReport(model.name, anchor, alpha, conds, results, alarms, notes)


def _implication_edges(alpha: float, finite_exact: bool) -> list:
    E: list = []

    def edge(p, c, gates=()):
        E.append((p, c, tuple(gates)))

    # positive-divergence criterion chain
    edge("61b", "spitzer0")
    edge("spitzer0", "EsigmaGT")
    edge("verdict_PD", "61b")
    edge("61b", "verdict_PD")
    edge("spitzer0", "eq63", gates=("tau_logtau",))
    edge("eq63", "spitzer0", gates=("tau_logtau",))
    # moment equivalences at level alpha (positive divergent, type alpha)
    km = ["EJD_pow", "63b", "63c", "sigle_alpha_surv"]
    for p in km:
        for c in km:
            if p != c:
                edge(p, c, gates=("verdict_PD", "type_alpha"))
    edge("64a", "spitzer_alpha", gates=("type_alpha",))
    edge("spitzer_alpha", "64a", gates=("type_alpha",))
    edge("65a", "N_alpha", gates=("verdict_PD", "type_alpha"))
    if alpha >= 1:
        edge("N_alpha", "65a", gates=("verdict_PD", "type_alpha"))
    # cross-theorem ordering
    if alpha >= 1:
        chain = [("EJD_pow", "64a"), ("64a", "65a"), ("spitzer_alpha", "N_alpha")]
    else:
        chain = [("EJD_pow", "65a"), ("65a", "64a"), ("N_alpha", "spitzer_alpha")]
    for p, c in chain:
        edge(p, c, gates=("verdict_PD", "type_alpha"))
    for c in km + ["64a", "spitzer_alpha", "65a", "N_alpha"]:
        edge(c, "sigma_pow", gates=("verdict_PD", "type_alpha"))
    # minimum-moment criterion
    edge("EDalphaJD", "min_alpha", gates=("verdict_PD",))
    edge("min_alpha", "EDalphaJD", gates=("verdict_PD",))
    edge("min_alpha", "S_at_sigle_alpha", gates=("verdict_PD",))
    # post-return passage times
    edge("J_sneg_pow", "sigmabar_pow", gates=("embedded_PD", "type_alpha"))
    edge("sigmabar_pow", "J_sneg_pow", gates=("embedded_PD", "type_alpha"))
    edge("J_sneg_pow", "taunu_pow", gates=("embedded_PD", "type_alpha"))
    edge("taunu_pow", "J_sneg_pow", gates=("embedded_PD", "type_alpha"))
    edge("sigmabar_pow", "sigma_pow", gates=("embedded_PD", "type_alpha"))
    if finite_exact:
        edge("Jpi_1", "61b")
        edge("61b", "Jpi_1")
        edge("Jpi_KM", "EJD_pow", gates=("verdict_PD", "type_alpha"))
        edge("EJD_pow", "Jpi_KM", gates=("verdict_PD", "type_alpha"))
        edge("Jpi_min", "EDalphaJD", gates=("verdict_PD",))
        edge("EDalphaJD", "Jpi_min", gates=("verdict_PD",))
    return E


# ---------------------------------------------------------------------------
# ladder-chain stationary law (finite S only)


def ladder_stationary_check(
    model: Model, horizon: int = 512, trials: int = 400, seed: int = 9
) -> dict:
    """Empirical occupation of the strict-ladder chain versus the dual-based
    closed form (finite state space; survival probabilities MC-estimated with
    the certification window)."""
    if not model.finite:
        raise ValueError("ladder stationary check needs a finite model")
    from .simulate import ladder_process, stopping_times

    states = model.states
    dual = dual_model(model)
    surv = {}
    for i in states:
        alive = 0
        for t in range(trials):
            traj = run_trajectory(dual, i, horizon, trial_seed(seed, t))
            rec = stopping_times(traj, 0.0)
            if rec.sigma_le.censored and not rec.min_s.censored:
                alive += 1
        surv[i] = alive / trials
    denom = sum(model.pi(i) * surv[i] for i in states)
    formula = {i: (model.pi(i) * surv[i] / denom if denom > 0 else math.nan) for i in states}
    counts = {i: 0 for i in states}
    total = 0
    for t in range(trials):
        traj = run_trajectory(model, states[t % len(states)], horizon, trial_seed(seed + 1, t))
        lad = ladder_process(traj, states[0])
        for s in lad.ladder_states:
            counts[s] += 1
            total += 1
    empirical = {i: counts[i] / total if total else math.nan for i in states}
    return {"formula": formula, "empirical": empirical, "survival": surv}
