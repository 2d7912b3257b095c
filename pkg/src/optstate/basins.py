"""Basins of weak* attraction, visit-frequency basins, and grid scans.

A point x is classified against a target measure mu by estimating the
limit set of its empirical measures: `in_weak` when some cluster
representative lies within eps of mu, `in_strong` when all of them do.
Grid scans evaluate the per-cell kernel at every cell center of a uniform
grid and report Lebesgue fractions as cell-count fractions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import OptstateError
from .measures import (
    Measure,
    WeakStarMetric,
    default_metric,
    geometric_schedule,
    limit_set_estimate,
)
from .potentials import SubadditivePotential, growth_report
from .systems import DynamicalSystem, orbit


@dataclass(frozen=True)
class AttractorSpec:
    """A compact invariant target set K given by a finite sample of points;
    N_eps(K) membership is d(x, K) < eps in the space metric."""

    space: object
    points: np.ndarray
    label: str = "attractor"

    def distance(self, x) -> float:
        return min(self.space.distance(x, p) for p in self.points)

    def hits(self, orbit_points, eps) -> np.ndarray:
        """Per-orbit-point indicator of N_eps(K), as uint8."""
        if self.space.kind == "circle":
            return kernels.visit_hits_circle(
                np.asarray(orbit_points, dtype=float).reshape(-1),
                np.asarray(self.points, dtype=float).reshape(-1),
                float(eps),
            )
        if self.space.kind == "interval":
            # plain absolute distance: reuse the euclid kernel in 1 column
            return kernels.visit_hits_euclid(
                np.asarray(orbit_points, dtype=float).reshape(-1, 1),
                np.asarray(self.points, dtype=float).reshape(-1, 1),
                float(eps),
            )
        return kernels.visit_hits_euclid(
            np.asarray(orbit_points, dtype=float).reshape(-1, self.space.dim),
            np.asarray(self.points, dtype=float).reshape(-1, self.space.dim),
            float(eps),
        )


@dataclass
class ClassifyParams:
    horizon: int = 100_000
    schedule: Optional[Sequence[int]] = None
    metric: Optional[WeakStarMetric] = None
    cluster_tol: Optional[float] = None  # default eps / 4

    def resolve(self, space, epsilon):
        schedule = list(self.schedule) if self.schedule is not None else geometric_schedule(self.horizon)
        metric = self.metric if self.metric is not None else default_metric(space)
        tol = self.cluster_tol if self.cluster_tol is not None else epsilon / 4.0
        return schedule, metric, tol


@dataclass
class BasinQuery:
    """What to ask per grid cell: a measure target with eps (strong/weak
    classification) or an attractor with eps (visit-frequency basin)."""

    mode: str  # strong | weak | milnor
    epsilon: float
    mu: Optional[Measure] = None
    attractor: Optional[AttractorSpec] = None
    horizon: int = 100_000
    schedule: Optional[Sequence[int]] = None
    metric: Optional[WeakStarMetric] = None
    cluster_tol: Optional[float] = None
    milnor_threshold: float = 0.95

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.mode in ("strong", "weak") and self.mu is None:
            raise ValueError(f"mode {self.mode!r} needs a target measure")
        if self.mode == "milnor" and self.attractor is None:
            raise ValueError("milnor mode needs an attractor")
        if self.mode not in ("strong", "weak", "milnor"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class ClassifyResult:
    in_strong: bool
    in_weak: bool
    indeterminate: bool
    rep_distances: list
    spread: float
    last_two_distances: tuple


def _limit_stats(system, x, mu, epsilon, params: ClassifyParams):
    """Distances of the limit-set cluster representatives to mu, plus the
    finite-horizon honesty data (spread, last two checkpoint distances)."""
    schedule, metric, tol = params.resolve(system.space, epsilon)
    est = limit_set_estimate(system, x, schedule, metric, tol, keep_measures=False)
    mu_feats = metric.features(mu)
    rep_d = [metric.distance_features(f, mu_feats) for f in est.representative_features]
    d_prev = metric.distance_features(est.features[-2], mu_feats)
    d_last = metric.distance_features(est.features[-1], mu_feats)
    return rep_d, est.spread, (d_prev, d_last)


def classify_point(system, x, mu: Measure, epsilon, params: ClassifyParams = None) -> ClassifyResult:
    """Strong/weak basin membership of x for the target mu at scale eps.

    Reports `indeterminate` when the tail spread exceeds eps/2 and the
    membership verdict flips between the last two checkpoints.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    params = params or ClassifyParams()
    rep_d, spread, (d_prev, d_last) = _limit_stats(system, x, mu, epsilon, params)
    in_weak = min(rep_d) <= epsilon
    in_strong = max(rep_d) <= epsilon
    flipped = (d_prev <= epsilon) != (d_last <= epsilon)
    indeterminate = spread > epsilon / 2.0 and flipped
    return ClassifyResult(in_strong, in_weak, indeterminate, rep_d, spread,
                          (d_prev, d_last))


def milnor_fraction(system, x, attractor: AttractorSpec, epsilon, horizon,
                    schedule=None) -> float:
    """Estimated liminf of the visit frequency of N_eps(attractor):
    min over tail-window checkpoints of (1/n) #{j < n : d(f^j x, K) < eps}."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if horizon < 200:
        raise ValueError(f"need horizon >= 200, got {horizon}")
    ns = list(schedule) if schedule is not None else geometric_schedule(horizon)
    orb = orbit(system, x, ns[-1])
    hits = attractor.hits(orb.points, epsilon)
    csum = np.cumsum(hits, dtype=np.int64)
    tail_from = (horizon + 1) // 2
    fracs = [csum[n - 1] / n for n in ns if n >= tail_from]
    return float(min(fracs))


# ---------------------------------------------------------------------------
# grid scans


@dataclass
class CellRecord:
    center: object
    verdict: str  # in | out | indeterminate | error | optimal | not-optimal
    values: dict = field(default_factory=dict)


@dataclass
class BasinScanResult:
    """Per-cell verdicts over a uniform grid plus the head-line fraction.

    `lebesgue_fraction` counts verdict-true cells over all non-error cells
    (indeterminate cells stay in the denominator).  Deterministic given
    grid and parameters, independent of the worker count.
    """

    space_kind: str
    resolution: int
    records: list
    lebesgue_fraction: float
    counts: dict
    params: dict

    @property
    def cells(self):
        return len(self.records)


def _run_cells(cells, kernel, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(kernel, cells))
    return [kernel(c) for c in cells]


def _finalize(space, resolution, records, true_verdicts, params):
    n_err = sum(1 for r in records if r.verdict.startswith("error"))
    n_ind = sum(1 for r in records if r.verdict == "indeterminate")
    n_true = sum(1 for r in records if r.verdict in true_verdicts)
    denom = len(records) - n_err
    frac = n_true / denom if denom else 0.0
    counts = {
        "cells": len(records),
        "true": n_true,
        "indeterminate": n_ind,
        "errors": n_err,
    }
    return BasinScanResult(space.kind, resolution, records, frac, counts, params)


def _jitter_centers(space, centers, resolution, excluded_points):
    """Shift any cell center that coincides exactly with an excluded point
    by half a cell in the first coordinate (deterministic)."""
    if not excluded_points:
        return centers
    half = 0.5 / resolution
    out = []
    for c in centers:
        if any(space.distance(c, p) == 0.0 for p in excluded_points):
            if space.dim == 1:
                out.append(space.project(float(c) + half))
            else:
                shifted = np.asarray(c, dtype=float).copy()
                shifted[0] += half
                out.append(space.project(shifted))
        else:
            out.append(c)
    return out


def grid_scan(system: DynamicalSystem, query: BasinQuery, resolution,
              workers=1, exclude=(), excluded_points=()) -> BasinScanResult:
    """Evaluate the query at every cell center; aggregation is order-free."""
    if resolution < 2:
        raise ValueError(f"need resolution >= 2, got {resolution}")
    centers = system.space.grid(resolution, exclude=exclude)
    centers = _jitter_centers(system.space, centers, resolution, excluded_points)
    params = ClassifyParams(horizon=query.horizon, schedule=query.schedule,
                            metric=query.metric, cluster_tol=query.cluster_tol)

    if query.mode == "milnor":
        def cell(c):
            try:
                frac = milnor_fraction(system, c, query.attractor, query.epsilon,
                                       query.horizon, query.schedule)
            except OptstateError as e:
                return CellRecord(c, f"error:{type(e).__name__}")
            verdict = "in" if frac >= query.milnor_threshold else "out"
            return CellRecord(c, verdict, {"fraction": frac})
    else:
        def cell(c):
            try:
                res = classify_point(system, c, query.mu, query.epsilon, params)
            except OptstateError as e:
                return CellRecord(c, f"error:{type(e).__name__}")
            hit = res.in_strong if query.mode == "strong" else res.in_weak
            verdict = "indeterminate" if res.indeterminate else ("in" if hit else "out")
            return CellRecord(c, verdict, {
                "min_distance": min(res.rep_distances),
                "max_distance": max(res.rep_distances),
                "spread": res.spread,
            })

    records = _run_cells(centers, cell, workers)
    return _finalize(system.space, resolution, records, ("in",), {
        "mode": query.mode, "epsilon": query.epsilon, "horizon": query.horizon,
    })


@dataclass
class ObservabilityReport:
    epsilons: list
    weak_fractions: list
    strong_fractions: list
    counts: list
    observable: bool        # positive weak fraction at every tested scale
    strong_observable: bool

    def rows(self):
        for i, eps in enumerate(self.epsilons):
            yield eps, self.weak_fractions[i], self.strong_fractions[i], self.counts[i]


def observability_check(system, mu: Measure, epsilon_list, resolution,
                        params: ClassifyParams = None, workers=1,
                        exclude=()) -> ObservabilityReport:
    """Weak and strong basin fractions of mu at each scale in epsilon_list
    (descending).  The per-cell limit set is computed once and reused for
    every scale, so fractions are exactly monotone in eps.
    """
    if not epsilon_list:
        raise ValueError("epsilon_list must be nonempty")
    if any(b >= a for a, b in zip(epsilon_list, epsilon_list[1:])):
        raise ValueError("epsilon_list must be strictly descending")
    params = params or ClassifyParams()
    base_eps = epsilon_list[0]
    centers = system.space.grid(resolution, exclude=exclude)

    def cell(c):
        try:
            return _limit_stats(system, c, mu, base_eps, params)
        except OptstateError as e:
            return ("error", type(e).__name__)

    stats = _run_cells(centers, cell, workers)

    weak_fr, strong_fr, counts = [], [], []
    for eps in epsilon_list:
        n_err = n_ind = n_weak = n_strong = 0
        for s in stats:
            if s[0] == "error":
                n_err += 1
                continue
            rep_d, spread, (d_prev, d_last) = s
            flipped = (d_prev <= eps) != (d_last <= eps)
            if spread > eps / 2.0 and flipped:
                n_ind += 1
                continue
            if min(rep_d) <= eps:
                n_weak += 1
            if max(rep_d) <= eps:
                n_strong += 1
        denom = len(stats) - n_err
        weak_fr.append(n_weak / denom if denom else 0.0)
        strong_fr.append(n_strong / denom if denom else 0.0)
        counts.append({"cells": len(stats), "indeterminate": n_ind, "errors": n_err})
    return ObservabilityReport(
        epsilons=list(epsilon_list),
        weak_fractions=weak_fr,
        strong_fractions=strong_fr,
        counts=counts,
        observable=all(f > 0 for f in weak_fr),
        strong_observable=all(f > 0 for f in strong_fr),
    )


@dataclass
class OptimalScanResult(BasinScanResult):
    fraction_optimal: float = 0.0
    fraction_smallest_negative: float = 0.0
    mean_largest: float = math.nan
    mean_smallest: float = math.nan


def optimal_point_scan(system, phi: SubadditivePotential, resolution, horizon,
                       schedule=None, workers=1, exclude=(),
                       optimal_cut=0.0) -> OptimalScanResult:
    """Growth-rate estimates at every cell center.

    Cells with largest-rate estimate < optimal_cut (default 0) are flagged
    optimal; the fraction with smallest-rate estimate < 0 is reported
    separately and always dominates the optimal fraction.
    """
    if resolution < 2:
        raise ValueError(f"need resolution >= 2, got {resolution}")
    centers = system.space.grid(resolution, exclude=exclude)

    def cell(c):
        try:
            rep = growth_report(phi, system, c, horizon, schedule)
        except OptstateError as e:
            return CellRecord(c, f"error:{type(e).__name__}")
        verdict = "optimal" if rep.largest < optimal_cut else "not-optimal"
        return CellRecord(c, verdict, {"largest": rep.largest, "smallest": rep.smallest})

    records = _run_cells(centers, cell, workers)
    ok = [r for r in records if not r.verdict.startswith("error")]
    n_err = len(records) - len(ok)
    denom = len(ok)
    n_opt = sum(1 for r in ok if r.verdict == "optimal")
    n_small = sum(1 for r in ok if r.values["smallest"] < 0.0)
    largest_vals = np.array([r.values["largest"] for r in ok]) if ok else np.array([math.nan])
    smallest_vals = np.array([r.values["smallest"] for r in ok]) if ok else np.array([math.nan])
    result = OptimalScanResult(
        space_kind=system.space.kind,
        resolution=resolution,
        records=records,
        lebesgue_fraction=n_opt / denom if denom else 0.0,
        counts={"cells": len(records), "true": n_opt, "indeterminate": 0, "errors": n_err},
        params={"horizon": horizon, "potential": phi.label, "optimal_cut": optimal_cut},
        fraction_optimal=n_opt / denom if denom else 0.0,
        fraction_smallest_negative=n_small / denom if denom else 0.0,
        mean_largest=float(largest_vals.mean()),
        mean_smallest=float(smallest_vals.mean()),
    )
    return result
