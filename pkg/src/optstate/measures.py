"""Borel probability measures, a concrete weak* metric, and limit sets.

Measures are weighted point masses (Dirac, periodic-orbit, empirical,
mixtures) or a quadrature stand-in for normalized Lebesgue measure.  The
weak* metric is built from a fixed countable family of bounded Lipschitz
test functions:

    dist*(mu, nu) = sum_k 2^{-k} |int f_k dmu - int f_k dnu| / 2

The extra factor 1/2 normalizes each term into [0, 1] (the functions have
sup-norm <= 1, so integral differences reach 2), which makes the metric
itself bounded by 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MeasureSpecError, NonPeriodicOrbitError, SpaceMismatchError
from .spaces import StateSpace
from .systems import DynamicalSystem, orbit, parse_coordinate

WEIGHT_TOL = 1e-12
MERGE_TOL = 1e-12
PERIODIC_TOL = 1e-9


def geometric_schedule(horizon, n0=100, gamma=1.4):
    """Checkpoint horizons ceil(n0 * gamma^j) capped at `horizon`.

    Geometric spacing detects limsup/liminf oscillation at logarithmic
    cost; the final horizon is always included.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    ns = []
    v = float(n0)
    while v < horizon:
        n = math.ceil(v)
        if n >= horizon:
            break
        if not ns or n > ns[-1]:
            ns.append(n)
        v *= gamma
    ns.append(horizon)
    return ns


# ---------------------------------------------------------------------------
# test-function families and the weak* metric


@dataclass(frozen=True)
class TestFunction:
    name: str
    fn: Callable  # vectorized over point arrays
    lipschitz: float

    def __call__(self, pts):
        return self.fn(pts)


def _trig_family(freq_scale, count=8):
    funcs = []
    for k in range(1, count + 1):
        w = freq_scale * k
        funcs.append(
            TestFunction(f"sin{k}", lambda x, w=w: np.sin(w * np.asarray(x, dtype=float)), w)
        )
        funcs.append(
            TestFunction(f"cos{k}", lambda x, w=w: np.cos(w * np.asarray(x, dtype=float)), w)
        )
    return funcs


def _torus_family(max_degree=4):
    funcs = []
    two_pi = 2.0 * math.pi
    for k1 in range(max_degree + 1):
        for k2 in range(max_degree + 1):
            if k1 == 0 and k2 == 0 or k1 + k2 > max_degree:
                continue
            parts1 = ["cos"] if k1 == 0 else ["sin", "cos"]
            parts2 = ["cos"] if k2 == 0 else ["sin", "cos"]
            for t1 in parts1:
                for t2 in parts2:
                    def fn(p, k1=k1, k2=k2, t1=t1, t2=t2):
                        p = np.asarray(p, dtype=float).reshape(-1, 2)
                        f1 = np.ones(len(p)) if k1 == 0 else getattr(np, t1)(two_pi * k1 * p[:, 0])
                        f2 = np.ones(len(p)) if k2 == 0 else getattr(np, t2)(two_pi * k2 * p[:, 1])
                        return f1 * f2
                    name = f"{t1}{k1}x{t2}{k2}"
                    funcs.append(TestFunction(name, fn, two_pi * (k1 + k2)))
    return funcs


def _bump_family(centers, slope=4.0):
    funcs = []
    centers = np.asarray(centers, dtype=float)
    for idx, c in enumerate(centers):
        def fn(p, c=c):
            p = np.asarray(p, dtype=float).reshape(-1, c.shape[0])
            d = np.sqrt(((p - c) ** 2).sum(axis=1))
            return np.maximum(0.0, 1.0 - slope * d)
        funcs.append(TestFunction(f"bump{idx}", fn, slope))
    return funcs


def _simplex_bump_centers():
    # 15 barycentric lattice points (i+j+k = 4) plus the barycenter
    pts = []
    for i in range(5):
        for j in range(5 - i):
            k = 4 - i - j
            pts.append((i / 4.0, j / 4.0, k / 4.0))
    pts.append((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))
    return np.array(pts)


def _ball_bump_centers():
    pts = [(0.0, 0.0)]
    for j in range(5):
        th = 2.0 * math.pi * j / 5.0
        pts.append((0.45 * math.cos(th), 0.45 * math.sin(th)))
    for j in range(10):
        th = 2.0 * math.pi * j / 10.0
        pts.append((0.9 * math.cos(th), 0.9 * math.sin(th)))
    return np.array(pts)


class WeakStarMetric:
    """dist*(mu, nu) = sum_k w_k |int f_k dmu - int f_k dnu|, w_k = 2^-(k+1).

    Symmetric, triangle inequality, bounded by 1; zero exactly when the two
    representations integrate identically against every family member.
    """

    def __init__(self, space: StateSpace, funcs: Sequence[TestFunction]):
        self.space = space
        self.funcs = list(funcs)
        # halve 2^-k so that |integral difference| <= 2 sums below 1
        self.weights = np.array([2.0 ** (-(k + 1)) / 2.0 for k in range(len(self.funcs))])

    def evaluate_family(self, pts):
        """Stack f_k over the points: shape (K, npoints)."""
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1) if self.space.dim == 1 else pts.reshape(-1, self.space.dim)
        return np.stack([np.asarray(f(flat), dtype=float) for f in self.funcs])

    def features(self, mu: "Measure"):
        """Integrals of the family against mu, cached on the measure."""
        cached = mu._feature_cache.get(id(self))
        if cached is not None:
            return cached
        vals = self.evaluate_family(mu.points)
        feats = vals @ mu.weights
        mu._feature_cache[id(self)] = feats
        return feats

    def distance_features(self, fa, fb):
        return float(np.abs(np.asarray(fa) - np.asarray(fb)) @ self.weights)

    def distance(self, mu: "Measure", nu: "Measure"):
        if mu.space.kind != nu.space.kind:
            raise SpaceMismatchError(
                f"measures live on {mu.space.kind} and {nu.space.kind}"
            )
        return self.distance_features(self.features(mu), self.features(nu))


def default_metric(space: StateSpace) -> WeakStarMetric:
    if space.kind == "circle":
        funcs = _trig_family(2.0 * math.pi)
    elif space.kind == "interval":
        # half frequencies so the endpoints 0 and 1 are separated
        funcs = _trig_family(math.pi)
    elif space.kind == "torus2":
        funcs = _torus_family()
    elif space.kind == "simplex3":
        funcs = _bump_family(_simplex_bump_centers())
    elif space.kind == "planar-ball":
        funcs = _bump_family(_ball_bump_centers())
    else:
        raise NotImplementedError(space.kind)
    return WeakStarMetric(space, funcs)


def weak_star_distance(metric: WeakStarMetric, mu: "Measure", nu: "Measure") -> float:
    return metric.distance(mu, nu)


# ---------------------------------------------------------------------------
# measures


class Measure:
    """A Borel probability measure as weighted point masses.

    `points`: (n,) or (n, dim) float64; `weights`: (n,) nonnegative summing
    to 1 within 1e-12.  Lebesgue measure is represented by its reference
    quadrature rule and tagged `kind='lebesgue'`.
    """

    def __init__(self, space, points, weights, kind="point-masses", label=""):
        self.space = space
        pts = np.asarray(points, dtype=float)
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(w) != (pts.shape[0] if pts.ndim else 1):
            raise ValueError("points/weights length mismatch")
        if np.any(w < -WEIGHT_TOL):
            raise ValueError("negative mass")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"total mass {total} != 1")
        self.points = pts
        self.weights = w
        self.kind = kind
        self.label = label or kind
        self._feature_cache = {}

    def integrate(self, g):
        """Exact weighted sum of g over the representation."""
        flat = self.points.reshape(-1) if self.space.dim == 1 else self.points
        try:
            vals = np.asarray(g(flat), dtype=float)
            if vals.shape != (len(self.weights),):
                raise TypeError
        except Exception:
            vals = np.array([float(g(p)) for p in flat])
        return float(vals @ self.weights)

    def __repr__(self):
        return f"Measure({self.label!r}, {len(self.weights)} masses on {self.space.kind})"


def dirac(space, point) -> Measure:
    space.require(point)
    pts = [float(point)] if space.dim == 1 else [np.asarray(point, dtype=float)]
    return Measure(space, pts, [1.0], label=f"dirac:{point}")


def lebesgue(space) -> Measure:
    pts, w = space.quadrature()
    return Measure(space, pts, w, kind="lebesgue", label="lebesgue")


def point_masses(space, points, weights, label="", merge=True) -> Measure:
    """Point-mass measure; duplicates within 1e-12 are merged (keeps
    periodic-orbit measures canonical)."""
    if merge:
        kept_pts, kept_w = [], []
        for p, w in zip(points, weights):
            for i, q in enumerate(kept_pts):
                if space.distance(p, q) <= MERGE_TOL:
                    kept_w[i] += w
                    break
            else:
                kept_pts.append(p)
                kept_w.append(w)
        points, weights = kept_pts, kept_w
    pts = [float(p) for p in points] if space.dim == 1 else [np.asarray(p, float) for p in points]
    return Measure(space, pts, weights, label=label)


def mixture(components, label="mixture") -> Measure:
    """Convex mixture of measures: flattened weighted union of masses."""
    if not components:
        raise ValueError("empty mixture")
    space = components[0][1].space
    total = sum(c for c, _ in components)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mixture coefficients sum to {total} != 1")
    pts, w = [], []
    all_point_masses = True
    for coef, m in components:
        if coef < 0:
            raise ValueError("negative mixture coefficient")
        if m.space.kind != space.kind:
            raise SpaceMismatchError("mixture components on different spaces")
        if m.kind != "point-masses":
            all_point_masses = False
        for i in range(len(m.weights)):
            pts.append(m.points[i])
            w.append(coef * m.weights[i])
    if all_point_masses:
        return point_masses(space, pts, w, label=label)
    return Measure(space, pts, w, kind="mixture", label=label)


class EmpiricalMeasure(Measure):
    """Time average of Dirac masses along the first n orbit points.

    Stores the orbit points unmerged at uniform weight 1/n, so the update
    identity (n * m_n + delta_{f^n x}) / (n + 1) = m_{n+1} holds exactly at
    the representation level.  `merged()` gives the canonical point-mass
    form with duplicates combined.
    """

    def __init__(self, space, x0, orbit_points):
        n = orbit_points.shape[0]
        super().__init__(
            space,
            orbit_points,
            np.full(n, 1.0 / n),
            kind="empirical",
            label=f"empirical(n={n})",
        )
        self.x0 = x0
        self.horizon = n

    def merged(self) -> Measure:
        return point_masses(self.space, list(self.points), list(self.weights),
                            label=self.label + ":merged")


def empirical_measure(system: DynamicalSystem, x, n) -> EmpiricalMeasure:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    orb = orbit(system, x, n)
    return EmpiricalMeasure(system.space, x, orb.points)


def integrate(mu: Measure, g) -> float:
    return mu.integrate(g)


# ---------------------------------------------------------------------------
# limit sets of empirical measures


@dataclass
class LimitSetEstimate:
    """Cluster structure of empirical measures along a checkpoint schedule.

    `representatives` holds one checkpoint measure per cluster (the member
    with the largest horizon).  `spread` is the max pairwise dist* among
    tail-half checkpoints: a single cluster with small spread indicates
    convergence, several clusters indicate oscillation.
    """

    x0: object
    horizons: list
    checkpoint_measures: list
    features: np.ndarray  # (J, K) family integrals per checkpoint
    tail_start: int
    clusters: list  # lists of tail indices (into horizons)
    representatives: list
    representative_features: np.ndarray
    spread: float
    metric: WeakStarMetric = field(repr=False, default=None)


def limit_set_estimate(
    system: DynamicalSystem,
    x,
    schedule: Sequence[int],
    metric: Optional[WeakStarMetric] = None,
    cluster_tol: float = 0.01,
    keep_measures: bool = True,
) -> LimitSetEstimate:
    """Empirical measures at the scheduled horizons, clustered at cluster_tol.

    Clusters are the connected components of the tail-half checkpoints
    under dist* <= cluster_tol (single linkage), enumerated in ascending
    horizon order.  With keep_measures=False only the feature vectors are
    materialized (grid scans run the classification off features alone).
    """
    schedule = list(schedule)
    if len(schedule) < 3:
        raise ValueError("schedule needs >= 3 checkpoints")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    if metric is None:
        metric = default_metric(system.space)
    N = schedule[-1]
    orb = orbit(system, x, N)
    vals = metric.evaluate_family(orb.points)  # (K, N)
    csum = np.cumsum(vals, axis=1)
    idx = np.array(schedule) - 1
    feats = (csum[:, idx] / np.array(schedule, dtype=float)).T  # (J, K)

    measures = []
    if keep_measures:
        for j, n in enumerate(schedule):
            m = EmpiricalMeasure(system.space, x, orb.points[:n])
            m._feature_cache[id(metric)] = feats[j]
            measures.append(m)

    J = len(schedule)
    tail_start = J // 2
    tail = list(range(tail_start, J))
    dmat = np.zeros((len(tail), len(tail)))
    for a in range(len(tail)):
        for b in range(a + 1, len(tail)):
            d = metric.distance_features(feats[tail[a]], feats[tail[b]])
            dmat[a, b] = dmat[b, a] = d
    spread = float(dmat.max()) if len(tail) > 1 else 0.0

    # connected components under d <= cluster_tol, ascending horizon order
    unassigned = list(range(len(tail)))
    clusters = []
    while unassigned:
        seed = unassigned.pop(0)
        comp = [seed]
        frontier = [seed]
        while frontier:
            cur = frontier.pop(0)
            for other in list(unassigned):
                if dmat[cur, other] <= cluster_tol:
                    unassigned.remove(other)
                    comp.append(other)
                    frontier.append(other)
        clusters.append(sorted(tail[i] for i in comp))

    reps = [measures[c[-1]] for c in clusters] if keep_measures else []
    rep_feats = np.array([feats[c[-1]] for c in clusters])
    return LimitSetEstimate(
        x0=x,
        horizons=schedule,
        checkpoint_measures=measures,
        features=feats,
        tail_start=tail_start,
        clusters=clusters,
        representatives=reps,
        representative_features=rep_feats,
        spread=spread,
        metric=metric,
    )


def mixture_hull_distance(metric, feats, component_measures, ticks=21):
    """Min dist* from `feats` to the convex hull of the given measures,
    searched over the barycentric coefficient grid with `ticks` ticks."""
    comp = np.array([metric.features(m) for m in component_measures])
    k = len(component_measures)
    best = math.inf
    if k == 3:
        steps = ticks - 1
        for i in range(ticks):
            for j in range(ticks - i):
                c = np.array([i, j, steps - i - j], dtype=float) / steps
                d = metric.distance_features(feats, c @ comp)
                if d < best:
                    best = d
    else:
        # coarse generic fallback: vertices only
        for row in comp:
            best = min(best, metric.distance_features(feats, row))
    return best


# ---------------------------------------------------------------------------
# measure spec grammar:  dirac:<point> | orbit:<point>,<period> | lebesgue
#                        | mix:<c1>*<spec1>+<c2>*<spec2>+...


def _parse_point(text, space, position):
    parts = text.split(",")
    if space.dim == 1:
        if len(parts) != 1:
            raise MeasureSpecError("expected a single coordinate", position)
        return parse_coordinate(parts[0])
    if len(parts) != space.dim:
        raise MeasureSpecError(
            f"expected {space.dim} coordinates, got {len(parts)}", position
        )
    return np.array([float(Fraction(p) if "/" in p else float(p)) for p in parts])


def measure_from_spec(spec: str, space, system: Optional[DynamicalSystem] = None,
                      _position=0) -> Measure:
    """Build a measure from its spec string (the CLI contract grammar)."""
    spec = spec.strip()
    head, sep, arg = spec.partition(":")
    if head == "lebesgue" and not sep:
        return lebesgue(space)
    if head == "dirac":
        point = _parse_point(arg, space, _position + len("dirac:"))
        return dirac(space, point)
    if head == "orbit":
        parts = arg.rsplit(",", 1)
        if len(parts) != 2:
            raise MeasureSpecError("orbit spec needs <point>,<period>", _position)
        try:
            period = int(parts[1])
        except ValueError:
            raise MeasureSpecError(f"bad period {parts[1]!r}", _position) from None
        if period < 1:
            raise MeasureSpecError(f"period must be >= 1, got {period}", _position)
        if system is None:
            raise MeasureSpecError("orbit spec requires a system", _position)
        x0 = _parse_point(parts[0], space, _position + len("orbit:"))
        orb = orbit(system, x0, period + 1)
        closure = space.distance(orb.points[period], orb.points[0])
        if closure > PERIODIC_TOL:
            raise NonPeriodicOrbitError(
                f"orbit of {parts[0]} does not close after {period} steps "
                f"(gap {closure:.3g})"
            )
        pts = [orb.points[i] for i in range(period)]
        return point_masses(space, pts, [1.0 / period] * period, label=spec)
    if head == "mix":
        if "mix:" in arg:
            raise MeasureSpecError("nested mix specs are not supported",
                                   _position + spec.find("mix:", 4))
        terms = arg.split("+")
        comps = []
        offset = _position + len("mix:")
        for term in terms:
            coef_text, star, sub = term.partition("*")
            if not star:
                raise MeasureSpecError("mix term needs <coef>*<spec>", offset)
            try:
                coef = float(coef_text)
            except ValueError:
                raise MeasureSpecError(f"bad coefficient {coef_text!r}", offset) from None
            comps.append((coef, measure_from_spec(sub, space, system,
                                                  _position=offset + len(coef_text) + 1)))
            offset += len(term) + 1
        return mixture(comps, label=spec)
    raise MeasureSpecError(f"unknown measure spec {spec!r}", _position)
