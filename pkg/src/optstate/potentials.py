"""Subadditive potentials and their growth-rate estimators.

A potential is a sequence phi_n of continuous functions with

    phi_{n+m}(x) <= phi_n(x) + phi_m(f^n x),     phi_0 = 0.

Built-in kinds: additive Birkhoff sums of a bounded g, log operator norms
of matrix cocycle products, the truncation max(-n, phi_n), and tabulated
rate sequences for adversarial tests.  Growth-rate reports estimate the
limsup/liminf of phi_n / n over a geometric checkpoint schedule.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import PotentialSpecError, SingularCollapseWarning
from .measures import geometric_schedule
from .spaces import low_discrepancy_points
from .systems import DynamicalSystem, orbit

SUBADDITIVITY_TOL = 1e-9
LEMMA_SUB_TOL = 1e-6


def operator_norm(M) -> float:
    """Operator 2-norm: singular values for d <= 3, else power iteration
    (100 iterations, tolerance 1e-12, deterministic start)."""
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    if d <= 3:
        return float(np.linalg.svd(M, compute_uv=False)[0])
    B = M.T @ M
    v = np.ones(d) / math.sqrt(d)
    for _ in range(100):
        w = B @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        w = w / nw
        if float(np.linalg.norm(w - v)) < 1e-12:
            v = w
            break
        v = w
    return float(math.sqrt(float(v @ (B @ v))))


def _batched_sigma_max(prods) -> np.ndarray:
    d = prods.shape[1]
    if d <= 3:
        return np.linalg.svd(prods, compute_uv=False)[:, 0]
    return np.array([operator_norm(P) for P in prods])


class SubadditivePotential:
    """Base interface: evaluate(system, x, n) and a batched `series`."""

    kind = "custom"

    def __init__(self, label):
        self.label = label

    def evaluate(self, system, x, n) -> float:
        if n < 0:
            raise ValueError(f"need n >= 0, got {n}")
        if n == 0:
            return 0.0
        return float(self.series(system, x, [n])[0])

    def series(self, system, x, ns: Sequence[int]) -> np.ndarray:
        """phi_n(x) for each horizon in ns (ascending, >= 1)."""
        raise NotImplementedError

    def negate(self):
        raise PotentialSpecError(
            f"negation of a {self.kind} potential is not subadditive"
        )

    def __repr__(self):
        return f"{type(self).__name__}({self.label!r})"


class BirkhoffPotential(SubadditivePotential):
    """Additive potential phi_n(x) = sum_{i<n} g(f^i x)."""

    kind = "additive"

    def __init__(self, g, label="birkhoff"):
        super().__init__(label)
        self.g = g

    def series(self, system, x, ns):
        ns = list(ns)
        N = ns[-1]
        orb = orbit(system, x, N)
        vals = np.asarray(self.g(orb.points), dtype=float)
        csum = np.cumsum(vals)
        return csum[np.array(ns) - 1]

    def negate(self):
        g = self.g
        return BirkhoffPotential(lambda pts: -np.asarray(g(pts), dtype=float),
                                 label=f"neg:{self.label}")


class CocyclePotential(SubadditivePotential):
    """phi_n(x) = log || A(f^{n-1} x) ... A(x) ||_2.

    Products are accumulated left-multiplicatively with periodic Frobenius
    renormalization (the factored-out norm goes into a log accumulator),
    so entries never under/overflow.  Subadditivity follows from
    submultiplicativity of the operator norm.
    """

    kind = "cocycle"

    def __init__(self, matrix_fn, dim, label="cocycle", vectorized=False,
                 renorm_every=1):
        super().__init__(label)
        self.matrix_fn = matrix_fn
        self.dim = dim
        self.vectorized = vectorized
        self.renorm_every = renorm_every

    def matrix_stack(self, points) -> np.ndarray:
        if self.vectorized:
            mats = np.asarray(self.matrix_fn(points), dtype=float)
        else:
            pts = points if points.ndim > 1 else points.reshape(-1)
            mats = np.array([self.matrix_fn(p) for p in pts], dtype=float)
        if mats.shape[1:] != (self.dim, self.dim):
            raise ValueError(f"matrix family returned shape {mats.shape}")
        if not np.all(np.isfinite(mats)):
            raise ValueError(f"matrix family of {self.label} produced nonfinite entries")
        return mats

    def series(self, system, x, ns):
        ns = list(ns)
        N = ns[-1]
        orb = orbit(system, x, N)
        mats = self.matrix_stack(orb.points)
        logacc, prods, collapsed = kernels.cocycle_checkpoint_products(
            mats, np.asarray(ns, dtype=np.int64), self.renorm_every
        )
        if collapsed >= 0:
            warnings.warn(
                f"cocycle {self.label}: product norm underflowed at factor {collapsed}",
                SingularCollapseWarning,
                stacklevel=2,
            )
        sig = _batched_sigma_max(prods)
        out = np.empty(len(ns))
        for j in range(len(ns)):
            if not math.isfinite(logacc[j]) or sig[j] == 0.0:
                out[j] = -math.inf
            else:
                out[j] = logacc[j] + math.log(sig[j])
        return out


class TruncatedPotential(SubadditivePotential):
    """psi_n(x) = max(-n, phi_n(x)); subadditive whenever phi is, and
    (1/n) psi_n >= -1 everywhere."""

    kind = "truncated"

    def __init__(self, inner: SubadditivePotential):
        super().__init__(f"trunc:{inner.label}")
        self.inner = inner

    def series(self, system, x, ns):
        raw = self.inner.series(system, x, ns)
        return np.maximum(-np.asarray(list(ns), dtype=float), raw)


class TabulatedPotential(SubadditivePotential):
    """phi_n(x) = n * rate(n), constant in x (cheap counterexample injection)."""

    kind = "tabulated"

    def __init__(self, rate_fn: Callable[[int], float], label="tabulated"):
        super().__init__(label)
        self.rate_fn = rate_fn

    def series(self, system, x, ns):
        return np.array([n * float(self.rate_fn(n)) for n in ns])

    def negate(self):
        rate_fn = self.rate_fn
        return TabulatedPotential(lambda n: -rate_fn(n), label=f"neg:{self.label}")


def birkhoff_potential(g, label="birkhoff") -> BirkhoffPotential:
    return BirkhoffPotential(g, label=label)


def cocycle_potential(matrix_fn, dim, label="cocycle", vectorized=False) -> CocyclePotential:
    return CocyclePotential(matrix_fn, dim, label=label, vectorized=vectorized)


def truncate(phi: SubadditivePotential) -> TruncatedPotential:
    return TruncatedPotential(phi)


def evaluate(phi: SubadditivePotential, system, x, n) -> float:
    return phi.evaluate(system, x, n)


def _nth_point(system: DynamicalSystem, x, n):
    """f^n(x) propagated consistently with `orbit` (exact on rationals)."""
    if n == 0:
        return x
    if isinstance(x, Fraction) and system.label == "doubling":
        q = x.denominator
        return Fraction((x.numerator * pow(2, n, q)) % q, q)
    y = x
    for _ in range(n):
        y = system.step_fn(y)
    return y


def _sample_point(system, rng):
    space = system.space
    if hasattr(space, "random_rational"):
        # circle: rational points with a large odd denominator follow the
        # true (non-collapsing) dynamics under the doubling map
        return space.random_rational(rng)
    return space.random_point(rng)


@dataclass
class SubadditivityReport:
    label: str
    samples: int
    n_max: int
    seed: int
    max_violation: float
    min_defect: float
    worst: tuple  # (x, n, m) at max violation
    tolerance: float = SUBADDITIVITY_TOL

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def check_subadditivity(phi, system, sample_count=1000, n_max=1000, seed=42,
                        tolerance=SUBADDITIVITY_TOL) -> SubadditivityReport:
    """Fuzz phi_{n+m}(x) <= phi_n(x) + phi_m(f^n x) on seeded triples."""
    if sample_count < 1 or n_max < 2:
        raise ValueError("need sample_count >= 1 and n_max >= 2")
    rng = np.random.default_rng(seed)
    max_violation = -math.inf
    min_defect = math.inf
    worst = None
    for _ in range(sample_count):
        x = _sample_point(system, rng)
        n = int(rng.integers(1, n_max))
        m = int(rng.integers(1, n_max - n + 1))
        both = phi.series(system, x, [n, n + m])
        phi_n, phi_nm = float(both[0]), float(both[1])
        y = _nth_point(system, x, n)
        phi_m = phi.evaluate(system, y, m)
        defect = phi_nm - phi_n - phi_m
        if defect > max_violation:
            max_violation = defect
            worst = (x, n, m)
        min_defect = min(min_defect, defect)
    return SubadditivityReport(
        label=phi.label,
        samples=sample_count,
        n_max=n_max,
        seed=seed,
        max_violation=max_violation,
        min_defect=min_defect,
        worst=worst,
        tolerance=tolerance,
    )


@dataclass
class LemmaSubReport:
    """Check of the block bound phi_n(x) <= 4*C1 + sum_{i<n} (1/l) phi_l(f^i x),
    with C1 the estimated sup of |phi_j| over j <= 2l."""

    label: str
    l: int
    c1: float
    c: float
    pairs: int
    max_violation: float
    worst: tuple  # (x, n)
    tolerance: float = LEMMA_SUB_TOL

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def _phi_block_values(phi, system, x, n, l):
    """phi_l(f^i x) for i = 0..n-1, consistently with the orbit of x."""
    if isinstance(phi, BirkhoffPotential):
        orb = orbit(system, x, n + l)
        vals = np.asarray(phi.g(orb.points), dtype=float)
        csum = np.concatenate([[0.0], np.cumsum(vals)])
        return csum[l : n + l] - csum[0:n]
    if isinstance(phi, CocyclePotential):
        orb = orbit(system, x, n + l - 1)
        mats = phi.matrix_stack(orb.points)
        logacc, prods = kernels.window_products(mats, l)
        sig = _batched_sigma_max(prods)
        with np.errstate(divide="ignore"):
            return logacc[:n] + np.log(sig[:n])
    if isinstance(phi, TruncatedPotential):
        return np.maximum(-float(l), _phi_block_values(phi.inner, system, x, n, l))
    if isinstance(phi, TabulatedPotential):
        return np.full(n, phi.evaluate(system, x, l))
    # generic: explicit evaluation along the orbit
    orb = orbit(system, x, n)
    pts = orb.points if system.space.dim > 1 else orb.points.reshape(-1)
    return np.array([phi.evaluate(system, p, l) for p in pts])


def lemma_sub_check(phi, system, l, points, n_list,
                    tolerance=LEMMA_SUB_TOL, c1_grid_size=1000) -> LemmaSubReport:
    """Verify the block bound for every sampled (x, n).

    C1 is estimated as max |phi_j| over j <= 2l on a low-discrepancy grid
    plus the sample points; the estimate is a lower bound of the true sup,
    which makes a verified inequality only stronger.
    """
    if l < 1:
        raise ValueError(f"need l >= 1, got {l}")
    grid = low_discrepancy_points(system.space, c1_grid_size) + list(points)
    js = list(range(1, 2 * l + 1))
    c1 = 0.0
    for x in grid:
        vals = phi.series(system, x, js)
        c1 = max(c1, float(np.max(np.abs(vals))))
    c = 4.0 * c1

    max_violation = -math.inf
    worst = None
    pairs = 0
    for x in points:
        n_arr = sorted(set(int(n) for n in n_list))
        lhs = phi.series(system, x, n_arr)
        n_top = n_arr[-1]
        blocks = _phi_block_values(phi, system, x, n_top, l)
        block_csum = np.concatenate([[0.0], np.cumsum(blocks)])
        for lhs_val, n in zip(lhs, n_arr):
            rhs = c + block_csum[n] / l
            v = float(lhs_val) - rhs
            pairs += 1
            if v > max_violation:
                max_violation = v
                worst = (x, n)
    return LemmaSubReport(
        label=phi.label, l=l, c1=c1, c=c, pairs=pairs,
        max_violation=max_violation, worst=worst, tolerance=tolerance,
    )


@dataclass
class GrowthRateReport:
    """Rates (1/n) phi_n(x) at checkpoint horizons.

    largest/smallest estimates are the max/min over checkpoints in the
    tail window [ceil(N/2), N]: exact for convergent series, conservative
    for oscillating ones.  `optimal` flags largest < 0.
    """

    x0: object
    horizon: int
    horizons: list
    rates: np.ndarray
    tail_from: int
    largest: float
    smallest: float
    optimal: bool
    label: str

    @property
    def series(self):
        return list(zip(self.horizons, self.rates))


def growth_report(phi, system, x, horizon, schedule=None) -> GrowthRateReport:
    """Growth-rate estimates for phi along the orbit of x up to `horizon`."""
    if horizon < 200:
        raise ValueError(f"need horizon >= 200, got {horizon}")
    ns = list(schedule) if schedule is not None else geometric_schedule(horizon)
    if ns[-1] != horizon:
        raise ValueError("schedule must end at the horizon")
    values = phi.series(system, x, ns)
    rates = np.asarray(values, dtype=float) / np.asarray(ns, dtype=float)
    tail_from = (horizon + 1) // 2
    tail = rates[[i for i, n in enumerate(ns) if n >= tail_from]]
    largest = float(np.max(tail))
    smallest = float(np.min(tail))
    return GrowthRateReport(
        x0=x, horizon=horizon, horizons=ns, rates=rates, tail_from=tail_from,
        largest=largest, smallest=smallest, optimal=bool(largest < 0.0),
        label=phi.label,
    )
