"""Compact state spaces: membership, intrinsic metrics, grids and quadrature.

Points on 1-D spaces are floats or `fractions.Fraction` (exact rational
points survive maps that preserve rationality, e.g. the doubling map).
Points on multi-dimensional spaces are numpy arrays of shape ``(dim,)``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainViolationError

MEMBERSHIP_TOL = 1e-9
SIMPLEX_SUM_TOL = 1e-12


def as_float_array(x):
    """Coerce a point to a float scalar (1-D spaces) or float64 array."""
    if isinstance(x, (float, int, Fraction)):
        return float(x)
    return np.asarray(x, dtype=float)


def _vdc(i, base):
    """Van der Corput radical inverse of integer i in the given base."""
    v, denom = 0.0, 1.0
    while i > 0:
        denom *= base
        i, rem = divmod(i, base)
        v += rem / denom
    return v


class StateSpace:
    """Base class. Subclasses are immutable after construction."""

    kind = "abstract"
    dim = 0

    def contains(self, x, tol=MEMBERSHIP_TOL):
        raise NotImplementedError

    def project(self, x):
        """Map a raw iterate back onto the space (wrap / renormalize).

        Raises DomainViolationError for points that are genuinely outside
        (beyond roundoff) on non-periodic bounded spaces, and
        propagates nothing silently: clamping is limited to roundoff scale.
        """
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def require(self, x, tol=MEMBERSHIP_TOL):
        if not self.contains(x, tol):
            raise DomainViolationError(f"point {x!r} is not in {self.kind}")

    def grid(self, resolution, exclude=()):
        """Deterministic cell-center grid; `exclude` is a list of
        (center, radius) balls whose cells are dropped."""
        raise NotImplementedError

    def quadrature(self):
        """(points, weights) of the reference quadrature for Lebesgue measure."""
        raise NotImplementedError

    def random_point(self, rng):
        raise NotImplementedError

    def _filter_excluded(self, centers, exclude):
        if not exclude:
            return centers
        kept = []
        for c in centers:
            if all(self.distance(c, p) >= r for p, r in exclude):
                kept.append(c)
        return kept

    def __repr__(self):
        return f"{type(self).__name__}()"


class Circle(StateSpace):
    """The circle R/Z with representatives in [0, 1)."""

    kind = "circle"
    dim = 1

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = float(x)
        return math.isfinite(x) and 0.0 <= x < 1.0

    def project(self, x):
        y = x - math.floor(x)
        if isinstance(y, float) and not math.isfinite(y):
            raise DomainViolationError(f"nonfinite circle point {x!r}")
        return y

    def distance(self, x, y):
        d = abs(float(x) - float(y))
        return min(d, 1.0 - d)

    def grid(self, resolution, exclude=()):
        # Exact rational centers (2i+1)/(2G): orbits under rational maps
        # (doubling) then follow the true dynamics of the cell center.
        centers = [Fraction(2 * i + 1, 2 * resolution) for i in range(resolution)]
        return self._filter_excluded(centers, exclude)

    def quadrature(self, n=2048):
        pts = (np.arange(n) + 0.5) / n
        return pts, np.full(n, 1.0 / n)

    def random_point(self, rng):
        return float(rng.random())

    def random_rational(self, rng, denominator=999983):
        """Uniform rational point p/q with fixed odd prime denominator.

        Such points have long true periodic orbits under the doubling map,
        so finite-precision iteration stays on the genuine dynamics.
        """
        return Fraction(int(rng.integers(1, denominator)), denominator)


class Interval(StateSpace):
    """The unit interval [0, 1]."""

    kind = "interval"
    dim = 1

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = float(x)
        return math.isfinite(x) and -tol <= x <= 1.0 + tol

    def project(self, x):
        xf = float(x)
        if not math.isfinite(xf):
            raise DomainViolationError(f"nonfinite interval point {x!r}")
        if xf < -MEMBERSHIP_TOL or xf > 1.0 + MEMBERSHIP_TOL:
            raise DomainViolationError(f"interval point escaped: {x!r}")
        if isinstance(x, Fraction):
            return min(max(x, Fraction(0)), Fraction(1))
        return min(max(xf, 0.0), 1.0)

    def distance(self, x, y):
        return abs(float(x) - float(y))

    def grid(self, resolution, exclude=()):
        centers = [(i + 0.5) / resolution for i in range(resolution)]
        return self._filter_excluded(centers, exclude)

    def quadrature(self, n=2048):
        pts = (np.arange(n) + 0.5) / n
        return pts, np.full(n, 1.0 / n)

    def random_point(self, rng):
        return float(rng.random())


class Torus2(StateSpace):
    """The 2-torus (R/Z)^2 with per-coordinate wraparound."""

    kind = "torus2"
    dim = 2

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        return x.shape == (2,) and bool(np.all(np.isfinite(x)) and np.all((x >= 0) & (x < 1)))

    def project(self, x):
        y = np.asarray(x, dtype=float)
        y = y - np.floor(y)
        if not np.all(np.isfinite(y)):
            raise DomainViolationError(f"nonfinite torus point {x!r}")
        return y

    def distance(self, x, y):
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        d = np.minimum(d, 1.0 - d)
        return float(math.sqrt(d[0] * d[0] + d[1] * d[1]))

    def grid(self, resolution, exclude=()):
        side = (np.arange(resolution) + 0.5) / resolution
        centers = [np.array([u, v]) for u in side for v in side]
        return self._filter_excluded(centers, exclude)

    def quadrature(self, n=64):
        side = (np.arange(n) + 0.5) / n
        uu, vv = np.meshgrid(side, side, indexing="ij")
        pts = np.column_stack([uu.ravel(), vv.ravel()])
        return pts, np.full(n * n, 1.0 / (n * n))

    def random_point(self, rng):
        return rng.random(2)


class Simplex3(StateSpace):
    """The 2-simplex {x in R^3 : x_i >= 0, sum x_i = 1}, Euclidean metric."""

    kind = "simplex3"
    dim = 3

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape != (3,) or not np.all(np.isfinite(x)):
            return False
        return bool(np.all(x >= -tol) and abs(float(x.sum()) - 1.0) <= max(tol, SIMPLEX_SUM_TOL))

    def project(self, x):
        y = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(y)):
            raise DomainViolationError(f"nonfinite simplex point {x!r}")
        y = np.maximum(y, 0.0)
        s = float(y[0] + y[1] + y[2])
        if s <= 0.0:
            raise DomainViolationError(f"simplex point collapsed to zero: {x!r}")
        return y / s

    def distance(self, x, y):
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return float(math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]))

    def grid(self, resolution, exclude=()):
        # Cell centers of the uniform (u, v) grid restricted to the
        # barycentric triangle u, v >= 0, u + v <= 1; each kept cell has
        # equal area, so cell fractions approximate normalized Lebesgue
        # (surface) measure on the simplex.
        centers = []
        for i in range(resolution):
            for j in range(resolution):
                u = (i + 0.5) / resolution
                v = (j + 0.5) / resolution
                if u + v < 1.0:
                    centers.append(np.array([u, v, 1.0 - u - v]))
        return self._filter_excluded(centers, exclude)

    def quadrature(self, n=64):
        pts = self.grid(n)
        arr = np.array(pts)
        return arr, np.full(len(pts), 1.0 / len(pts))

    def random_point(self, rng):
        return rng.dirichlet((1.0, 1.0, 1.0))

    def boundary_sample(self, per_edge=100):
        """Deterministic sample of the three boundary edges (incl. vertices)."""
        verts = np.eye(3)
        pts = []
        for a in range(3):
            b = (a + 1) % 3
            for i in range(per_edge):
                t = i / per_edge
                pts.append((1.0 - t) * verts[a] + t * verts[b])
        return np.array(pts)


class PlanarBall(StateSpace):
    """The closed unit ball in R^2."""

    kind = "planar-ball"
    dim = 2

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape != (2,) or not np.all(np.isfinite(x)):
            return False
        return float(x[0] * x[0] + x[1] * x[1]) <= (1.0 + tol) ** 2

    def project(self, x):
        y = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(y)):
            raise DomainViolationError(f"nonfinite planar point {x!r}")
        r = math.sqrt(float(y[0] * y[0] + y[1] * y[1]))
        if r > 1.0 + MEMBERSHIP_TOL:
            # escaping the ball signals wrong dynamics; do not clamp
            raise DomainViolationError(f"point escaped the unit ball: {x!r}")
        if r > 1.0:
            y = y / r
        return y

    def distance(self, x, y):
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return float(math.sqrt(d[0] * d[0] + d[1] * d[1]))

    def grid(self, resolution, exclude=()):
        side = -1.0 + (2.0 * np.arange(resolution) + 1.0) / resolution
        centers = [
            np.array([u, v])
            for u in side
            for v in side
            if u * u + v * v <= 1.0
        ]
        return self._filter_excluded(centers, exclude)

    def quadrature(self, n=64):
        pts = self.grid(n)
        arr = np.array(pts)
        return arr, np.full(len(pts), 1.0 / len(pts))

    def random_point(self, rng):
        while True:
            p = 2.0 * rng.random(2) - 1.0
            if p[0] * p[0] + p[1] * p[1] <= 1.0:
                return p


_SPACES = {
    "circle": Circle,
    "interval": Interval,
    "torus2": Torus2,
    "simplex3": Simplex3,
    "planar-ball": PlanarBall,
}


def space_by_kind(kind):
    from .errors import UnknownNameError

    try:
        return _SPACES[kind]()
    except KeyError:
        raise UnknownNameError(kind, _SPACES, what="space kind") from None


def low_discrepancy_points(space, count):
    """Deterministic quasi-uniform points (van der Corput / Halton)."""
    if space.dim == 1:
        return [_vdc(i + 1, 2) for i in range(count)]
    if space.kind == "torus2":
        return [np.array([_vdc(i + 1, 2), _vdc(i + 1, 3)]) for i in range(count)]
    if space.kind == "simplex3":
        pts = []
        i = 1
        while len(pts) < count:
            u, v = _vdc(i, 2), _vdc(i, 3)
            if u + v < 1.0:
                pts.append(np.array([u, v, 1.0 - u - v]))
            i += 1
        return pts
    if space.kind == "planar-ball":
        pts = []
        i = 1
        while len(pts) < count:
            p = np.array([2.0 * _vdc(i, 2) - 1.0, 2.0 * _vdc(i, 3) - 1.0])
            if p[0] ** 2 + p[1] ** 2 <= 1.0:
                pts.append(p)
            i += 1
        return pts
    raise NotImplementedError(space.kind)
