"""Dynamical systems: continuous self-maps of compact state spaces.

A `DynamicalSystem` bundles a `StateSpace` with a deterministic one-step
map.  Orbits are materialized as float64 arrays; systems whose maps
preserve rational circle points (doubling, rational rotation) iterate
rationals exactly, which keeps designated periodic orbits on their true
cycles instead of collapsing to the dyadic fixed point that plain
floating-point iteration produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import (
    NonfiniteStateError,
    ParameterRegimeError,
    ResourceLimitError,
    UnknownNameError,
)
from .spaces import Circle, Interval, Simplex3, StateSpace

DEFAULT_ORBIT_CAP = 20_000_000

# rationals with denominators up to this bound convert exactly to float64
# and fit the int64 modular kernel
_RATIONAL_KERNEL_MAX_DEN = 2**53


@dataclass(frozen=True)
class Orbit:
    """A finite orbit (x0, f x0, ..., f^{n-1} x0).

    `points` is float64 of shape (n,) for 1-D spaces and (n, dim)
    otherwise; points[i+1] = f(points[i]) exactly as computed.
    """

    space: StateSpace
    x0: object
    points: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class DynamicalSystem:
    """A continuous self-map f of a compact state space.

    `step_fn` maps a point to a point (already wrapped/projected into the
    space).  `orbit_fn`, when present, produces the whole orbit array in
    one call through a compiled kernel and must agree with `step_fn`
    bit-for-bit.
    """

    space: StateSpace
    step_fn: Callable
    label: str
    orbit_fn: Optional[Callable] = field(default=None, repr=False)

    def step(self, x):
        self.space.require(x)
        return self.step_fn(x)

    def orbit(self, x0, n, cap=DEFAULT_ORBIT_CAP):
        return orbit(self, x0, n, cap=cap)


def step(system: DynamicalSystem, x):
    """One application of f, with a membership check on the input."""
    return system.step(x)


def orbit(system: DynamicalSystem, x0, n, cap=DEFAULT_ORBIT_CAP) -> Orbit:
    """The first n orbit points of x0, as an Orbit."""
    if n < 1:
        raise ValueError(f"orbit length must be >= 1, got {n}")
    if n > cap:
        raise ResourceLimitError(f"orbit length {n} exceeds cap {cap}")
    system.space.require(x0)
    if system.orbit_fn is not None:
        pts = system.orbit_fn(x0, n)
        if pts is not None:
            return Orbit(system.space, x0, pts)
    # generic path: iterate step_fn
    x = x0
    if system.space.dim == 1:
        pts = np.empty(n, dtype=np.float64)
        for i in range(n):
            pts[i] = float(x)
            if i + 1 < n:
                x = system.step_fn(x)
    else:
        pts = np.empty((n, system.space.dim), dtype=np.float64)
        for i in range(n):
            pts[i] = np.asarray(x, dtype=float)
            if i + 1 < n:
                x = system.step_fn(x)
    if not np.all(np.isfinite(pts)):
        raise NonfiniteStateError(f"orbit of {system.label} left finite range")
    return Orbit(system.space, x0, pts)


# ---------------------------------------------------------------------------
# built-in circle/interval maps


def doubling() -> DynamicalSystem:
    """x -> 2x mod 1 on the circle; exact on rational points."""
    space = Circle()

    def step_fn(x):
        y = 2 * x if isinstance(x, Fraction) else 2.0 * x
        return y - math.floor(y)

    def orbit_fn(x0, n):
        if isinstance(x0, Fraction):
            if x0.denominator <= _RATIONAL_KERNEL_MAX_DEN:
                p = kernels.doubling_rational_orbit(
                    int(x0.numerator), int(x0.denominator), n
                )
                return p / float(x0.denominator)
            return None  # huge denominator: generic exact loop
        return kernels.doubling_float_orbit(float(x0), n)

    return DynamicalSystem(space, step_fn, "doubling", orbit_fn)


def rotation(alpha) -> DynamicalSystem:
    """x -> x + alpha mod 1 on the circle."""
    space = Circle()
    alpha_f = float(alpha)
    alpha_exact = alpha if isinstance(alpha, Fraction) else None

    def step_fn(x):
        if isinstance(x, Fraction) and alpha_exact is not None:
            y = x + alpha_exact
        else:
            y = float(x) + alpha_f
        return y - math.floor(y)

    def orbit_fn(x0, n):
        if isinstance(x0, Fraction) and alpha_exact is not None:
            return None  # exact loop
        return kernels.rotation_orbit(float(x0), alpha_f, n)

    label = f"rotation:{alpha}"
    return DynamicalSystem(space, step_fn, label, orbit_fn)


def interval_halving() -> DynamicalSystem:
    """x -> x/2 on [0, 1]."""
    space = Interval()

    def step_fn(x):
        return x / 2

    def orbit_fn(x0, n):
        if isinstance(x0, Fraction):
            return None
        return kernels.halving_orbit(float(x0), n)

    return DynamicalSystem(space, step_fn, "interval-halving", orbit_fn)


# ---------------------------------------------------------------------------
# flow-derived maps


def flow_time_tau_map(field, space, tau, substeps=10, label="flow") -> DynamicalSystem:
    """Time-tau map of an ODE field via classical fixed-step RK4.

    After every substep the state is projected back onto the space
    (renormalization on simplex3, wraparound on periodic spaces).  NaN or
    infinite states raise NonfiniteStateError.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    h = tau / substeps

    def step_fn(x):
        y = np.asarray(x, dtype=float) if space.dim > 1 else float(x)
        for _ in range(substeps):
            k1 = field(y)
            k2 = field(y + 0.5 * h * k1)
            k3 = field(y + 0.5 * h * k2)
            k4 = field(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            bad = not math.isfinite(y) if space.dim == 1 else not np.all(np.isfinite(y))
            if bad:
                raise NonfiniteStateError(f"integration of {label} produced nonfinite state")
            y = space.project(y)
        return y

    return DynamicalSystem(space, step_fn, label)


def may_leonard(alpha, beta, tau, substeps=10) -> DynamicalSystem:
    """Time-tau map of the three-species competition field

        dx_i/dt = x_i (1 - x_i - alpha x_{i+1} - beta x_{i-1})   (mod 3)

    on simplex3, with per-substep renormalization.  The parameter regime
    alpha + beta > 2, alpha < 1 < beta makes the boundary cycle
    e1 -> e2 -> e3 attracting, so interior orbits have nonconvergent
    time averages.
    """
    if not (alpha + beta > 2 and alpha < 1 < beta):
        raise ParameterRegimeError(
            f"need alpha + beta > 2 and alpha < 1 < beta, got alpha={alpha}, beta={beta}"
        )
    if tau <= 0 or substeps < 1:
        raise ParameterRegimeError(f"need tau > 0 and substeps >= 1, got {tau}, {substeps}")
    space = Simplex3()
    a, b, t_, s_ = float(alpha), float(beta), float(tau), int(substeps)

    def step_fn(x):
        pts = kernels.may_leonard_orbit(np.asarray(x, dtype=float), a, b, t_, s_, 2)
        y = pts[1]
        if not np.all(np.isfinite(y)):
            raise NonfiniteStateError("may-leonard step produced nonfinite state")
        return y

    def orbit_fn(x0, n):
        return kernels.may_leonard_orbit(np.asarray(x0, dtype=float), a, b, t_, s_, n)

    label = f"may-leonard:{alpha},{beta},{tau}"
    return DynamicalSystem(space, step_fn, label, orbit_fn)


# ---------------------------------------------------------------------------
# name-based constructors (CLI contract)


def parse_coordinate(text):
    """'1/3' -> Fraction(1, 3); '0.25' -> 0.25."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return float(text)


def system_from_name(name: str) -> DynamicalSystem:
    """Resolve `doubling`, `rotation:<alpha>`, `interval-halving`,
    `may-leonard:<alpha>,<beta>,<tau>`."""
    head, _, arg = name.partition(":")
    if head == "doubling" and not arg:
        return doubling()
    if head == "interval-halving" and not arg:
        return interval_halving()
    if head == "rotation" and arg:
        return rotation(parse_coordinate(arg))
    if head == "may-leonard" and arg:
        parts = arg.split(",")
        if len(parts) != 3:
            raise UnknownNameError(name, _SYSTEM_NAMES, what="system")
        a, b, t = (float(p) for p in parts)
        return may_leonard(a, b, t)
    raise UnknownNameError(name, _SYSTEM_NAMES, what="system")


_SYSTEM_NAMES = (
    "doubling",
    "rotation:<alpha>",
    "interval-halving",
    "may-leonard:<alpha>,<beta>,<tau>",
)
