"""Named scenarios: systems, potentials, reference measures and attractors.

A scenario bundles everything a CLI run or verification suite needs.  The
scenario names, potential spec strings and measure spec strings used here
are the external contract; every named potential is fuzz-checked for
subadditivity at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .basins import AttractorSpec
from .errors import (
    NeighborhoodOverlapError,
    NonPeriodicOrbitError,
    OptstateError,
    UnknownNameError,
)
from .measures import Measure, lebesgue, measure_from_spec, mixture, dirac
from .potentials import (
    BirkhoffPotential,
    CocyclePotential,
    SubadditivePotential,
    check_subadditivity,
    truncate,
)
from .systems import (
    DynamicalSystem,
    doubling,
    may_leonard,
    orbit,
    rotation,
)

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0
PERIODIC_TOL = 1e-9


def smoothstep_down(d, radius):
    """Cubic blend from 1 at d = 0 to 0 at d >= radius (C^1, Lipschitz
    3/(2 radius))."""
    t = np.clip(np.asarray(d, dtype=float) / radius, 0.0, 1.0)
    return 1.0 - (3.0 * t * t - 2.0 * t * t * t)


def _circle_set_distance(pts, targets):
    pts = np.asarray(pts, dtype=float).reshape(-1)
    d = np.full(pts.shape, np.inf)
    for t in targets:
        dt = np.abs(pts - float(t))
        dt = np.minimum(dt, 1.0 - dt)
        d = np.minimum(d, dt)
    return d


def _euclid_set_distance(pts, targets):
    pts = np.asarray(pts, dtype=float)
    d = np.full(pts.shape[0], np.inf)
    for t in targets:
        dt = np.sqrt(((pts - np.asarray(t, dtype=float)) ** 2).sum(axis=1))
        d = np.minimum(d, dt)
    return d


# ---------------------------------------------------------------------------
# g functions and matrix families (potential spec registries)


def g_cos(pts):
    return np.cos(2.0 * math.pi * np.asarray(pts, dtype=float))


def g_one(pts):
    return np.ones(np.asarray(pts, dtype=float).reshape(-1).shape[0])


G_FUNCTIONS: dict = {
    "cos": g_cos,
    "one": g_one,
}


def _mats_diag_const(pts):
    n = np.asarray(pts, dtype=float).reshape(-1).shape[0]
    m = np.zeros((n, 2, 2))
    m[:, 0, 0] = 0.5
    m[:, 1, 1] = 0.25
    return m


def _mats_rot_scaled(pts):
    th = 2.0 * math.pi * np.asarray(pts, dtype=float).reshape(-1)
    s = math.exp(-1.0)
    m = np.empty((th.shape[0], 2, 2))
    m[:, 0, 0] = s * np.cos(th)
    m[:, 0, 1] = -s * np.sin(th)
    m[:, 1, 0] = s * np.sin(th)
    m[:, 1, 1] = s * np.cos(th)
    return m


def _mats_diag_cos(pts):
    x = np.asarray(pts, dtype=float).reshape(-1)
    m = np.zeros((x.shape[0], 2, 2))
    m[:, 0, 0] = np.exp(-1.0 + 0.5 * np.cos(2.0 * math.pi * x))
    m[:, 1, 1] = math.exp(-2.0)
    return m


MATRIX_FAMILIES: dict = {
    "diag-const": (_mats_diag_const, 2),
    "rot-scaled": (_mats_rot_scaled, 2),
    "diag-cos": (_mats_diag_cos, 2),
}


# ---------------------------------------------------------------------------
# scenario construction


@dataclass
class Scenario:
    name: str
    system: DynamicalSystem
    potentials: dict
    measures: dict
    attractors: dict
    doc: str
    params: dict = field(default_factory=dict)
    g_functions: dict = field(default_factory=dict)

    def measure(self, spec: str) -> Measure:
        if spec in self.measures:
            return self.measures[spec]
        return measure_from_spec(spec, self.system.space, self.system)

    def potential(self, spec: str) -> SubadditivePotential:
        return potential_from_spec(spec, self)


def potential_from_spec(spec: str, scenario: Scenario) -> SubadditivePotential:
    """Resolve `birkhoff:<g>`, `cocycle:<family>`, `neg:<spec>`,
    `trunc:<spec>` or a scenario-registered potential name."""
    if spec in scenario.potentials:
        return scenario.potentials[spec]
    head, sep, arg = spec.partition(":")
    if head == "neg" and sep:
        return potential_from_spec(arg, scenario).negate()
    if head == "trunc" and sep:
        return truncate(potential_from_spec(arg, scenario))
    if head == "birkhoff" and sep:
        gs = {**G_FUNCTIONS, **scenario.g_functions}
        if arg not in gs:
            raise UnknownNameError(arg, gs, what="g function")
        return BirkhoffPotential(gs[arg], label=spec)
    if head == "cocycle" and sep:
        if arg not in MATRIX_FAMILIES:
            raise UnknownNameError(arg, MATRIX_FAMILIES, what="matrix family")
        fn, dim = MATRIX_FAMILIES[arg]
        return CocyclePotential(fn, dim, label=spec, vectorized=True)
    available = list(scenario.potentials) + ["birkhoff:<g>", "cocycle:<family>",
                                             "neg:<spec>", "trunc:<spec>"]
    raise UnknownNameError(spec, available, what="potential")


def _verify_orbit(system, x0, period):
    orb = orbit(system, x0, period + 1)
    gap = system.space.distance(orb.points[period], orb.points[0])
    if gap > PERIODIC_TOL:
        raise NonPeriodicOrbitError(
            f"{x0} is not {period}-periodic under {system.label} (gap {gap:.3g})"
        )
    return [orb.points[i] for i in range(period)]


def prop43_potential(system, o1, o2, bump_radius=0.05, baseline=-0.2):
    """Additive potential from two disjoint periodic orbits.

    g is exactly -1 on the first orbit, exactly +1 on the second, equal to
    `baseline` away from both, with a cubic blend of radius `bump_radius`.
    `o1`/`o2` are (point, period) pairs; the orbits must close within 1e-9
    and their bump neighborhoods must not intersect.  Returns
    (g, potential, negated potential).
    """
    x1, p1 = o1
    x2, p2 = o2
    pts1 = _verify_orbit(system, x1, p1)
    pts2 = _verify_orbit(system, x2, p2)
    gap = min(system.space.distance(a, b) for a in pts1 for b in pts2)
    if gap <= 2.0 * bump_radius:
        raise NeighborhoodOverlapError(
            f"orbit neighborhoods overlap: separation {gap:.3g} <= 2*{bump_radius}"
        )
    set_distance = (_circle_set_distance if system.space.dim == 1
                    else _euclid_set_distance)

    def g(pts):
        s1 = smoothstep_down(set_distance(pts, pts1), bump_radius)
        s2 = smoothstep_down(set_distance(pts, pts2), bump_radius)
        # affine blend keeps the orbit values exactly -1 / +1
        return baseline * (1.0 - s1 - s2) - s1 + s2

    phi = BirkhoffPotential(g, label="prop43")
    return g, phi, phi.negate()


def vertex_well_g(radius=0.1):
    """g = -1 within `radius` of a simplex vertex, blended up to 0."""
    verts = [np.eye(3)[i] for i in range(3)]

    def g(pts):
        return -smoothstep_down(_euclid_set_distance(pts, verts), radius)

    return g


def may_leonard_system(alpha, beta, tau, substeps=10, boundary_per_edge=100):
    """The heteroclinic-cycle system plus its vertex equilibria and a
    boundary-cycle attractor sample."""
    system = may_leonard(alpha, beta, tau, substeps=substeps)
    vertices = np.eye(3)
    boundary = AttractorSpec(system.space,
                             system.space.boundary_sample(boundary_per_edge),
                             label="boundary")
    return system, vertices, boundary


def _validated(name, system, potentials, **kw):
    for pname, phi in potentials.items():
        rep = check_subadditivity(phi, system, sample_count=100, n_max=100, seed=1337)
        if not rep.passed:
            raise OptstateError(
                f"scenario {name}: potential {pname} failed subadditivity "
                f"(violation {rep.max_violation:.3g})"
            )
    return Scenario(name=name, system=system, potentials=potentials, **kw)


def _build_doubling_basic():
    system = doubling()
    potentials = {
        "birkhoff:cos": BirkhoffPotential(g_cos, label="birkhoff:cos"),
        "cocycle:diag-cos": CocyclePotential(_mats_diag_cos, 2, label="cocycle:diag-cos",
                                             vectorized=True),
        "cocycle:diag-const": CocyclePotential(_mats_diag_const, 2,
                                               label="cocycle:diag-const", vectorized=True),
        "cocycle:rot-scaled": CocyclePotential(_mats_rot_scaled, 2,
                                               label="cocycle:rot-scaled", vectorized=True),
    }
    measures = {"lebesgue": lebesgue(system.space),
                "dirac:0": dirac(system.space, 0.0)}
    return _validated(
        "doubling-basic", system, potentials, measures=measures, attractors={},
        doc="doubling map with a trigonometric Birkhoff potential and three "
            "2x2 cocycles (constant diagonal, scaled rotation, x-dependent diagonal)",
    )


def _build_doubling_prop43(bump_radius=0.05, baseline=-0.2):
    system = doubling()
    g, phi, phi_neg = prop43_potential(
        system, (Fraction(0), 1), (Fraction(1, 3), 2),
        bump_radius=bump_radius, baseline=baseline,
    )
    potentials = {"prop43": phi, "prop43-neg": phi_neg}
    measures = {
        "dirac:0": dirac(system.space, 0.0),
        "orbit:1/3,2": measure_from_spec("orbit:1/3,2", system.space, system),
        "lebesgue": lebesgue(system.space),
    }
    scn = _validated(
        "doubling-prop43", system, potentials, measures=measures, attractors={},
        doc="doubling map with the two-periodic-orbit contrast potential: "
            "g = -1 on {0}, +1 on {1/3, 2/3}, baseline elsewhere",
        params={"bump_radius": bump_radius, "baseline": baseline},
    )
    scn.g_functions["prop43"] = g
    return scn


def _build_rotation_unique_ergodic(alpha=GOLDEN_MEAN):
    system = rotation(alpha)
    potentials = {"birkhoff:cos": BirkhoffPotential(g_cos, label="birkhoff:cos")}
    measures = {"lebesgue": lebesgue(system.space)}
    return _validated(
        "rotation-unique-ergodic", system, potentials, measures=measures,
        attractors={}, doc="irrational circle rotation (uniquely ergodic)",
        params={"alpha": float(alpha)},
    )


def _build_cocycle_stability():
    system = doubling()
    potentials = {
        "cocycle:diag-const": CocyclePotential(_mats_diag_const, 2,
                                               label="cocycle:diag-const", vectorized=True),
        "cocycle:rot-scaled": CocyclePotential(_mats_rot_scaled, 2,
                                               label="cocycle:rot-scaled", vectorized=True),
        "cocycle:diag-cos": CocyclePotential(_mats_diag_cos, 2,
                                             label="cocycle:diag-cos", vectorized=True),
    }
    potentials["trunc:cocycle:diag-const"] = truncate(potentials["cocycle:diag-const"])
    measures = {"lebesgue": lebesgue(system.space)}
    return _validated(
        "cocycle-stability", system, potentials, measures=measures, attractors={},
        doc="linear-stability cocycles over the doubling map, incl. a truncation",
    )


def _build_heteroclinic_bowen(alpha=0.8, beta=1.9, tau=0.1, substeps=10,
                              vertex_radius=0.1, boundary_per_edge=100):
    system, vertices, boundary = may_leonard_system(
        alpha, beta, tau, substeps=substeps, boundary_per_edge=boundary_per_edge
    )
    g = vertex_well_g(vertex_radius)
    potentials = {"birkhoff:g-vertices": BirkhoffPotential(g, label="birkhoff:g-vertices")}
    space = system.space
    vertex_diracs = [dirac(space, vertices[i]) for i in range(3)]
    third = 1.0 / 3.0
    measures = {
        "dirac:e1": vertex_diracs[0],
        "dirac:e2": vertex_diracs[1],
        "dirac:e3": vertex_diracs[2],
        "vertex-mix": mixture([(third, m) for m in vertex_diracs], label="vertex-mix"),
    }
    attractors = {
        "boundary": boundary,
        "vertices": AttractorSpec(space, vertices, label="vertices"),
    }
    scn = _validated(
        "heteroclinic-bowen", system, potentials,
        measures=measures, attractors=attractors,
        doc="attracting heteroclinic cycle on the simplex: interior orbits "
            "have nonconvergent time averages with cluster measures in the "
            "convex hull of the three vertex Diracs",
        params={"alpha": alpha, "beta": beta, "tau": tau, "substeps": substeps,
                "vertex_radius": vertex_radius},
    )
    scn.g_functions["g-vertices"] = g
    return scn


_SCENARIOS: dict = {
    "doubling-basic": _build_doubling_basic,
    "doubling-prop43": _build_doubling_prop43,
    "rotation-unique-ergodic": _build_rotation_unique_ergodic,
    "cocycle-stability": _build_cocycle_stability,
    "heteroclinic-bowen": _build_heteroclinic_bowen,
}


def scenario_names():
    return sorted(_SCENARIOS)


def build_scenario(name, params: Optional[dict] = None) -> Scenario:
    if name not in _SCENARIOS:
        raise UnknownNameError(name, _SCENARIOS, what="scenario")
    try:
        return _SCENARIOS[name](**(params or {}))
    except TypeError as e:
        raise OptstateError(f"bad parameters for scenario {name}: {e}") from None
