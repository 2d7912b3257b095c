"""Growth rates of subadditive potentials along orbits, weak* basins of
attraction, and Lebesgue fractions of optimal state points."""

from .kernels import BACKEND
from .spaces import Circle, Interval, PlanarBall, Simplex3, StateSpace, Torus2
from .systems import (
    DynamicalSystem,
    Orbit,
    doubling,
    flow_time_tau_map,
    interval_halving,
    may_leonard,
    orbit,
    rotation,
    step,
    system_from_name,
)
from .measures import (
    EmpiricalMeasure,
    Measure,
    WeakStarMetric,
    default_metric,
    empirical_measure,
    geometric_schedule,
    integrate,
    lebesgue,
    limit_set_estimate,
    measure_from_spec,
    weak_star_distance,
)
from .potentials import (
    SubadditivePotential,
    birkhoff_potential,
    check_subadditivity,
    cocycle_potential,
    evaluate,
    growth_report,
    lemma_sub_check,
    truncate,
)
from .basins import (
    AttractorSpec,
    BasinQuery,
    classify_point,
    grid_scan,
    milnor_fraction,
    observability_check,
    optimal_point_scan,
)
from .scenarios import build_scenario, may_leonard_system, prop43_potential, scenario_names

__version__ = "0.1.0"
