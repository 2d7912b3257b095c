"""Command-line driver.

Subcommands: orbit, growth, scan-growth, basin, milnor, observability,
verify, distance, describe.  Runs are described by a RunPlan assembled
from flags and an optional TOML config document (flags override document
values; unknown document keys are hard errors).  Every summary file echoes
the plan under a `[plan]` table, so a summary can be replayed with
`--config`.

Exit codes: 0 success, 1 operational error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import basins, measures, potentials, reports
from .errors import ConfigError, OptstateError
from .measures import default_metric, empirical_measure, geometric_schedule
from .scenarios import build_scenario, scenario_names
from .spaces import low_discrepancy_points, space_by_kind
from .systems import orbit, parse_coordinate

COMMANDS = ("orbit", "growth", "scan-growth", "basin", "milnor",
            "observability", "verify", "distance", "describe")
ALL_CHECKS = ("subadditivity", "lemma-sub", "metric-axioms", "empirical-recursion")


@dataclass
class RunPlan:
    command: str = ""
    scenario: str | None = None
    scenario_params: dict = field(default_factory=dict)
    space: str | None = None
    potential: str | None = None
    mu: str | None = None
    nu: str | None = None
    x0: str | None = None
    n: int | None = None
    epsilon: list = field(default_factory=list)
    grid: int | None = None
    mode: str = "weak"
    attractor: str | None = None
    threshold: float = 0.95
    checks: list = field(default_factory=list)
    seed: int = 42
    format: str = "csv"
    workers: int | None = None   # execution knob; never echoed
    out: str | None = None       # execution knob; never echoed

    # keys in echo order; out/workers excluded so identical logical plans
    # give byte-identical summaries regardless of machine layout
    _ECHO = ("command", "scenario", "scenario_params", "space", "potential",
             "mu", "nu", "x0", "n", "epsilon", "grid", "mode", "attractor",
             "threshold", "checks", "seed", "format")

    def echo_items(self):
        items = []
        for key in self._ECHO:
            v = getattr(self, key)
            if v is None or (isinstance(v, (dict, list)) and not v):
                continue
            items.append((key, v))
        return items

    def resolved_out(self) -> Path:
        out = self.out or os.environ.get("OPTSTATE_OUT") or "."
        p = Path(out)
        p.mkdir(parents=True, exist_ok=True)
        return p

    def resolved_workers(self) -> int:
        return self.workers if self.workers else (os.cpu_count() or 1)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for verification
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="optstate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", default=None, help="TOML plan document")
        p.add_argument("--scenario", default=None)
        p.add_argument("--param", action="append", default=None, metavar="KEY=VALUE",
                       help="scenario parameter, repeatable")
        p.add_argument("--space", default=None, help="space kind (distance command)")
        p.add_argument("--potential", default=None)
        p.add_argument("--mu", default=None)
        p.add_argument("--nu", default=None)
        p.add_argument("--x0", default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--epsilon", default=None, help="comma-separated list")
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--mode", default=None, choices=("weak", "strong"))
        p.add_argument("--attractor", default=None)
        p.add_argument("--threshold", type=float, default=None)
        p.add_argument("--checks", default=None, help="comma-separated list")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", default=None, choices=("csv", "doc"))
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None)
    return parser


_PLAN_KEYS = {f.name for f in fields(RunPlan)}


def _apply_document(plan: RunPlan, doc: dict, path: str):
    table = doc.get("plan", doc)
    if "plan" in doc:
        extra = set(doc) - {"plan", "result"}
        if extra:
            raise ConfigError(f"{path}: unknown top-level keys {sorted(extra)}")
    for key, value in table.items():
        if key in ("out", "workers"):
            raise ConfigError(f"{path}: key {key!r} is flag-only")
        if key not in _PLAN_KEYS:
            raise ConfigError(f"{path}: unknown key {key!r}")
        if key == "scenario_params":
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: scenario_params must be a table")
            plan.scenario_params = dict(value)
        elif key == "epsilon":
            plan.epsilon = [float(v) for v in value]
        elif key == "checks":
            plan.checks = [str(v) for v in value]
        elif key == "command":
            pass  # the subcommand on the command line wins
        else:
            setattr(plan, key, value)


def _parse_params(pairs):
    out = {}
    for pair in pairs:
        key, eq, value = pair.partition("=")
        if not eq:
            raise ConfigError(f"--param needs KEY=VALUE, got {pair!r}")
        try:
            out[key] = float(value)
        except ValueError:
            out[key] = value
    return out


def parse_config(argv=None) -> RunPlan:
    """Assemble the RunPlan: defaults < config document < explicit flags."""
    args = _build_parser().parse_args(argv)
    plan = RunPlan(command=args.command)
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                doc = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{args.config}: {e}") from None
        _apply_document(plan, doc, args.config)
    if args.param is not None:
        plan.scenario_params = _parse_params(args.param)
    for key in ("scenario", "space", "potential", "mu", "nu", "x0", "n",
                "grid", "mode", "attractor", "threshold", "seed", "format",
                "workers", "out"):
        v = getattr(args, key.replace("-", "_"))
        if v is not None:
            setattr(plan, key, v)
    if args.epsilon is not None:
        plan.epsilon = [float(t) for t in str(args.epsilon).split(",") if t]
    if args.checks is not None:
        plan.checks = [t for t in str(args.checks).split(",") if t]
    return plan


# ---------------------------------------------------------------------------
# command handlers


def _require(plan, *keys):
    for key in keys:
        v = getattr(plan, key)
        if v is None or (isinstance(v, list) and not v):
            raise ConfigError(f"command {plan.command!r} requires --{key}")


def _scenario(plan):
    _require(plan, "scenario")
    return build_scenario(plan.scenario, plan.scenario_params or None)


def _coords_header(space):
    return [f"x{i + 1}" for i in range(space.dim)]


def _coords(space, point):
    return [float(point)] if space.dim == 1 else [float(c) for c in point]


def _summary(plan, out, name, result_items):
    path = out / f"{name}_summary.txt"
    reports.write_summary(path, [("plan", plan.echo_items()),
                                 ("result", result_items)])
    return path


def _cmd_orbit(plan, out):
    scn = _scenario(plan)
    _require(plan, "x0", "n")
    x0 = parse_coordinate(plan.x0) if scn.system.space.dim == 1 else _parse_vector(plan.x0)
    orb = orbit(scn.system, x0, plan.n)
    space = scn.system.space
    if plan.format == "csv":
        rows = ([i] + _coords(space, orb.points[i]) for i in range(len(orb)))
        reports.write_csv(out / "orbit.csv", ["n"] + _coords_header(space), rows)
    _summary(plan, out, "orbit", [("length", len(orb)),
                                  ("system", scn.system.label)])
    return 0


def _parse_vector(text):
    parts = [float(p) for p in text.split(",")]
    return np.array(parts)


def _parse_x0(plan, space):
    if space.dim == 1:
        return parse_coordinate(plan.x0)
    return _parse_vector(plan.x0)


def _cmd_growth(plan, out):
    scn = _scenario(plan)
    _require(plan, "potential", "x0", "n")
    phi = scn.potential(plan.potential)
    x0 = _parse_x0(plan, scn.system.space)
    rep = potentials.growth_report(phi, scn.system, x0, plan.n)
    if plan.format == "csv":
        reports.write_csv(out / "growth.csv", ["n", "rate"],
                          ((n, float(r)) for n, r in rep.series))
    _summary(plan, out, "growth", [
        ("largest_rate", rep.largest),
        ("smallest_rate", rep.smallest),
        ("optimal", rep.optimal),
    ])
    return 0


def _cmd_scan_growth(plan, out):
    scn = _scenario(plan)
    _require(plan, "potential", "n", "grid")
    phi = scn.potential(plan.potential)
    res = basins.optimal_point_scan(scn.system, phi, plan.grid, plan.n,
                                    workers=plan.resolved_workers())
    space = scn.system.space
    if plan.format == "csv":
        rows = []
        for r in res.records:
            rows.append(_coords(space, r.center)
                        + [r.verdict,
                           r.values.get("largest", math.nan),
                           r.values.get("smallest", math.nan)])
        reports.write_csv(out / "scan-growth.csv",
                          _coords_header(space) + ["verdict", "largest_rate", "smallest_rate"],
                          rows)
    _summary(plan, out, "scan-growth", [
        ("fraction_optimal", res.fraction_optimal),
        ("fraction_smallest_negative", res.fraction_smallest_negative),
        ("mean_largest_rate", res.mean_largest),
        ("mean_smallest_rate", res.mean_smallest),
        ("cells", res.counts["cells"]),
        ("errors", res.counts["errors"]),
        ("indeterminate", res.counts["indeterminate"]),
    ])
    return 0


def _cmd_basin(plan, out):
    scn = _scenario(plan)
    _require(plan, "mu", "epsilon", "n", "grid")
    if len(plan.epsilon) != 1:
        raise ConfigError("basin takes a single --epsilon; use observability for lists")
    mu = scn.measure(plan.mu)
    query = basins.BasinQuery(mode=plan.mode, epsilon=plan.epsilon[0], mu=mu,
                              horizon=plan.n)
    res = basins.grid_scan(scn.system, query, plan.grid,
                           workers=plan.resolved_workers())
    space = scn.system.space
    if plan.format == "csv":
        rows = []
        for r in res.records:
            rows.append(_coords(space, r.center)
                        + [r.verdict,
                           r.values.get("min_distance", math.nan),
                           r.values.get("max_distance", math.nan),
                           r.values.get("spread", math.nan)])
        reports.write_csv(out / "basin.csv",
                          _coords_header(space) + ["verdict", "min_distance",
                                                   "max_distance", "spread"],
                          rows)
    _summary(plan, out, "basin", [
        ("fraction_in", res.lebesgue_fraction),
        ("cells", res.counts["cells"]),
        ("errors", res.counts["errors"]),
        ("indeterminate", res.counts["indeterminate"]),
    ])
    return 0


def _cmd_milnor(plan, out):
    scn = _scenario(plan)
    _require(plan, "attractor", "epsilon", "n", "grid")
    if len(plan.epsilon) != 1:
        raise ConfigError("milnor takes a single --epsilon")
    if plan.attractor not in scn.attractors:
        from .errors import UnknownNameError
        raise UnknownNameError(plan.attractor, scn.attractors, what="attractor")
    query = basins.BasinQuery(mode="milnor", epsilon=plan.epsilon[0],
                              attractor=scn.attractors[plan.attractor],
                              horizon=plan.n, milnor_threshold=plan.threshold)
    res = basins.grid_scan(scn.system, query, plan.grid,
                           workers=plan.resolved_workers())
    space = scn.system.space
    if plan.format == "csv":
        rows = []
        for r in res.records:
            rows.append(_coords(space, r.center)
                        + [r.values.get("fraction", math.nan), r.verdict])
        reports.write_csv(out / "milnor.csv",
                          _coords_header(space) + ["fraction", "verdict"], rows)
    _summary(plan, out, "milnor", [
        ("fraction_in", res.lebesgue_fraction),
        ("threshold", plan.threshold),
        ("cells", res.counts["cells"]),
        ("errors", res.counts["errors"]),
    ])
    return 0


def _cmd_observability(plan, out):
    scn = _scenario(plan)
    _require(plan, "mu", "epsilon", "n", "grid")
    mu = scn.measure(plan.mu)
    params = basins.ClassifyParams(horizon=plan.n)
    rep = basins.observability_check(scn.system, mu, plan.epsilon, plan.grid,
                                     params, workers=plan.resolved_workers())
    if plan.format == "csv":
        rows = []
        for eps, weak_fr, strong_fr, counts in rep.rows():
            rows.append([eps, "weak", weak_fr, counts["cells"],
                         counts["indeterminate"], counts["errors"]])
            rows.append([eps, "strong", strong_fr, counts["cells"],
                         counts["indeterminate"], counts["errors"]])
        reports.write_csv(out / "observability.csv",
                          ["epsilon", "mode", "fraction", "cells",
                           "indeterminate", "errors"], rows)
    _summary(plan, out, "observability", [
        ("observable", rep.observable),
        ("strong_observable", rep.strong_observable),
        ("weak_fractions", rep.weak_fractions),
        ("strong_fractions", rep.strong_fractions),
    ])
    return 0


def _cmd_distance(plan, out):
    _require(plan, "mu", "nu")
    if plan.scenario:
        scn = _scenario(plan)
        space, system = scn.system.space, scn.system
        mu = scn.measure(plan.mu)
        nu = scn.measure(plan.nu)
    else:
        space = space_by_kind(plan.space or "circle")
        system = None
        mu = measures.measure_from_spec(plan.mu, space, system)
        nu = measures.measure_from_spec(plan.nu, space, system)
    d = default_metric(space).distance(mu, nu)
    print(reports.csv_cell(float(d)))
    return 0


def _cmd_describe(plan, out):
    scn = _scenario(plan)
    print(f"scenario {scn.name}: {scn.doc}")
    if scn.params:
        print("parameters: " + ", ".join(f"{k}={v}" for k, v in sorted(scn.params.items())))
    print(f"system: {scn.system.label} on {scn.system.space.kind}")
    print("potentials: " + (", ".join(scn.potentials) or "(none)"))
    print("measures: " + (", ".join(scn.measures) or "(none)"))
    print("attractors: " + (", ".join(scn.attractors) or "(none)"))
    return 0


# ---------------------------------------------------------------------------
# verify suites


def _verify_subadditivity(scn, seed, items):
    ok = True
    for name, phi in scn.potentials.items():
        rep = potentials.check_subadditivity(phi, scn.system, sample_count=1000,
                                             n_max=1000, seed=seed)
        items.append((f"subadditivity_violation.{name}", rep.max_violation))
        ok = ok and rep.passed
    return ok


def _verify_lemma_sub(scn, seed, items):
    ok = True
    rng = np.random.default_rng(seed)
    pts = [scn.system.space.random_point(rng) for _ in range(100)]
    for name, phi in scn.potentials.items():
        worst = -math.inf
        for l in (1, 2, 5, 10):
            rep = potentials.lemma_sub_check(phi, scn.system, l, pts,
                                             n_list=(10, 100, 1000))
            worst = max(worst, rep.max_violation)
            ok = ok and rep.passed
        items.append((f"lemma_sub_violation.{name}", worst))
    return ok


def _random_point_mass(space, rng):
    k = int(rng.integers(1, 5))
    pts = [space.random_point(rng) for _ in range(k)]
    w = rng.random(k)
    w = w / w.sum()
    return measures.point_masses(space, pts, list(w), merge=False)


def _verify_metric_axioms(scn, seed, items):
    space = scn.system.space
    metric = default_metric(space)
    rng = np.random.default_rng(seed)
    worst_tri = -math.inf
    worst_sym = 0.0
    worst_self = 0.0
    for _ in range(1000):
        a = _random_point_mass(space, rng)
        b = _random_point_mass(space, rng)
        c = _random_point_mass(space, rng)
        dab, dba = metric.distance(a, b), metric.distance(b, a)
        dbc, dac = metric.distance(b, c), metric.distance(a, c)
        worst_sym = max(worst_sym, abs(dab - dba))
        worst_self = max(worst_self, metric.distance(a, a))
        worst_tri = max(worst_tri, dac - (dab + dbc))
        if not (0.0 <= dab <= 1.0):
            worst_tri = math.inf
    items.append(("metric_symmetry_gap", worst_sym))
    items.append(("metric_identity_gap", worst_self))
    items.append(("metric_triangle_violation", worst_tri))
    return worst_sym == 0.0 and worst_self == 0.0 and worst_tri <= 1e-12


def _verify_empirical_recursion(scn, seed, items):
    system = scn.system
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(5):
        x = system.space.random_point(rng)
        big = empirical_measure(system, x, 1001)
        for n in (1, 2, 10, 100, 1000):
            small = empirical_measure(system, x, n)
            prefix_equal = np.array_equal(big.points[:n], small.points)
            uniform = np.all(small.weights == 1.0 / n)
            ok = ok and bool(prefix_equal and uniform)
    items.append(("empirical_recursion_exact", ok))
    return ok


_SUITES = {
    "subadditivity": _verify_subadditivity,
    "lemma-sub": _verify_lemma_sub,
    "metric-axioms": _verify_metric_axioms,
    "empirical-recursion": _verify_empirical_recursion,
}


def _cmd_verify(plan, out):
    scn = _scenario(plan)
    checks = plan.checks or list(ALL_CHECKS)
    unknown = [c for c in checks if c not in _SUITES]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; available: {', '.join(ALL_CHECKS)}")
    items = []
    all_ok = True
    for check in checks:
        ok = _SUITES[check](scn, plan.seed, items)
        items.append((f"passed.{check.replace('-', '_')}", bool(ok)))
        print(f"{'PASS' if ok else 'FAIL'} {check}")
        all_ok = all_ok and ok
    _summary(plan, out, "verify", items)
    return 0 if all_ok else 2


_HANDLERS = {
    "orbit": _cmd_orbit,
    "growth": _cmd_growth,
    "scan-growth": _cmd_scan_growth,
    "basin": _cmd_basin,
    "milnor": _cmd_milnor,
    "observability": _cmd_observability,
    "verify": _cmd_verify,
    "distance": _cmd_distance,
    "describe": _cmd_describe,
}


def run(plan: RunPlan) -> int:
    out = plan.resolved_out()
    started = time.perf_counter()
    code = _HANDLERS[plan.command](plan, out)
    # wall time goes to stderr, never into artifacts (byte-reproducibility)
    print(f"{plan.command}: {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return code


def main(argv=None):
    try:
        plan = parse_config(argv)
        code = run(plan)
    except (OptstateError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
