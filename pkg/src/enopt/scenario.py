"""Scenario files: JSON documents describing a system, solver overrides and
requested output artifacts.

Time series may be inline arrays or references to sidecar CSV files
(``{"csv": "series.csv", "column": "load_electricity"}``, resolved relative
to the scenario file).  ``load_scenario`` parses, builds the system and runs
full validation; every error names the offending field.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import model
from .model import (
    AnnuityInput,
    CapacitySpec,
    Component,
    CostSpec,
    CoupledConversion,
    CRateLink,
    EnergySystem,
    FieldConversion,
    FixedRamp,
    FixedRate,
    HalfPlane,
    Node,
    OptimizedRamp,
    OptimizedRate,
    PartialLoad,
    SingleConversion,
    SourceConversion,
    Storage,
    TimeGrid,
    UnitCommitment,
)

__all__ = ["Scenario", "OutputSpec", "ScenarioError", "load_scenario", "save_scenario",
           "system_to_dict", "system_from_dict", "scenario_to_dict"]

SCHEMA_VERSION = 1

# distinct exit codes per failure class (also used by the CLI)
EXIT_PARSE = 2
EXIT_SCHEMA = 6
EXIT_VALIDATION = 7


class ScenarioError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_PARSE):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class OutputSpec:
    schedule_csv: bool = True
    fill_csv: bool = True
    summary: bool = True
    report_json: bool = True
    lp_export: bool = False
    plot_data: bool = False


@dataclass(frozen=True)
class Scenario:
    system: EnergySystem
    solver: dict = field(default_factory=dict)
    outputs: OutputSpec = OutputSpec()
    schema_version: int = SCHEMA_VERSION
    name: str = "scenario"


class _Ctx:
    """Tracks the field path so parse errors name the exact location."""

    def __init__(self, base_dir: Path):
        self.base_dir = base_dir
        self.path: list[str] = []

    def where(self) -> str:
        return ".".join(self.path) if self.path else "<root>"

    def fail(self, message: str, code: int = EXIT_SCHEMA):
        raise ScenarioError(f"at {self.where()}: {message}", code)

    def enter(self, key: str):
        ctx = self

        class _Scope:
            def __enter__(self_inner):
                ctx.path.append(key)

            def __exit__(self_inner, *exc):
                ctx.path.pop()

        return _Scope()


def _get(ctx: _Ctx, obj: dict, key: str, expected=None, default=..., choices=None):
    value = obj.get(key)
    if value is None:
        if default is not ...:
            return default
        ctx.fail(f"missing required field '{key}'")
    if expected is not None and not isinstance(value, expected):
        names = expected if isinstance(expected, tuple) else (expected,)
        ctx.fail(f"field '{key}' expected {'/'.join(t.__name__ for t in names)}, "
                 f"got {type(value).__name__}")
    if choices is not None and value not in choices:
        ctx.fail(f"field '{key}' must be one of {sorted(choices)}, got {value!r}")
    return value


def _read_csv_column(ctx: _Ctx, path: Path, column: str) -> list[float]:
    if not path.exists():
        ctx.fail(f"sidecar file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            ctx.fail(f"column '{column}' not in {path.name} "
                     f"(has {reader.fieldnames})")
        try:
            return [float(row[column]) for row in reader]
        except (TypeError, ValueError) as exc:
            ctx.fail(f"non-numeric value in {path.name}:{column}: {exc}")


def _series(ctx: _Ctx, value, key: str, allow_scalar: bool):
    with ctx.enter(key):
        if isinstance(value, (int, float)):
            if allow_scalar:
                return float(value)
            ctx.fail("expected a series, got a scalar")
        if isinstance(value, list):
            if not all(isinstance(v, (int, float)) for v in value):
                ctx.fail("series entries must be numbers")
            return tuple(float(v) for v in value)
        if isinstance(value, dict):
            path = ctx.base_dir / _get(ctx, value, "csv", str)
            column = _get(ctx, value, "column", str)
            return tuple(_read_csv_column(ctx, path, column))
        ctx.fail("expected number, array or {csv, column}")


def _conversion(ctx: _Ctx, obj: dict):
    kind = _get(ctx, obj, "type", str,
                choices={"single", "source", "coupled", "field"})
    if kind == "single":
        return SingleConversion(_get(ctx, obj, "input", str),
                                _get(ctx, obj, "output", str),
                                float(_get(ctx, obj, "efficiency", (int, float))))
    if kind == "source":
        return SourceConversion(_get(ctx, obj, "output", str))
    if kind == "coupled":
        return CoupledConversion(
            _get(ctx, obj, "input", str),
            _get(ctx, obj, "primary_output", str),
            _get(ctx, obj, "secondary_output", str),
            float(_get(ctx, obj, "primary_efficiency", (int, float))),
            float(_get(ctx, obj, "secondary_efficiency", (int, float))))
    planes = []
    for k, hp in enumerate(_get(ctx, obj, "half_planes", list)):
        with ctx.enter(f"half_planes[{k}]"):
            planes.append(HalfPlane(float(_get(ctx, hp, "slope", (int, float))),
                                    float(_get(ctx, hp, "intercept", (int, float))),
                                    _get(ctx, hp, "sense", str,
                                         choices={model.SENSE_LE, model.SENSE_GE})))
    return FieldConversion(
        _get(ctx, obj, "input", str),
        _get(ctx, obj, "primary_output", str),
        _get(ctx, obj, "secondary_output", str),
        float(_get(ctx, obj, "primary_efficiency", (int, float))),
        tuple(planes))


def _capacity(ctx: _Ctx, obj: dict) -> CapacitySpec:
    max_total = _get(ctx, obj, "max", (int, float), default=None)
    avail = obj.get("availability")
    return CapacitySpec(
        initial=float(_get(ctx, obj, "initial", (int, float), default=0.0)),
        optimizable=_get(ctx, obj, "optimizable", bool, default=False),
        max_total=None if max_total is None else float(max_total),
        availability=_series(ctx, 1.0 if avail is None else avail, "availability", True),
        per_period=_get(ctx, obj, "per_period", bool, default=False))


def _ramp(ctx: _Ctx, obj):
    if obj is None:
        return None
    kind = _get(ctx, obj, "type", str, choices={"fixed", "optimized"})
    if kind == "fixed":
        return FixedRamp(float(_get(ctx, obj, "up", (int, float))),
                         float(_get(ctx, obj, "down", (int, float))))
    return OptimizedRamp(float(_get(ctx, obj, "cost_up", (int, float))),
                         float(_get(ctx, obj, "cost_down", (int, float))))


def _commitment(ctx: _Ctx, obj):
    if obj is None:
        return None
    partial = _get(ctx, obj, "partial_load", dict, default=None)
    if partial is not None:
        with ctx.enter("partial_load"):
            partial = PartialLoad(float(_get(ctx, partial, "slope", (int, float))),
                                  float(_get(ctx, partial, "offset", (int, float))))
    return UnitCommitment(
        unit_capacity=float(_get(ctx, obj, "unit_capacity", (int, float))),
        unit_min_load=float(_get(ctx, obj, "unit_min_load", (int, float), default=0.0)),
        max_units=int(_get(ctx, obj, "max_units", int, default=1)),
        optimize_units=_get(ctx, obj, "optimize_units", bool, default=False),
        startup_cost=float(_get(ctx, obj, "startup_cost", (int, float), default=0.0)),
        min_up_steps=int(_get(ctx, obj, "min_up_steps", int, default=0)),
        min_down_steps=int(_get(ctx, obj, "min_down_steps", int, default=0)),
        partial_load=partial,
        initial_on=int(_get(ctx, obj, "initial_on", int, default=0)))


def _costs(ctx: _Ctx, obj: dict) -> CostSpec:
    annuity = _get(ctx, obj, "annuity", dict, default=None)
    if annuity is not None:
        with ctx.enter("annuity"):
            annuity = AnnuityInput(
                float(_get(ctx, annuity, "total_investment", (int, float))),
                float(_get(ctx, annuity, "interest_rate", (int, float))),
                int(_get(ctx, annuity, "lifetime", int)))
    price = _get(ctx, obj, "emission_price", (int, float), default=None)
    fuel = obj.get("fuel")
    return CostSpec(
        invest=float(_get(ctx, obj, "invest", (int, float), default=0.0)),
        maintenance=float(_get(ctx, obj, "maintenance", (int, float), default=0.0)),
        fuel=_series(ctx, 0.0 if fuel is None else fuel, "fuel", True),
        emission_factor=float(_get(ctx, obj, "emission_factor", (int, float), default=0.0)),
        emission_price=None if price is None else float(price),
        invest_side=_get(ctx, obj, "invest_side", str, default="output",
                         choices={"output", "input"}),
        annuity=annuity,
        built=float(_get(ctx, obj, "built", (int, float), default=0.0)))


def _storage(ctx: _Ctx, obj: dict) -> Storage:
    cap = _get(ctx, obj, "capacity", dict, default={})
    with ctx.enter("capacity"):
        cap_fixed = float(_get(ctx, cap, "fixed", (int, float), default=0.0))
        cap_opt = _get(ctx, cap, "optimizable", bool, default=False)
        cap_cost = float(_get(ctx, cap, "cost", (int, float), default=0.0))
        cap_max = _get(ctx, cap, "max", (int, float), default=None)
    rate_obj = _get(ctx, obj, "rate", dict)
    with ctx.enter("rate"):
        kind = _get(ctx, rate_obj, "type", str, choices={"fixed", "c_rate", "optimized"})
        if kind == "fixed":
            rate = FixedRate(float(_get(ctx, rate_obj, "max_charge", (int, float))),
                             float(_get(ctx, rate_obj, "max_discharge", (int, float))))
        elif kind == "c_rate":
            rate = CRateLink(float(_get(ctx, rate_obj, "ratio", (int, float))))
        else:
            rate = OptimizedRate(float(_get(ctx, rate_obj, "cost_charge", (int, float))),
                                 float(_get(ctx, rate_obj, "cost_discharge", (int, float))))
    return Storage(
        id=_get(ctx, obj, "id", str),
        node=_get(ctx, obj, "node", str),
        charge_efficiency=float(_get(ctx, obj, "charge_efficiency", (int, float))),
        discharge_efficiency=float(_get(ctx, obj, "discharge_efficiency", (int, float))),
        rate=rate,
        initial_fill=float(_get(ctx, obj, "initial_fill", (int, float), default=0.0)),
        capacity_fixed=cap_fixed,
        capacity_optimizable=cap_opt,
        capacity_cost=cap_cost,
        capacity_max=None if cap_max is None else float(cap_max))


def system_from_dict(doc: dict, base_dir: Path | str = ".") -> EnergySystem:
    ctx = _Ctx(Path(base_dir))
    with ctx.enter("system"):
        time_obj = _get(ctx, doc, "time", dict)
        with ctx.enter("time"):
            if "count" in time_obj:
                count = int(_get(ctx, time_obj, "count", int))
                hours = float(_get(ctx, time_obj, "hours", (int, float), default=1.0))
                steps = (hours,) * count
            else:
                steps = _series(ctx, _get(ctx, time_obj, "step_hours", (list, dict)),
                                "step_hours", False)
            periods = time_obj.get("period_of_step")
            if periods is not None:
                with ctx.enter("period_of_step"):
                    if not isinstance(periods, list):
                        ctx.fail("expected an array of period indices")
                    periods = tuple(int(p) for p in periods)
            grid = TimeGrid(steps, periods or ())

        nodes = []
        for k, n in enumerate(_get(ctx, doc, "nodes", list)):
            with ctx.enter(f"nodes[{k}]"):
                boundary = _get(ctx, n, "boundary", bool, default=False)
                load = n.get("load")
                if load is None:
                    if not boundary:
                        ctx.fail("missing required field 'load'")
                    load = [0.0] * grid.num_steps
                load = _series(ctx, load, "load", False)
                nodes.append(Node(_get(ctx, n, "id", str),
                                  _get(ctx, n, "carrier", str, default=""),
                                  load, boundary))

        comps = []
        for k, c in enumerate(_get(ctx, doc, "components", list, default=[])):
            with ctx.enter(f"components[{k}]"):
                comps.append(Component(
                    id=_get(ctx, c, "id", str),
                    conversion=_conversion(ctx, _get(ctx, c, "conversion", dict)),
                    capacity=_capacity(ctx, _get(ctx, c, "capacity", dict, default={})),
                    ramp=_ramp(ctx, _get(ctx, c, "ramp", dict, default=None)),
                    commitment=_commitment(ctx, _get(ctx, c, "commitment", dict,
                                                     default=None)),
                    costs=_costs(ctx, _get(ctx, c, "costs", dict, default={}))))

        stors = []
        for k, s in enumerate(_get(ctx, doc, "storages", list, default=[])):
            with ctx.enter(f"storages[{k}]"):
                stors.append(_storage(ctx, s))

        cap = _get(ctx, doc, "co2_cap", (int, float), default=None)
        return EnergySystem(
            time=grid, nodes=tuple(nodes), components=tuple(comps),
            storages=tuple(stors),
            co2_cap=None if cap is None else float(cap),
            final_fill_at_least_initial=_get(ctx, doc, "final_fill_at_least_initial",
                                             bool, default=False))


def load_scenario(path) -> Scenario:
    """Parse, build and validate a scenario file.

    Raises :class:`ScenarioError` with ``exit_code`` 2 (unreadable/bad JSON),
    6 (schema problems) or 7 (model validation errors).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}", EXIT_PARSE) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON in {path}: {exc}", EXIT_PARSE) from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: top level must be an object", EXIT_SCHEMA)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(
            f"{path}: unsupported schema_version {version!r} (expected {SCHEMA_VERSION})",
            EXIT_SCHEMA)
    ctx = _Ctx(path.parent)
    system_doc = _get(ctx, doc, "system", dict)
    system = system_from_dict(system_doc, path.parent)
    report = model.validate_system(system)
    if not report.ok:
        lines = [f"{v.code} at {v.where}: {v.message}" for v in report.errors]
        raise ScenarioError("scenario failed validation:\n  " + "\n  ".join(lines),
                            EXIT_VALIDATION)
    outputs_doc = doc.get("outputs", {})
    known = set(OutputSpec.__dataclass_fields__)
    bad = set(outputs_doc) - known
    if bad:
        raise ScenarioError(f"unknown output keys: {sorted(bad)}", EXIT_SCHEMA)
    outputs = OutputSpec(**{k: bool(v) for k, v in outputs_doc.items()})
    solver = doc.get("solver", {})
    if not isinstance(solver, dict):
        raise ScenarioError("'solver' must be an object", EXIT_SCHEMA)
    return Scenario(system=system, solver=dict(solver), outputs=outputs,
                    schema_version=version, name=path.stem)


# ---------------------------------------------------------------------------
# canonical serialization (round-trip stable)


def _conversion_to_dict(conv) -> dict:
    if isinstance(conv, SingleConversion):
        return {"type": "single", "input": conv.input_node, "output": conv.output_node,
                "efficiency": conv.efficiency}
    if isinstance(conv, SourceConversion):
        return {"type": "source", "output": conv.output_node}
    if isinstance(conv, CoupledConversion):
        return {"type": "coupled", "input": conv.input_node,
                "primary_output": conv.primary_output,
                "secondary_output": conv.secondary_output,
                "primary_efficiency": conv.primary_efficiency,
                "secondary_efficiency": conv.secondary_efficiency}
    return {"type": "field", "input": conv.input_node,
            "primary_output": conv.primary_output,
            "secondary_output": conv.secondary_output,
            "primary_efficiency": conv.primary_efficiency,
            "half_planes": [{"slope": hp.slope, "intercept": hp.intercept,
                             "sense": hp.sense} for hp in conv.half_planes]}


def system_to_dict(sys: EnergySystem) -> dict:
    doc: dict = {"time": {"step_hours": list(sys.time.step_hours),
                          "period_of_step": list(sys.time.period_of_step)}}
    doc["nodes"] = [{"id": n.id, "carrier": n.carrier, "load": list(n.load),
                     "boundary": n.boundary} for n in sys.nodes]
    comps = []
    for c in sys.components:
        avail = c.capacity.availability
        entry = {
            "id": c.id,
            "conversion": _conversion_to_dict(c.conversion),
            "capacity": {
                "initial": c.capacity.initial,
                "optimizable": c.capacity.optimizable,
                "max": c.capacity.max_total,
                "availability": list(avail) if isinstance(avail, tuple) else avail,
                "per_period": c.capacity.per_period,
            },
            "ramp": None,
            "commitment": None,
            "costs": {
                "invest": c.costs.invest,
                "maintenance": c.costs.maintenance,
                "fuel": (list(c.costs.fuel) if isinstance(c.costs.fuel, tuple)
                         else c.costs.fuel),
                "emission_factor": c.costs.emission_factor,
                "emission_price": c.costs.emission_price,
                "invest_side": c.costs.invest_side,
                "annuity": None if c.costs.annuity is None else asdict(c.costs.annuity),
                "built": c.costs.built,
            },
        }
        if isinstance(c.ramp, FixedRamp):
            entry["ramp"] = {"type": "fixed", "up": c.ramp.up_per_hour,
                             "down": c.ramp.down_per_hour}
        elif isinstance(c.ramp, OptimizedRamp):
            entry["ramp"] = {"type": "optimized", "cost_up": c.ramp.cost_up,
                             "cost_down": c.ramp.cost_down}
        if c.commitment is not None:
            com = c.commitment
            entry["commitment"] = {
                "unit_capacity": com.unit_capacity,
                "unit_min_load": com.unit_min_load,
                "max_units": com.max_units,
                "optimize_units": com.optimize_units,
                "startup_cost": com.startup_cost,
                "min_up_steps": com.min_up_steps,
                "min_down_steps": com.min_down_steps,
                "partial_load": (None if com.partial_load is None
                                 else {"slope": com.partial_load.slope,
                                       "offset": com.partial_load.offset}),
                "initial_on": com.initial_on,
            }
        comps.append(entry)
    doc["components"] = comps
    stors = []
    for s in sys.storages:
        if isinstance(s.rate, FixedRate):
            rate = {"type": "fixed", "max_charge": s.rate.max_charge,
                    "max_discharge": s.rate.max_discharge}
        elif isinstance(s.rate, CRateLink):
            rate = {"type": "c_rate", "ratio": s.rate.ratio}
        else:
            rate = {"type": "optimized", "cost_charge": s.rate.cost_charge,
                    "cost_discharge": s.rate.cost_discharge}
        stors.append({
            "id": s.id, "node": s.node,
            "charge_efficiency": s.charge_efficiency,
            "discharge_efficiency": s.discharge_efficiency,
            "rate": rate,
            "initial_fill": s.initial_fill,
            "capacity": {"fixed": s.capacity_fixed, "optimizable": s.capacity_optimizable,
                         "cost": s.capacity_cost, "max": s.capacity_max},
        })
    doc["storages"] = stors
    doc["co2_cap"] = sys.co2_cap
    doc["final_fill_at_least_initial"] = sys.final_fill_at_least_initial
    return doc


def scenario_to_dict(scn: Scenario) -> dict:
    return {
        "schema_version": scn.schema_version,
        "system": system_to_dict(scn.system),
        "solver": dict(scn.solver),
        "outputs": asdict(scn.outputs),
    }


def save_scenario(scn: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scn), indent=2, sort_keys=True)
                          + "\n")
