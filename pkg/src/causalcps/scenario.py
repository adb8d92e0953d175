"""Scenario files, trace/report serialization and the bundled fixtures.

A scenario is a YAML document describing a complete runnable setup::

    name: knife-hardening        # optional
    seed: 42                     # default 0
    horizon: 300                 # ticks to simulate
    detection:                   # optional, defaults shown
      window: 50
      stride: 25
      alpha: 0.01
    sensors:
      - id: oven_temp
        initial: Ambient
        states:
          - {label: Ambient, dist: normal(20, 2)}
          - {label: Hot, dist: normal(800, 10)}
    subsystems:                  # list order = priority order (first wins)
      - id: oven_chamber
        kind: component          # component | module | product
        sensors: [burner_set, lid_state, oven_temp]
        rules:
          - when: {burner_set: S100, lid_state: Closed}
            then: [{sensor: oven_temp, state: Hot, delay: 2}]
    functionalities:             # optional; planner actions
      - module: oven
        name: heat
        parameters: [0, 25, 50, 75, 100]
        duration: 8
        transitions:
          - {param: 100, when: {knife_temp: Cold}, then: {knife_temp: Hot}}
    script:                      # optional timed events, ticks < horizon
      interventions:
        - {tick: 5, sensor: burner_cmd, state: C100}
      faults:
        - component: lid_actuator
          activation: 0
          rules: []              # replacement rule table, same shape as above

Distributions are written ``normal(mean, stddev)``, ``uniform(lo, hi)`` or
``degenerate(value)``.  Unknown fields are rejected; semantic errors are
raised by model validation.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Sequence

import yaml

from .detection import (
    DEFAULT_ALPHA,
    DEFAULT_STRIDE,
    DEFAULT_WINDOW,
    AnomalyReport,
    Deviation,
)
from .diagnosis import CausalPath, FaultHypothesis
from .distributions import Degenerate, Distribution, Normal, Uniform
from .model import (
    Effect,
    Rule,
    Sensor,
    Subsystem,
    SubsystemKind,
    SystemModel,
    build_model,
    validate_rules,
)
from .planning import Functionality, Plan, PlanningProblem, TransitionEntry
from .simulation import FaultSpec, ScriptedIntervention, Trace, TickRecord, run_script


class ScenarioError(ValueError):
    """Scenario text that cannot be parsed or fails schema validation."""


@dataclass(frozen=True)
class ScenarioDocument:
    """Parsed and validated scenario."""

    name: str
    seed: int
    horizon: int
    window: int
    stride: int
    alpha: float
    sensors: tuple[Sensor, ...]
    subsystems: tuple[Subsystem, ...]
    functionalities: tuple[Functionality, ...]
    interventions: tuple[ScriptedIntervention, ...]
    faults: tuple[FaultSpec, ...]

    @cached_property
    def _model(self) -> SystemModel:
        return build_model(self.sensors, self.subsystems)

    def build(self) -> SystemModel:
        return self._model

    def run(
        self,
        seed: int | None = None,
        horizon: int | None = None,
        include_faults: bool = True,
    ) -> Trace:
        """Simulate the scenario; ``include_faults=False`` gives the fault-free
        reference run of the same script."""
        return run_script(
            self.build(),
            seed=self.seed if seed is None else seed,
            horizon=self.horizon if horizon is None else horizon,
            interventions=self.interventions,
            faults=self.faults if include_faults else (),
        )

    def planning_problem(self, goal: Mapping[str, str]) -> PlanningProblem:
        """Planning problem over the product sensors with the model's initial state."""
        model = self.build()
        product_ids = model.product_sensor_ids()
        if not product_ids:
            raise ScenarioError("scenario has no product-kind subsystem to plan for")
        for sensor_id, label in goal.items():
            if sensor_id not in product_ids:
                raise ScenarioError(f"goal sensor {sensor_id!r} is not a product sensor")
            if label not in model.sensor(sensor_id).labels():
                raise ScenarioError(f"sensor {sensor_id!r} has no state {label!r}")
        initial = {sid: model.sensor(sid).initial_state for sid in product_ids}
        return PlanningProblem(
            functionalities=self.functionalities, initial=initial, goal=dict(goal)
        )


# ---------------------------------------------------------------------------
# Distribution spec syntax
# ---------------------------------------------------------------------------

_DIST_RE = re.compile(r"^\s*(normal|uniform|degenerate)\s*\(([^)]*)\)\s*$")


def parse_distribution(text: str, where: str = "dist") -> Distribution:
    match = _DIST_RE.match(text)
    if not match:
        raise ScenarioError(
            f"{where}: expected normal(m, s), uniform(lo, hi) or degenerate(v), got {text!r}"
        )
    kind, args_text = match.groups()
    try:
        args = [float(part) for part in args_text.split(",")]
    except ValueError:
        raise ScenarioError(f"{where}: non-numeric parameter in {text!r}") from None
    expected = 1 if kind == "degenerate" else 2
    if len(args) != expected:
        raise ScenarioError(f"{where}: {kind} takes {expected} parameter(s), got {len(args)}")
    try:
        if kind == "normal":
            return Normal(mean=args[0], stddev=args[1])
        if kind == "uniform":
            return Uniform(lo=args[0], hi=args[1])
        return Degenerate(value=args[0])
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def format_distribution(dist: Distribution) -> str:
    if isinstance(dist, Normal):
        return f"normal({dist.mean:g}, {dist.stddev:g})"
    if isinstance(dist, Uniform):
        return f"uniform({dist.lo:g}, {dist.hi:g})"
    return f"degenerate({dist.value:g})"


# ---------------------------------------------------------------------------
# Parsing helpers (strict: unknown fields are errors, with field-path context)
# ---------------------------------------------------------------------------


def _expect_mapping(node: Any, where: str) -> dict:
    if not isinstance(node, dict):
        raise ScenarioError(f"{where}: expected a mapping, got {type(node).__name__}")
    return node


def _expect_list(node: Any, where: str) -> list:
    if not isinstance(node, list):
        raise ScenarioError(f"{where}: expected a list, got {type(node).__name__}")
    return node


def _reject_unknown(node: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(node) - allowed
    if unknown:
        raise ScenarioError(f"{where}: unknown field(s) {sorted(unknown)}")


def _get_str(node: Mapping, key: str, where: str) -> str:
    if key not in node:
        raise ScenarioError(f"{where}: missing required field {key!r}")
    value = node[key]
    if not isinstance(value, str) or not value:
        raise ScenarioError(f"{where}.{key}: expected a nonempty string")
    return value


def _get_int(node: Mapping, key: str, where: str, default: int | None = None) -> int:
    if key not in node:
        if default is None:
            raise ScenarioError(f"{where}: missing required field {key!r}")
        return default
    value = node[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(f"{where}.{key}: expected an integer")
    return value


def _parse_label_map(node: Any, where: str) -> dict[str, str]:
    mapping = _expect_mapping(node, where)
    out = {}
    for key, value in mapping.items():
        if not isinstance(key, str) or not isinstance(value, str):
            raise ScenarioError(f"{where}: expected string-to-string entries")
        out[key] = value
    return out


def _parse_sensor(node: Any, where: str) -> Sensor:
    mapping = _expect_mapping(node, where)
    _reject_unknown(mapping, {"id", "initial", "states"}, where)
    sensor_id = _get_str(mapping, "id", where)
    states = []
    for i, state_node in enumerate(_expect_list(mapping.get("states"), f"{where}.states")):
        state_where = f"{where}.states[{i}]"
        state_map = _expect_mapping(state_node, state_where)
        _reject_unknown(state_map, {"label", "dist"}, state_where)
        label = _get_str(state_map, "label", state_where)
        dist = parse_distribution(_get_str(state_map, "dist", state_where), f"{state_where}.dist")
        states.append((label, dist))
    return Sensor(
        id=sensor_id,
        states=tuple(states),
        initial_state=_get_str(mapping, "initial", where),
    )


def _parse_rule(node: Any, where: str) -> Rule:
    mapping = _expect_mapping(node, where)
    _reject_unknown(mapping, {"when", "then"}, where)
    guard = _parse_label_map(mapping.get("when", {}), f"{where}.when")
    effects = []
    for i, effect_node in enumerate(_expect_list(mapping.get("then", []), f"{where}.then")):
        effect_where = f"{where}.then[{i}]"
        effect_map = _expect_mapping(effect_node, effect_where)
        _reject_unknown(effect_map, {"sensor", "state", "delay"}, effect_where)
        effects.append(
            Effect(
                target=_get_str(effect_map, "sensor", effect_where),
                state=_get_str(effect_map, "state", effect_where),
                delay=_get_int(effect_map, "delay", effect_where),
            )
        )
    return Rule(guard=guard, effects=tuple(effects))


def _parse_subsystem(node: Any, where: str) -> Subsystem:
    mapping = _expect_mapping(node, where)
    _reject_unknown(mapping, {"id", "kind", "sensors", "rules"}, where)
    kind_text = _get_str(mapping, "kind", where)
    try:
        kind = SubsystemKind(kind_text)
    except ValueError:
        raise ScenarioError(
            f"{where}.kind: expected one of component/module/product, got {kind_text!r}"
        ) from None
    sensors = _expect_list(mapping.get("sensors"), f"{where}.sensors")
    if not all(isinstance(s, str) for s in sensors):
        raise ScenarioError(f"{where}.sensors: expected a list of sensor ids")
    rules = tuple(
        _parse_rule(rule_node, f"{where}.rules[{i}]")
        for i, rule_node in enumerate(_expect_list(mapping.get("rules", []), f"{where}.rules"))
    )
    return Subsystem(
        id=_get_str(mapping, "id", where), kind=kind, sensors=tuple(sensors), rules=rules
    )


def _parse_functionality(node: Any, where: str) -> Functionality:
    mapping = _expect_mapping(node, where)
    _reject_unknown(mapping, {"module", "name", "parameters", "duration", "transitions"}, where)
    params = _expect_list(mapping.get("parameters"), f"{where}.parameters")
    if not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in params):
        raise ScenarioError(f"{where}.parameters: expected a list of numbers")
    transitions = []
    for i, entry_node in enumerate(
        _expect_list(mapping.get("transitions", []), f"{where}.transitions")
    ):
        entry_where = f"{where}.transitions[{i}]"
        entry_map = _expect_mapping(entry_node, entry_where)
        _reject_unknown(entry_map, {"param", "when", "then"}, entry_where)
        if "param" not in entry_map or not isinstance(entry_map["param"], (int, float)):
            raise ScenarioError(f"{entry_where}.param: expected a number")
        transitions.append(
            TransitionEntry(
                param=float(entry_map["param"]),
                guard=_parse_label_map(entry_map.get("when", {}), f"{entry_where}.when"),
                effect=_parse_label_map(entry_map.get("then", {}), f"{entry_where}.then"),
            )
        )
    try:
        return Functionality(
            module=_get_str(mapping, "module", where),
            name=_get_str(mapping, "name", where),
            parameter_domain=tuple(float(p) for p in params),
            transitions=tuple(transitions),
            duration=_get_int(mapping, "duration", where),
        )
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_script(
    node: Any, where: str, horizon: int
) -> tuple[tuple[ScriptedIntervention, ...], tuple[FaultSpec, ...]]:
    mapping = _expect_mapping(node, where)
    _reject_unknown(mapping, {"interventions", "faults"}, where)
    interventions = []
    for i, iv_node in enumerate(
        _expect_list(mapping.get("interventions", []), f"{where}.interventions")
    ):
        iv_where = f"{where}.interventions[{i}]"
        iv_map = _expect_mapping(iv_node, iv_where)
        _reject_unknown(iv_map, {"tick", "sensor", "state"}, iv_where)
        tick = _get_int(iv_map, "tick", iv_where)
        if not 0 <= tick < horizon:
            raise ScenarioError(f"{iv_where}.tick: {tick} not in [0, horizon={horizon})")
        interventions.append(
            ScriptedIntervention(
                tick=tick,
                sensor=_get_str(iv_map, "sensor", iv_where),
                state=_get_str(iv_map, "state", iv_where),
            )
        )
    faults = []
    for i, fault_node in enumerate(_expect_list(mapping.get("faults", []), f"{where}.faults")):
        fault_where = f"{where}.faults[{i}]"
        fault_map = _expect_mapping(fault_node, fault_where)
        _reject_unknown(fault_map, {"component", "activation", "rules"}, fault_where)
        activation = _get_int(fault_map, "activation", fault_where)
        if not 0 <= activation < horizon:
            raise ScenarioError(
                f"{fault_where}.activation: {activation} not in [0, horizon={horizon})"
            )
        rules = tuple(
            _parse_rule(rule_node, f"{fault_where}.rules[{j}]")
            for j, rule_node in enumerate(
                _expect_list(fault_map.get("rules", []), f"{fault_where}.rules")
            )
        )
        faults.append(
            FaultSpec(
                component=_get_str(fault_map, "component", fault_where),
                replacement_rules=rules,
                activation=activation,
            )
        )
    return tuple(interventions), tuple(faults)


_TOP_LEVEL_FIELDS = {
    "name",
    "seed",
    "horizon",
    "detection",
    "sensors",
    "subsystems",
    "functionalities",
    "script",
}


def parse_scenario(text: str) -> ScenarioDocument:
    """Parse and fully validate a scenario document.

    Schema violations raise ScenarioError with field context; semantic
    violations (bad references, overlapping guards, delays < 1, ...) are
    raised by model validation.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f"line {mark.line + 1}: " if mark is not None else ""
        raise ScenarioError(f"{line}invalid YAML: {exc}") from None
    root = _expect_mapping(raw, "document")
    _reject_unknown(root, _TOP_LEVEL_FIELDS, "document")

    horizon = _get_int(root, "horizon", "document")
    if horizon < 1:
        raise ScenarioError(f"document.horizon: must be >= 1, got {horizon}")
    detection = _expect_mapping(root.get("detection", {}), "document.detection")
    _reject_unknown(detection, {"window", "stride", "alpha"}, "document.detection")
    alpha = detection.get("alpha", DEFAULT_ALPHA)
    if not isinstance(alpha, (int, float)) or not 0 < alpha < 1:
        raise ScenarioError(f"document.detection.alpha: expected a number in (0, 1), got {alpha!r}")

    sensors = tuple(
        _parse_sensor(node, f"sensors[{i}]")
        for i, node in enumerate(_expect_list(root.get("sensors"), "document.sensors"))
    )
    subsystems = tuple(
        _parse_subsystem(node, f"subsystems[{i}]")
        for i, node in enumerate(_expect_list(root.get("subsystems", []), "document.subsystems"))
    )
    functionalities = tuple(
        _parse_functionality(node, f"functionalities[{i}]")
        for i, node in enumerate(
            _expect_list(root.get("functionalities", []), "document.functionalities")
        )
    )
    interventions, faults = _parse_script(root.get("script", {}), "script", horizon)

    doc = ScenarioDocument(
        name=root.get("name", ""),
        seed=_get_int(root, "seed", "document", default=0),
        horizon=horizon,
        window=_get_int(detection, "window", "document.detection", default=DEFAULT_WINDOW),
        stride=_get_int(detection, "stride", "document.detection", default=DEFAULT_STRIDE),
        alpha=float(alpha),
        sensors=sensors,
        subsystems=subsystems,
        functionalities=functionalities,
        interventions=interventions,
        faults=faults,
    )
    _validate_semantics(doc)
    return doc


def _validate_semantics(doc: ScenarioDocument) -> None:
    model = doc.build()  # delegated model validation; raises ModelError
    module_ids = {s.id for s in model.subsystems if s.kind is SubsystemKind.MODULE}
    product_ids = set(model.product_sensor_ids())
    for functionality in doc.functionalities:
        where = f"functionality {functionality.module}.{functionality.name}"
        if functionality.module not in module_ids:
            raise ScenarioError(f"{where}: module is not a module-kind subsystem")
        for entry in functionality.transitions:
            for sensor_id, label in list(entry.guard.items()) + list(entry.effect.items()):
                if sensor_id not in product_ids:
                    raise ScenarioError(
                        f"{where}: transition touches non-product sensor {sensor_id!r}"
                    )
                if label not in model.sensor(sensor_id).labels():
                    raise ScenarioError(
                        f"{where}: sensor {sensor_id!r} has no state {label!r}"
                    )
    for item in doc.interventions:
        model.check_assignment({item.sensor: item.state}, total=False)
    for fault in doc.faults:
        model.subsystem(fault.component)
        validate_rules(model, fault.component, fault.replacement_rules)


# ---------------------------------------------------------------------------
# Serialization back to YAML
# ---------------------------------------------------------------------------


def _rule_to_node(rule: Rule) -> dict:
    return {
        "when": dict(rule.guard),
        "then": [
            {"sensor": e.target, "state": e.state, "delay": e.delay} for e in rule.effects
        ],
    }


def serialize_scenario(doc: ScenarioDocument) -> str:
    """Render a document back to scenario YAML; parsing it again yields an
    equal document."""
    node: dict[str, Any] = {}
    if doc.name:
        node["name"] = doc.name
    node["seed"] = doc.seed
    node["horizon"] = doc.horizon
    node["detection"] = {"window": doc.window, "stride": doc.stride, "alpha": doc.alpha}
    node["sensors"] = [
        {
            "id": s.id,
            "initial": s.initial_state,
            "states": [
                {"label": label, "dist": format_distribution(dist)} for label, dist in s.states
            ],
        }
        for s in doc.sensors
    ]
    node["subsystems"] = [
        {
            "id": s.id,
            "kind": s.kind.value,
            "sensors": list(s.sensors),
            "rules": [_rule_to_node(r) for r in s.rules],
        }
        for s in doc.subsystems
    ]
    if doc.functionalities:
        node["functionalities"] = [
            {
                "module": f.module,
                "name": f.name,
                "parameters": list(f.parameter_domain),
                "duration": f.duration,
                "transitions": [
                    {"param": t.param, "when": dict(t.guard), "then": dict(t.effect)}
                    for t in f.transitions
                ],
            }
            for f in doc.functionalities
        ]
    if doc.interventions or doc.faults:
        script: dict[str, Any] = {}
        if doc.interventions:
            script["interventions"] = [
                {"tick": i.tick, "sensor": i.sensor, "state": i.state}
                for i in doc.interventions
            ]
        if doc.faults:
            script["faults"] = [
                {
                    "component": f.component,
                    "activation": f.activation,
                    "rules": [_rule_to_node(r) for r in f.replacement_rules],
                }
                for f in doc.faults
            ]
        node["script"] = script
    return yaml.safe_dump(node, sort_keys=False, default_flow_style=False)


# ---------------------------------------------------------------------------
# CSV exports
# ---------------------------------------------------------------------------


def export_trace(trace: Trace) -> str:
    """Trace CSV: ``tick,sensor_id,value,state_label``, rows sorted by
    (tick, sensor_id); float repr keeps the values bit-exact on re-import."""
    out = io.StringIO()
    out.write("tick,sensor_id,value,state_label\n")
    for record in trace.records:
        for sensor_id in sorted(record.values):
            out.write(
                f"{record.tick},{sensor_id},{record.values[sensor_id]!r},"
                f"{record.labels[sensor_id]}\n"
            )
    return out.getvalue()


def import_trace(text: str) -> Trace:
    """Read a trace CSV back into a Trace (the event log is not serialized)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["tick", "sensor_id", "value", "state_label"]:
        raise ScenarioError(f"unexpected trace CSV header: {header}")
    by_tick: dict[int, tuple[dict[str, float], dict[str, str]]] = {}
    sensor_ids: dict[str, None] = {}
    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ScenarioError(f"trace CSV row {row_number}: expected 4 columns, got {len(row)}")
        try:
            tick = int(row[0])
            value = float(row[2])
        except ValueError:
            raise ScenarioError(f"trace CSV row {row_number}: bad tick or value") from None
        values, labels = by_tick.setdefault(tick, ({}, {}))
        values[row[1]] = value
        labels[row[1]] = row[3]
        sensor_ids.setdefault(row[1])
    if sorted(by_tick) != list(range(len(by_tick))):
        raise ScenarioError("trace CSV ticks are not contiguous from 0")
    records = tuple(
        TickRecord(tick=t, values=by_tick[t][0], labels=by_tick[t][1], events=())
        for t in sorted(by_tick)
    )
    return Trace(sensor_ids=tuple(sensor_ids), records=records)


def export_anomaly_report(report: AnomalyReport) -> str:
    out = io.StringIO()
    out.write("sensor_id,window_start,matched_state,p_best,anomalous\n")
    for v in report.verdicts:
        out.write(f"{v.sensor},{v.start},{v.matched},{v.p_best!r},{int(v.anomalous)}\n")
    return out.getvalue()


def export_deviations(deviations: Sequence[Deviation]) -> str:
    out = io.StringIO()
    out.write("sensor_id,window_start,expected_state,matched_state\n")
    for d in deviations:
        out.write(f"{d.sensor},{d.start},{d.expected},{d.matched}\n")
    return out.getvalue()


def import_deviations(text: str) -> list[Deviation]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["sensor_id", "window_start", "expected_state", "matched_state"]:
        raise ScenarioError(f"unexpected deviations CSV header: {header}")
    deviations = []
    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ScenarioError(
                f"deviations CSV row {row_number}: expected 4 columns, got {len(row)}"
            )
        try:
            start = int(row[1])
        except ValueError:
            raise ScenarioError(f"deviations CSV row {row_number}: bad window start") from None
        deviations.append(
            Deviation(sensor=row[0], start=start, expected=row[2], matched=row[3])
        )
    return deviations


def _format_path(path: CausalPath) -> str:
    if not path.edges:
        return f"{path.sensor}"
    hops = [path.edges[0].cause]
    hops.extend(f"{e.effect}[via {e.via} delay {e.delay}]" for e in path.edges)
    return " -> ".join(hops)


def export_diagnosis(
    hypotheses: Sequence[FaultHypothesis],
    paths: Mapping[frozenset[str], Sequence[CausalPath]] | None = None,
) -> str:
    out = io.StringIO()
    out.write("rank,components,cardinality,explained,paths\n")
    for rank, hypothesis in enumerate(hypotheses, start=1):
        path_text = ""
        if paths and hypothesis.components in paths:
            path_text = "|".join(_format_path(p) for p in paths[hypothesis.components])
        out.write(
            f"{rank},{'+'.join(hypothesis.sorted_components())},{hypothesis.cardinality},"
            f"{'+'.join(sorted(hypothesis.explained))},{path_text}\n"
        )
    return out.getvalue()


def export_plan(plan: Plan, functionalities: Sequence[Functionality]) -> str:
    durations = {(f.module, f.name): f.duration for f in functionalities}
    out = io.StringIO()
    out.write("step,module,functionality,parameter,duration,cumulative_duration\n")
    cumulative = 0
    for index, step in enumerate(plan.steps, start=1):
        duration = durations[(step.module, step.functionality)]
        cumulative += duration
        out.write(
            f"{index},{step.module},{step.functionality},{step.parameter:g},"
            f"{duration},{cumulative}\n"
        )
    return out.getvalue()


# ---------------------------------------------------------------------------
# Bundled fixtures
# ---------------------------------------------------------------------------

BURNER_LEVELS = (0, 25, 50, 75, 100)


def knife_fixture() -> ScenarioDocument:
    """Knife-hardening line: gas oven with a lid, heat transfer to the knife,
    and a quench bath that hardens a hot blade.

    The script runs one production cycle (close the lid and fire the burner,
    let the chamber and knife heat up, open up and shut the burner off, then
    quench).  The scripted fault makes the lid actuator ignore its commands
    from tick 0, so the lid never closes and the knife never hardens.
    """
    sensors = (
        Sensor(
            id="burner_cmd",
            states=tuple((f"C{v}", Degenerate(float(v))) for v in BURNER_LEVELS),
            initial_state="C0",
        ),
        Sensor(
            id="burner_set",
            states=tuple((f"S{v}", Degenerate(float(v))) for v in BURNER_LEVELS),
            initial_state="S0",
        ),
        Sensor(
            id="lid_cmd",
            states=(
                ("Idle", Degenerate(0.0)),
                ("DoClose", Degenerate(1.0)),
                ("DoOpen", Degenerate(2.0)),
            ),
            initial_state="Idle",
        ),
        Sensor(
            id="lid_state",
            states=(("Open", Degenerate(0.0)), ("Closed", Degenerate(1.0))),
            initial_state="Open",
        ),
        Sensor(
            id="quench_cmd",
            states=(("Off", Degenerate(0.0)), ("On", Degenerate(1.0))),
            initial_state="Off",
        ),
        Sensor(
            id="oven_temp",
            states=(("Ambient", Normal(20.0, 2.0)), ("Hot", Normal(800.0, 10.0))),
            initial_state="Ambient",
        ),
        Sensor(
            id="knife_temp",
            states=(("Cold", Normal(20.0, 2.0)), ("Hot", Normal(780.0, 15.0))),
            initial_state="Cold",
        ),
        Sensor(
            id="knife_hardness",
            states=(("Soft", Uniform(20.0, 30.0)), ("Hard", Uniform(58.0, 65.0))),
            initial_state="Soft",
        ),
    )

    burner = Subsystem(
        id="burner",
        kind=SubsystemKind.COMPONENT,
        sensors=("burner_cmd", "burner_set"),
        rules=tuple(
            Rule(
                guard={"burner_cmd": f"C{v}"},
                effects=(Effect(target="burner_set", state=f"S{v}", delay=1),),
            )
            for v in BURNER_LEVELS
        ),
    )
    lid_actuator = Subsystem(
        id="lid_actuator",
        kind=SubsystemKind.COMPONENT,
        sensors=("lid_cmd", "lid_state"),
        rules=(
            Rule(
                guard={"lid_cmd": "DoClose"},
                effects=(Effect(target="lid_state", state="Closed", delay=1),),
            ),
            Rule(
                guard={"lid_cmd": "DoOpen"},
                effects=(Effect(target="lid_state", state="Open", delay=1),),
            ),
        ),
    )
    # Heat transfer: only a fully fired burner behind a closed lid heats the
    # chamber; every other combination lets it fall back to ambient.
    oven_chamber = Subsystem(
        id="oven_chamber",
        kind=SubsystemKind.COMPONENT,
        sensors=("burner_set", "lid_state", "oven_temp"),
        rules=tuple(
            Rule(
                guard={"burner_set": f"S{v}", "lid_state": lid},
                effects=(
                    Effect(
                        target="oven_temp",
                        state="Hot" if (v == 100 and lid == "Closed") else "Ambient",
                        delay=2,
                    ),
                ),
            )
            for v in BURNER_LEVELS
            for lid in ("Open", "Closed")
        ),
    )
    # The knife keeps its heat once out of the oven; only the quencher cools it.
    heat_exchange = Subsystem(
        id="heat_exchange",
        kind=SubsystemKind.COMPONENT,
        sensors=("oven_temp", "knife_temp"),
        rules=(
            Rule(
                guard={"oven_temp": "Hot"},
                effects=(Effect(target="knife_temp", state="Hot", delay=2),),
            ),
        ),
    )
    quencher = Subsystem(
        id="quencher",
        kind=SubsystemKind.COMPONENT,
        sensors=("quench_cmd", "knife_temp", "knife_hardness"),
        rules=(
            Rule(
                guard={"quench_cmd": "On", "knife_temp": "Hot"},
                effects=(
                    Effect(target="knife_temp", state="Cold", delay=1),
                    Effect(target="knife_hardness", state="Hard", delay=1),
                ),
            ),
            Rule(
                guard={"quench_cmd": "On", "knife_temp": "Cold"},
                effects=(Effect(target="knife_temp", state="Cold", delay=1),),
            ),
        ),
    )
    oven_module = Subsystem(
        id="oven",
        kind=SubsystemKind.MODULE,
        sensors=("burner_cmd", "burner_set", "lid_cmd", "lid_state", "oven_temp"),
        rules=(),
    )
    cooler_module = Subsystem(
        id="cooler", kind=SubsystemKind.MODULE, sensors=("quench_cmd",), rules=()
    )
    knife_product = Subsystem(
        id="knife",
        kind=SubsystemKind.PRODUCT,
        sensors=("knife_temp", "knife_hardness"),
        rules=(),
    )

    functionalities = (
        Functionality(
            module="oven",
            name="heat",
            parameter_domain=tuple(float(v) for v in BURNER_LEVELS),
            transitions=(
                TransitionEntry(
                    param=100.0, guard={"knife_temp": "Cold"}, effect={"knife_temp": "Hot"}
                ),
            ),
            duration=8,
        ),
        Functionality(
            module="cooler",
            name="quench",
            parameter_domain=(1.0,),
            transitions=(
                TransitionEntry(
                    param=1.0,
                    guard={"knife_temp": "Hot", "knife_hardness": "Soft"},
                    effect={"knife_temp": "Cold", "knife_hardness": "Hard"},
                ),
                TransitionEntry(
                    param=1.0,
                    guard={"knife_temp": "Hot", "knife_hardness": "Hard"},
                    effect={"knife_temp": "Cold"},
                ),
            ),
            duration=3,
        ),
    )

    interventions = (
        ScriptedIntervention(tick=5, sensor="burner_cmd", state="C100"),
        ScriptedIntervention(tick=5, sensor="lid_cmd", state="DoClose"),
        ScriptedIntervention(tick=130, sensor="burner_cmd", state="C0"),
        ScriptedIntervention(tick=130, sensor="lid_cmd", state="DoOpen"),
        ScriptedIntervention(tick=180, sensor="quench_cmd", state="On"),
        ScriptedIntervention(tick=185, sensor="quench_cmd", state="Off"),
    )
    faults = (FaultSpec(component="lid_actuator", replacement_rules=(), activation=0),)

    return ScenarioDocument(
        name="knife-hardening",
        seed=42,
        horizon=300,
        window=DEFAULT_WINDOW,
        stride=DEFAULT_STRIDE,
        alpha=DEFAULT_ALPHA,
        sensors=sensors,
        subsystems=(
            burner,
            lid_actuator,
            oven_chamber,
            heat_exchange,
            quencher,
            oven_module,
            cooler_module,
            knife_product,
        ),
        functionalities=functionalities,
        interventions=interventions,
        faults=faults,
    )


def chain_fixture() -> ScenarioDocument:
    """Three-sensor drive chain used to tell a broken sensor from a broken
    component.

    src drives mid, mid drives dst.  The scripted fault freezes the mid
    reading at an off-schedule state from tick 150 on while dst keeps its last
    commanded state, which is exactly the signature of a failed sensor: the
    reading goes wrong but nothing downstream reacts.
    """
    sensors = (
        Sensor(
            id="src",
            states=(("Lo", Degenerate(0.0)), ("Hi", Degenerate(1.0))),
            initial_state="Lo",
        ),
        Sensor(
            id="mid",
            states=(
                ("Lo", Normal(10.0, 1.0)),
                ("Hi", Normal(30.0, 1.0)),
                ("Stuck", Normal(70.0, 1.0)),
            ),
            initial_state="Lo",
        ),
        Sensor(
            id="dst",
            states=(("Lo", Degenerate(0.0)), ("Hi", Degenerate(1.0))),
            initial_state="Lo",
        ),
    )
    c_drive = Subsystem(
        id="c_drive",
        kind=SubsystemKind.COMPONENT,
        sensors=("src", "mid"),
        rules=(
            Rule(guard={"src": "Hi"}, effects=(Effect(target="mid", state="Hi", delay=1),)),
            Rule(guard={"src": "Lo"}, effects=(Effect(target="mid", state="Lo", delay=1),)),
        ),
    )
    c_relay = Subsystem(
        id="c_relay",
        kind=SubsystemKind.COMPONENT,
        sensors=("mid", "dst"),
        rules=(
            Rule(guard={"mid": "Hi"}, effects=(Effect(target="dst", state="Hi", delay=1),)),
            Rule(guard={"mid": "Lo"}, effects=(Effect(target="dst", state="Lo", delay=1),)),
        ),
    )
    sensor_fault = FaultSpec(
        component="c_drive",
        replacement_rules=(
            Rule(guard={}, effects=(Effect(target="mid", state="Stuck", delay=1),)),
        ),
        activation=150,
    )
    return ScenarioDocument(
        name="sensor-fault-chain",
        seed=11,
        horizon=300,
        window=DEFAULT_WINDOW,
        stride=DEFAULT_STRIDE,
        alpha=DEFAULT_ALPHA,
        sensors=sensors,
        subsystems=(c_drive, c_relay),
        functionalities=(),
        interventions=(ScriptedIntervention(tick=60, sensor="src", state="Hi"),),
        faults=(sensor_fault,),
    )


def thermostat_fixture() -> ScenarioDocument:
    """Closed-loop pair: the controller shuts the valve when it reads hot, the
    plant cools while the valve is shut.  The causal graph is a two-cycle and
    the label trajectory has period four."""
    sensors = (
        Sensor(
            id="temp",
            states=(("Cold", Normal(15.0, 1.0)), ("Hot", Normal(85.0, 1.0))),
            initial_state="Hot",
        ),
        Sensor(
            id="valve",
            states=(("Open", Degenerate(1.0)), ("Closed", Degenerate(0.0))),
            initial_state="Open",
        ),
        Sensor(id="room", states=(("Quiet", Degenerate(0.0)),), initial_state="Quiet"),
    )
    controller = Subsystem(
        id="controller",
        kind=SubsystemKind.COMPONENT,
        sensors=("temp", "valve"),
        rules=(
            Rule(guard={"temp": "Hot"}, effects=(Effect(target="valve", state="Closed", delay=1),)),
            Rule(guard={"temp": "Cold"}, effects=(Effect(target="valve", state="Open", delay=1),)),
        ),
    )
    plant = Subsystem(
        id="plant",
        kind=SubsystemKind.COMPONENT,
        sensors=("valve", "temp"),
        rules=(
            Rule(guard={"valve": "Closed"}, effects=(Effect(target="temp", state="Cold", delay=1),)),
            Rule(guard={"valve": "Open"}, effects=(Effect(target="temp", state="Hot", delay=1),)),
        ),
    )
    return ScenarioDocument(
        name="thermostat",
        seed=5,
        horizon=1000,
        window=DEFAULT_WINDOW,
        stride=DEFAULT_STRIDE,
        alpha=DEFAULT_ALPHA,
        sensors=sensors,
        subsystems=(controller, plant),
        functionalities=(),
        interventions=(),
        faults=(),
    )
