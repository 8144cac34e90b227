"""Scenario files: a small sectioned key/value format with units.

A scenario is plain text: ``[section]`` headers, ``key = value [unit]``
lines, ``#`` comments.  Unknown sections, unknown keys, malformed values and
units outside the fixed per-key table are rejected with field-level messages.
Missing keys take documented defaults; the ``dcb`` and ``transient`` sections
are optional as a whole.  Parsing and re-emitting is idempotent: emission
writes every key of every present section in declared order with normalized
number formatting, preserving each value's own unit.

The default scenario carries the reference system's nameplate ratings
verbatim, including the filter inductance with its nameplate (microfarad)
unit quirk; that entry is inert metadata.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .errors import ScenarioError
from .network import (
    CABLE_ZERO_SEQ_SCALE,
    CurrentLimitedInverter,
    FaultKind,
    FaultSpec,
    IdealSource,
    LoadModel,
    MicrogridModel,
    RelayLocation,
    SequenceImpedancePair,
    SourceModel,
    cable_impedance,
    load_impedance_from_power,
)
from .phasors import phasor

_UNIT_SCALE = {
    "": 1.0,
    "Hz": 1.0,
    "V": 1.0,
    "A": 1.0,
    "W": 1.0,
    "kW": 1e3,
    "var": 1.0,
    "kvar": 1e3,
    "ohm": 1.0,
    "mohm": 1e-3,
    "H": 1.0,
    "mH": 1e-3,
    "uH": 1e-6,
    "F": 1.0,
    "nF": 1e-9,
    "uF": 1e-6,
    "s": 1.0,
    "ms": 1e-3,
    "deg": math.pi / 180.0,
    "rad": 1.0,
}


@dataclass(frozen=True)
class FieldSpec:
    kind: str  # quantity | number | integer | boolean | choice | kpolicy
    units: tuple[str, ...] = ()
    choices: tuple[str, ...] = ()
    default: object = None


def _q(value: float, unit: str) -> tuple[float, str]:
    return (value, unit)


# Declared order doubles as canonical emission order.
FIELDS: dict[str, dict[str, FieldSpec]] = {
    "system": {
        "frequency": FieldSpec("quantity", ("Hz",), default=_q(60, "Hz")),
        "line_line_voltage": FieldSpec("quantity", ("V",), default=_q(480, "V")),
        "source": FieldSpec("choice", choices=("ideal", "inverter"), default="inverter"),
        "rated_power": FieldSpec("quantity", ("W", "kW"), default=_q(50, "kW")),
        "dc_bus_voltage": FieldSpec("quantity", ("V",), default=_q(1800, "V")),
        "filter_inductance": FieldSpec("quantity", ("uF", "uH"), default=_q(18, "uF")),
        "filter_capacitance": FieldSpec("quantity", ("F", "nF", "uF"), default=_q(250, "nF")),
        "i_max": FieldSpec("quantity", ("A",), default=_q(70, "A")),
        "cable_resistance": FieldSpec("quantity", ("ohm", "mohm"), default=_q(39, "mohm")),
        "cable_inductance": FieldSpec("quantity", ("H", "mH", "uH"), default=_q(70.8, "uH")),
        "cable_zero_seq_scale": FieldSpec("number", default=CABLE_ZERO_SEQ_SCALE),
        "fault_position": FieldSpec("number", default=0.5),
        "load_real_power": FieldSpec("quantity", ("W", "kW"), default=_q(25, "kW")),
        "load_reactive_power": FieldSpec("quantity", ("var", "kvar"), default=_q(12.5, "kvar")),
        "load_grounding_resistance": FieldSpec("quantity", ("ohm", "mohm"), default=_q(1, "ohm")),
        "v2_fraction": FieldSpec("number", default=0.6),
        "v0_fraction": FieldSpec("number", default=0.6),
        "v2_angle": FieldSpec("quantity", ("deg", "rad"), default=_q(0, "deg")),
        "v0_angle": FieldSpec("quantity", ("deg", "rad"), default=_q(0, "deg")),
    },
    "controller": {
        "kpv": FieldSpec("number", default=0.35),
        "krv": FieldSpec("number", default=400),
        "kvh5": FieldSpec("number", default=4),
        "kvh7": FieldSpec("number", default=20),
        "kvh11": FieldSpec("number", default=11),
        "kpi": FieldSpec("number", default=0.7),
        "kri": FieldSpec("number", default=400),
        "kih5": FieldSpec("number", default=30),
        "kih7": FieldSpec("number", default=30),
        "kih11": FieldSpec("number", default=30),
    },
    "fault": {
        "kind": FieldSpec("choice", choices=("lg", "ll"), default="lg"),
        "rf": FieldSpec("quantity", ("ohm", "mohm"), default=_q(3.68, "ohm")),
        "rf_min": FieldSpec("quantity", ("ohm", "mohm"), default=_q(3.68, "ohm")),
        "rf_max": FieldSpec("quantity", ("ohm", "mohm"), default=_q(1000, "ohm")),
        "rf_points": FieldSpec("integer", default=40),
        "rf_spacing": FieldSpec("choice", choices=("log", "linear"), default="log"),
    },
    "relay": {
        "location": FieldSpec(
            "choice", choices=("upstream", "downstream"), default="upstream"
        ),
        "k_policy": FieldSpec("kpolicy", default="auto"),
    },
    "dcb": {
        "latency": FieldSpec("quantity", ("ms", "s"), default=_q(2, "ms")),
        "loss": FieldSpec("number", default=0),
        "seed": FieldSpec("integer", default=1),
        "coordination_time": FieldSpec("quantity", ("ms", "s"), default=_q(16.7, "ms")),
        "operational": FieldSpec("boolean", default=True),
        "script": FieldSpec(
            "choice", choices=("network", "internal", "external"), default="network"
        ),
        "duration": FieldSpec("quantity", ("ms", "s"), default=_q(100, "ms")),
        "step": FieldSpec("quantity", ("ms", "s"), default=_q(0.1, "ms")),
        "fault_time": FieldSpec("quantity", ("ms", "s"), default=_q(10, "ms")),
    },
    "transient": {
        "dt": FieldSpec("quantity", ("ms", "s"), default=_q(1, "ms")),
        "duration": FieldSpec("quantity", ("ms", "s"), default=_q(200, "ms")),
        "fault_time": FieldSpec("quantity", ("ms", "s"), default=_q(50, "ms")),
        "limiter": FieldSpec(
            "choice", choices=("instantaneous", "latching", "none"), default="instantaneous"
        ),
    },
}

OPTIONAL_SECTIONS = ("dcb", "transient")


@dataclass
class Scenario:
    """Parsed scenario: section -> key -> typed value.

    Quantities are (value, unit) pairs in the unit the file used; numbers,
    integers, booleans and choice strings are stored as such.
    """

    sections: dict[str, dict[str, object]] = field(default_factory=dict)

    def has(self, section: str) -> bool:
        return section in self.sections

    def get(self, section: str, key: str) -> object:
        return self.sections[section][key]

    def si(self, section: str, key: str) -> float:
        """Quantity converted to SI (angles to radians, times to seconds)."""
        value, unit = self.sections[section][key]  # type: ignore[misc]
        return float(value) * _UNIT_SCALE[unit]


def _fmt_num(x: float) -> str:
    return f"{float(x):.12g}"


def _parse_value(section: str, key: str, raw: str, spec: FieldSpec) -> object:
    where = f"[{section}] {key}"
    tokens = raw.split()
    if not tokens:
        raise ScenarioError(f"{where}: empty value")
    if spec.kind == "quantity":
        if len(tokens) != 2:
            raise ScenarioError(f"{where}: expected '<number> <unit>', got {raw!r}")
        try:
            value = float(tokens[0])
        except ValueError as exc:
            raise ScenarioError(f"{where}: bad number {tokens[0]!r}") from exc
        if tokens[1] not in spec.units:
            raise ScenarioError(
                f"{where}: unit {tokens[1]!r} not in allowed set {sorted(spec.units)}"
            )
        return (value, tokens[1])
    if len(tokens) != 1:
        raise ScenarioError(f"{where}: expected a single token, got {raw!r}")
    tok = tokens[0]
    if spec.kind == "number":
        try:
            return float(tok)
        except ValueError as exc:
            raise ScenarioError(f"{where}: bad number {tok!r}") from exc
    if spec.kind == "integer":
        try:
            return int(tok)
        except ValueError as exc:
            raise ScenarioError(f"{where}: bad integer {tok!r}") from exc
    if spec.kind == "boolean":
        if tok not in ("true", "false"):
            raise ScenarioError(f"{where}: expected true or false, got {tok!r}")
        return tok == "true"
    if spec.kind == "choice":
        if tok not in spec.choices:
            raise ScenarioError(f"{where}: {tok!r} not one of {list(spec.choices)}")
        return tok
    if spec.kind == "kpolicy":
        if tok in ("auto", "line", "downstream-path"):
            return tok
        try:
            return complex(tok)
        except ValueError as exc:
            raise ScenarioError(
                f"{where}: expected auto, line, downstream-path or a complex literal"
            ) from exc
    raise ScenarioError(f"{where}: unhandled field kind {spec.kind!r}")


def _fmt_value(value: object, spec: FieldSpec) -> str:
    if spec.kind == "quantity":
        v, unit = value  # type: ignore[misc]
        return f"{_fmt_num(v)} {unit}"
    if spec.kind == "number":
        return _fmt_num(value)  # type: ignore[arg-type]
    if spec.kind == "integer":
        return str(int(value))  # type: ignore[arg-type]
    if spec.kind == "boolean":
        return "true" if value else "false"
    if spec.kind == "kpolicy" and isinstance(value, complex):
        return f"{value.real:.12g}{value.imag:+.12g}j"
    return str(value)


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text, filling defaults for missing keys."""
    raw: dict[str, dict[str, str]] = {}
    current: str | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            if current not in FIELDS:
                raise ScenarioError(f"line {lineno}: unknown section [{current}]")
            if current in raw:
                raise ScenarioError(f"line {lineno}: duplicate section [{current}]")
            raw[current] = {}
            continue
        if current is None:
            raise ScenarioError(f"line {lineno}: key/value outside any section")
        if "=" not in stripped:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in FIELDS[current]:
            raise ScenarioError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if key in raw[current]:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        raw[current][key] = value.strip()

    scenario = Scenario()
    for section, fields in FIELDS.items():
        if section in OPTIONAL_SECTIONS and section not in raw:
            continue
        parsed: dict[str, object] = {}
        given = raw.get(section, {})
        for key, spec in fields.items():
            if key in given:
                parsed[key] = _parse_value(section, key, given[key], spec)
            else:
                parsed[key] = spec.default
        scenario.sections[section] = parsed
    _check_consistency(scenario)
    return scenario


def _check_consistency(s: Scenario) -> None:
    if s.si("system", "frequency") <= 0:
        raise ScenarioError("[system] frequency: must be positive")
    if s.si("system", "line_line_voltage") <= 0:
        raise ScenarioError("[system] line_line_voltage: must be positive")
    if s.si("system", "i_max") <= 0:
        raise ScenarioError("[system] i_max: must be positive")
    pos = float(s.get("system", "fault_position"))  # type: ignore[arg-type]
    if not 0.0 < pos < 1.0:
        raise ScenarioError("[system] fault_position: must lie strictly inside (0, 1)")
    for key in ("v2_fraction", "v0_fraction"):
        v = float(s.get("system", key))  # type: ignore[arg-type]
        if not 0.0 <= v <= 1.0:
            raise ScenarioError(f"[system] {key}: must lie in [0, 1]")
    if s.si("system", "load_real_power") <= 0:
        raise ScenarioError("[system] load_real_power: must be positive")
    if s.si("fault", "rf") < 0 or s.si("fault", "rf_min") < 0:
        raise ScenarioError("[fault] rf: must be >= 0")
    if s.si("fault", "rf_min") > s.si("fault", "rf_max"):
        raise ScenarioError("[fault] rf_min must not exceed rf_max")
    if int(s.get("fault", "rf_points")) < 1:  # type: ignore[arg-type]
        raise ScenarioError("[fault] rf_points: must be >= 1")
    if s.has("dcb"):
        loss = float(s.get("dcb", "loss"))  # type: ignore[arg-type]
        if not 0.0 <= loss <= 1.0:
            raise ScenarioError("[dcb] loss: must lie in [0, 1]")
    if s.has("transient"):
        if s.si("transient", "dt") <= 0:
            raise ScenarioError("[transient] dt: must be positive")
        if s.si("transient", "fault_time") >= s.si("transient", "duration"):
            raise ScenarioError("[transient] fault_time: must fall before duration")


def scenario_to_text(s: Scenario) -> str:
    """Canonical emission: every present section, every key, declared order."""
    lines: list[str] = []
    for section, fields in FIELDS.items():
        if section not in s.sections:
            continue
        lines.append(f"[{section}]")
        for key, spec in fields.items():
            lines.append(f"{key} = {_fmt_value(s.sections[section][key], spec)}")
        lines.append("")
    return "\n".join(lines)


def scenario_digest(s: Scenario) -> str:
    return hashlib.sha256(scenario_to_text(s).encode()).hexdigest()


def default_scenario() -> Scenario:
    """All-defaults scenario (every section present)."""
    s = Scenario()
    for section, fields in FIELDS.items():
        s.sections[section] = {key: spec.default for key, spec in fields.items()}
    return s


def _source_from(s: Scenario, kind: str) -> SourceModel:
    v1 = phasor(s.si("system", "line_line_voltage") / math.sqrt(3.0))
    if kind == "ideal":
        return IdealSource(v1=v1)
    return CurrentLimitedInverter(
        v1=v1,
        v2_fraction=float(s.get("system", "v2_fraction")),  # type: ignore[arg-type]
        v0_fraction=float(s.get("system", "v0_fraction")),  # type: ignore[arg-type]
        v2_angle=s.si("system", "v2_angle"),
        v0_angle=s.si("system", "v0_angle"),
        i_max_rms=s.si("system", "i_max"),
    )


def build_model(
    s: Scenario,
    *,
    rf: float | None = None,
    source_kind: str | None = None,
) -> MicrogridModel:
    """Materialize the microgrid model a scenario describes.

    rf overrides the fault resistance (sweeps); source_kind overrides the
    scenario's source selection (case runs that pin the model type).
    """
    f = s.si("system", "frequency")
    z_cable = cable_impedance(
        s.si("system", "cable_resistance"), s.si("system", "cable_inductance"), f
    )
    cable = SequenceImpedancePair(
        z1=z_cable, z0=z_cable * float(s.get("system", "cable_zero_seq_scale"))  # type: ignore[arg-type]
    )
    pos = float(s.get("system", "fault_position"))  # type: ignore[arg-type]
    z_load = load_impedance_from_power(
        s.si("system", "load_real_power"),
        s.si("system", "load_reactive_power"),
        s.si("system", "line_line_voltage"),
    )
    kind = FaultKind(str(s.get("fault", "kind")))
    fault = FaultSpec(kind=kind, rf=s.si("fault", "rf") if rf is None else rf)
    return MicrogridModel(
        source=_source_from(s, source_kind or str(s.get("system", "source"))),
        line_1m=cable.scaled(pos),
        line_m2=cable.scaled(1.0 - pos),
        load=LoadModel(
            z_load=z_load,
            z_ground=complex(s.si("system", "load_grounding_resistance")),
        ),
        fault=fault,
        frequency=f,
    )


def relay_location(s: Scenario) -> RelayLocation:
    return RelayLocation(str(s.get("relay", "location")))


def sweep_points(s: Scenario) -> list[float]:
    """Fault-resistance grid of the scenario's sweep specification."""
    lo = s.si("fault", "rf_min")
    hi = s.si("fault", "rf_max")
    n = int(s.get("fault", "rf_points"))  # type: ignore[arg-type]
    if n == 1 or lo == hi:
        return [lo]
    if str(s.get("fault", "rf_spacing")) == "log":
        if lo <= 0:
            raise ScenarioError("[fault] rf_min: log spacing needs rf_min > 0")
        ratio = (hi / lo) ** (1.0 / (n - 1))
        return [lo * ratio**i for i in range(n)]
    step = (hi - lo) / (n - 1)
    return [lo + step * i for i in range(n)]
