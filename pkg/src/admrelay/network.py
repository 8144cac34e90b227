"""Two-bus microgrid data model and its per-sequence Thevenin reductions.

The system is a source bus feeding a load bus over a cable, with the fault
applied at an interior point of the cable (the midpoint by default).  The
relay point is that interior node: an upstream relay measures the current in
the source-side segment, a downstream relay the current in the load-side
segment, both together with the node voltage.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import ModelError
from .phasors import SequenceTriple, parallel, phasor

# Nameplate operating point of the reference system (the load reactive power
# is reactive despite the nameplate carrying a watt unit).
SYSTEM_FREQUENCY_HZ = 60.0
LINE_LINE_VOLTAGE_V = 480.0
CABLE_RESISTANCE_OHM = 0.039
CABLE_INDUCTANCE_H = 70.8e-6
LOAD_REAL_POWER_W = 25e3
LOAD_REACTIVE_POWER_VAR = 12.5e3
INVERTER_RATED_POWER_W = 50e3
INVERTER_MAX_RMS_CURRENT_A = 70.0
UNBALANCE_FRACTION = 0.60
# The cable's zero-sequence impedance and the load neutral grounding have no
# nameplate values; the usual assumptions for a run with ground return and a
# resistance-grounded wye load are adopted, overridable per scenario.
CABLE_ZERO_SEQ_SCALE = 3.0
LOAD_GROUNDING_OHM = 1.0
DC_BUS_VOLTAGE_V = 1800.0
FILTER_INDUCTANCE_VALUE = 18.0  # nameplate lists a microfarad unit; inert metadata
FILTER_CAPACITANCE_F = 250e-9

LINE_NEUTRAL_VOLTAGE_V = LINE_LINE_VOLTAGE_V / math.sqrt(3.0)


@dataclass(frozen=True)
class SequenceImpedancePair:
    """Series impedances of one element: z1 [ohm] for positive and negative
    sequence alike (exact for static elements), z0 [ohm] for zero sequence."""

    z1: complex
    z0: complex

    def __post_init__(self) -> None:
        if self.z1.real < 0 or self.z0.real < 0:
            raise ModelError("series element must be passive: Re(z) >= 0")

    def scaled(self, factor: float) -> "SequenceImpedancePair":
        return SequenceImpedancePair(self.z1 * factor, self.z0 * factor)


@dataclass(frozen=True)
class IdealSource:
    """Balanced stiff voltage source; v1 is the line-neutral phasor [V]."""

    v1: complex

    def sequence_voltages(self) -> SequenceTriple:
        return SequenceTriple(0j, self.v1, 0j)


@dataclass(frozen=True)
class CurrentLimitedInverter:
    """Inverter abstracted as an unbalanced voltage source with an RMS cap.

    While its limiter is active the inverter holds negative- and zero-sequence
    voltage at the given fractions of the positive-sequence output, each
    rotated by its angle [rad].  i_max_rms is the per-phase output current cap.
    """

    v1: complex
    v2_fraction: float = UNBALANCE_FRACTION
    v0_fraction: float = UNBALANCE_FRACTION
    v2_angle: float = 0.0
    v0_angle: float = 0.0
    i_max_rms: float = INVERTER_MAX_RMS_CURRENT_A

    def __post_init__(self) -> None:
        if not 0.0 <= self.v2_fraction <= 1.0 or not 0.0 <= self.v0_fraction <= 1.0:
            raise ModelError("sequence-voltage fractions must lie in [0, 1]")
        if not self.i_max_rms > 0:
            raise ModelError("i_max_rms must be positive")

    def sequence_voltages(self) -> SequenceTriple:
        return SequenceTriple(
            zero=self.v1 * self.v0_fraction * cmath.exp(1j * self.v0_angle),
            pos=self.v1,
            neg=self.v1 * self.v2_fraction * cmath.exp(1j * self.v2_angle),
        )


SourceModel = IdealSource | CurrentLimitedInverter


@dataclass(frozen=True)
class LoadModel:
    """Wye load: z_load [ohm] per phase, z_ground [ohm] neutral to ground."""

    z_load: complex
    z_ground: complex = 0j

    def __post_init__(self) -> None:
        if not self.z_load.real > 0:
            raise ModelError("load must dissipate power: Re(z_load) > 0")


class FaultKind(Enum):
    LINE_GROUND_A = "lg"
    LINE_LINE_BC = "ll"


class FaultLocation(Enum):
    MIDPOINT = "midpoint"


class RelayLocation(Enum):
    UPSTREAM_OF_FAULT = "upstream"
    DOWNSTREAM_OF_FAULT = "downstream"


@dataclass(frozen=True)
class FaultSpec:
    """Shunt fault at the interior line node; rf [ohm] is purely resistive.

    rf = inf denotes the healthy network (fault branch open).
    """

    kind: FaultKind
    rf: float
    location: FaultLocation = FaultLocation.MIDPOINT

    def __post_init__(self) -> None:
        if self.rf < 0 or math.isnan(self.rf):
            raise ModelError("fault resistance must be >= 0")


@dataclass(frozen=True)
class MicrogridModel:
    """Complete two-bus study case: source, line segments, load and fault."""

    source: SourceModel
    line_1m: SequenceImpedancePair
    line_m2: SequenceImpedancePair
    load: LoadModel
    fault: FaultSpec
    frequency: float = SYSTEM_FREQUENCY_HZ

    def __post_init__(self) -> None:
        if not self.frequency > 0:
            raise ModelError("frequency must be positive")

    def with_fault(self, fault: FaultSpec) -> "MicrogridModel":
        return replace(self, fault=fault)


@dataclass(frozen=True)
class TheveninSet:
    """Per-sequence reduction of the healthy network seen from the fault node."""

    z_eq1: complex
    z_eq2: complex
    z_eq0: complex
    v_eq1: complex


@dataclass(frozen=True)
class InverterControlParams:
    """Controller gains and hardware ratings of the reference design, carried
    as inert metadata so scenario files can round-trip the full parameter set.
    None of these values enter any computation (filter_l keeps the nameplate's
    unit quirk and is deliberately left uninterpreted)."""

    kpv: float = 0.35
    krv: float = 400.0
    kvh5: float = 4.0
    kvh7: float = 20.0
    kvh11: float = 11.0
    kpi: float = 0.7
    kri: float = 400.0
    kih5: float = 30.0
    kih7: float = 30.0
    kih11: float = 30.0
    p_rated: float = INVERTER_RATED_POWER_W
    vdc: float = DC_BUS_VOLTAGE_V
    filter_l: float = FILTER_INDUCTANCE_VALUE
    filter_c: float = FILTER_CAPACITANCE_F
    cable_r: float = CABLE_RESISTANCE_OHM
    cable_l: float = CABLE_INDUCTANCE_H


def load_impedance_from_power(p: float, q: float, v_ll: float) -> complex:
    """Per-phase wye impedance drawing p [W] + j q [var] at v_ll [V] line-line.

    Inverse of S = v_ll**2 / conj(Z) for the three-phase total.
    """
    if not p > 0:
        raise ModelError("load real power must be positive")
    if not v_ll > 0:
        raise ModelError("line-line voltage must be positive")
    return v_ll * v_ll / complex(p, -q)


def cable_impedance(r: float, l: float, f: float) -> complex:
    """Series impedance r + j*2*pi*f*l of a cable at frequency f [Hz]."""
    if r < 0 or l < 0 or f < 0:
        raise ModelError("cable parameters must be nonnegative")
    return complex(r, 2.0 * math.pi * f * l)


def norton_source(v: complex, z: complex) -> complex:
    """Norton current v/z of a voltage source v behind impedance z."""
    if z == 0:
        raise ModelError("norton_source: source impedance must be nonzero")
    return v / z


def downstream_path(m: MicrogridModel) -> tuple[complex, complex]:
    """Positive- and zero-sequence impedance of the load-side path from the
    fault node: (z_m2 + z_load, z_m2_0 + z_load + 3*z_ground)."""
    z_d1 = m.line_m2.z1 + m.load.z_load
    z_d0 = m.line_m2.z0 + m.load.z_load + 3.0 * m.load.z_ground
    return z_d1, z_d0


def thevenin_line_ground(m: MicrogridModel) -> TheveninSet:
    """Reduce each sequence network of the healthy system at the fault node.

    z_eq1 = z_1m || (z_m2 + z_load) with the matching voltage divider for
    v_eq1; the negative-sequence reduction equals the positive one; the
    zero-sequence path includes the load grounding.
    """
    z_d1, z_d0 = downstream_path(m)
    z_eq1 = parallel(m.line_1m.z1, z_d1)
    v_eq1 = m.source.v1 * z_d1 / (m.line_1m.z1 + z_d1)
    z_eq0 = parallel(m.line_1m.z0, z_d0)
    return TheveninSet(z_eq1=z_eq1, z_eq2=z_eq1, z_eq0=z_eq0, v_eq1=v_eq1)


def default_ideal_source() -> IdealSource:
    """Stiff source at the rated line-neutral voltage, zero degrees."""
    return IdealSource(v1=phasor(LINE_NEUTRAL_VOLTAGE_V))


def default_inverter_source(
    v2_fraction: float = UNBALANCE_FRACTION,
    v0_fraction: float = UNBALANCE_FRACTION,
    i_max_rms: float = INVERTER_MAX_RMS_CURRENT_A,
) -> CurrentLimitedInverter:
    """Current-limited inverter at the rated operating point."""
    return CurrentLimitedInverter(
        v1=phasor(LINE_NEUTRAL_VOLTAGE_V),
        v2_fraction=v2_fraction,
        v0_fraction=v0_fraction,
        i_max_rms=i_max_rms,
    )


def reference_model(
    fault: FaultSpec,
    source: SourceModel | None = None,
    *,
    fault_position: float = 0.5,
    zero_seq_scale: float = CABLE_ZERO_SEQ_SCALE,
    z_ground: complex = complex(LOAD_GROUNDING_OHM),
) -> MicrogridModel:
    """Build the reference study case from the nameplate parameters.

    fault_position is the fraction of the cable upstream of the fault node
    (0.5 places the fault at the midpoint); zero_seq_scale multiplies the
    cable positive-sequence impedance to form its zero-sequence value.
    """
    if not 0.0 < fault_position < 1.0:
        raise ModelError("fault_position must lie strictly inside (0, 1)")
    z_cable = cable_impedance(CABLE_RESISTANCE_OHM, CABLE_INDUCTANCE_H, SYSTEM_FREQUENCY_HZ)
    cable = SequenceImpedancePair(z1=z_cable, z0=z_cable * zero_seq_scale)
    z_load = load_impedance_from_power(
        LOAD_REAL_POWER_W, LOAD_REACTIVE_POWER_VAR, LINE_LINE_VOLTAGE_V
    )
    return MicrogridModel(
        source=source if source is not None else default_inverter_source(),
        line_1m=cable.scaled(fault_position),
        line_m2=cable.scaled(1.0 - fault_position),
        load=LoadModel(z_load=z_load, z_ground=z_ground),
        fault=fault,
        frequency=SYSTEM_FREQUENCY_HZ,
    )
