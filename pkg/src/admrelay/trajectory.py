"""Quasi-static R-X trajectory simulation with inverter current limiting.

The network is re-solved phasor-statically at every time step (fault branch
open before the fault instant, closed after).  When any source phase current
exceeds the inverter's RMS cap the limiter engages: the internal source is
rescaled so the worst phase lands on the cap, and negative-/zero-sequence
content appears at the inverter's configured fractions of the rescaled
positive-sequence voltage.  Engagement is first-order smoothed so the applied
source walks into the limited operating point instead of jumping.

Measured impedances per step follow the relay conventions: the ground element
of an upstream relay is the plain v_a/i_a loop ratio and a downstream relay's
ground element is compensated for its load path, so it settles on that path's
positive-sequence impedance.  Phasor magnitudes are RMS throughout, so the
per-step RMS of a current is simply its magnitude.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import ConvergenceError, ModelError
from .network import (
    CurrentLimitedInverter,
    FaultSpec,
    MicrogridModel,
    RelayLocation,
    downstream_path,
)
from .phasors import PhaseTriple, SequenceTriple, phase_to_sequence
from .relaying import measure_zlg, measure_zll, path_compensation
from . import nodal

DT_DEFAULT_S = 1e-3
DURATION_DEFAULT_S = 0.200
FAULT_TIME_DEFAULT_S = 0.050
TAU_LIM_DEFAULT_S = 5e-3
_CAP_SLACK = 1e-6
_MAX_FIXED_POINT_ITER = 50


class LimiterKind(Enum):
    INSTANTANEOUS_SATURATION = "instantaneous"
    LATCHING = "latching"


@dataclass
class TrajectoryPoint:
    t: float
    relay_v: PhaseTriple
    relay_i: PhaseTriple
    z_lg: complex
    z_ll: complex
    limited: bool


def _open_fault(m: MicrogridModel) -> MicrogridModel:
    return m.with_fault(replace(m.fault, rf=math.inf))


def _source_currents(m: MicrogridModel, seq: SequenceTriple) -> PhaseTriple:
    return nodal.solve_network(m, RelayLocation.UPSTREAM_OF_FAULT, source_seq=seq).relay_i


def _worst_phase(i: PhaseTriple) -> float:
    return max(abs(i.a), abs(i.b), abs(i.c))


def _limited_seq(src: CurrentLimitedInverter, scale: float, level: float) -> SequenceTriple:
    """Applied source at engagement level `level`: the positive-sequence
    magnitude blends from nominal to scale*nominal while the unbalance
    fractions ramp in with the same level."""
    v1_eff = src.v1 * (1.0 - level * (1.0 - scale))
    return SequenceTriple(
        zero=v1_eff * (level * src.v0_fraction) * cmath.exp(1j * src.v0_angle),
        pos=v1_eff,
        neg=v1_eff * (level * src.v2_fraction) * cmath.exp(1j * src.v2_angle),
    )


def _target_scale(m: MicrogridModel, src: CurrentLimitedInverter) -> float:
    """Fixed point of the limiter: the source scale whose fully engaged,
    unbalance-injecting solution puts the worst phase exactly on the cap.
    The network is linear in the scale, so this converges immediately; the
    loop guards the contract anyway."""
    scale = 1.0
    worst = math.inf
    for _ in range(_MAX_FIXED_POINT_ITER):
        worst = _worst_phase(_source_currents(m, _limited_seq(src, scale, 1.0)))
        if worst <= src.i_max_rms * (1.0 + _CAP_SLACK):
            return scale
        scale *= src.i_max_rms / worst
    raise ConvergenceError(
        f"limiter fixed point did not converge: scale={scale:.6g}, worst={worst:.6g} A"
    )


def simulate_trajectory(
    m: MicrogridModel,
    fault_time: float = FAULT_TIME_DEFAULT_S,
    duration: float = DURATION_DEFAULT_S,
    dt: float = DT_DEFAULT_S,
    limiter: LimiterKind | None = LimiterKind.INSTANTANEOUS_SATURATION,
    relay_location: RelayLocation = RelayLocation.UPSTREAM_OF_FAULT,
    *,
    tau_lim: float = TAU_LIM_DEFAULT_S,
    k_lg: complex | None = None,
) -> list[TrajectoryPoint]:
    """Step the model through a fault episode and log the measured impedances.

    limiter=None disables current limiting (the source stays balanced at its
    nominal voltage).  k_lg overrides the ground-element compensation; by
    default an upstream relay uses the plain loop ratio and a downstream
    relay the compensation of its load path.
    """
    if not dt > 0:
        raise ModelError("trajectory step must be positive")
    if not fault_time < duration:
        raise ModelError("fault_time must fall before the end of the window")
    src = m.source
    limit_active = limiter is not None and isinstance(src, CurrentLimitedInverter)

    if k_lg is None:
        if relay_location is RelayLocation.DOWNSTREAM_OF_FAULT:
            z_d1, z_d0 = downstream_path(m)
            k_lg = path_compensation(z_d0, z_d1)
        else:
            k_lg = 0j

    healthy = _open_fault(m)
    balanced = SequenceTriple(0j, src.v1, 0j)
    smoothing = 1.0 - math.exp(-dt / tau_lim)

    engaged = False
    level = 0.0
    target = 1.0
    points: list[TrajectoryPoint] = []
    n_steps = int(round(duration / dt))
    for i in range(n_steps + 1):
        t = i * dt
        faulted = t >= fault_time
        model_t = m if faulted else healthy
        seq = _limited_seq(src, target, level) if engaged else balanced

        sol = nodal.solve_network(model_t, relay_location, source_seq=seq)
        seq_i = sol.relay_seq_i
        z_lg = measure_zlg(sol.relay_v.a, sol.relay_i.a, seq_i.zero, k_lg)
        z_ll = measure_zll(sol.relay_v.b, sol.relay_v.c, sol.relay_i.b, sol.relay_i.c)
        points.append(
            TrajectoryPoint(
                t=t, relay_v=sol.relay_v, relay_i=sol.relay_i,
                z_lg=z_lg, z_ll=z_ll, limited=engaged,
            )
        )

        if not limit_active:
            continue
        if relay_location is RelayLocation.UPSTREAM_OF_FAULT:
            i_src = sol.relay_i
        else:
            i_src = _source_currents(model_t, seq)
        if not engaged:
            if _worst_phase(i_src) > src.i_max_rms * (1.0 + _CAP_SLACK):
                engaged = True
                target = _target_scale(model_t, src)
        else:
            if limiter is LimiterKind.INSTANTANEOUS_SATURATION:
                target = _target_scale(model_t, src)
            level += smoothing * (1.0 - level)

    return points


def calibrate_unbalance(m: MicrogridModel, fault: FaultSpec) -> tuple[float, float]:
    """Measure the steady-state unbalance the limited inverter produces.

    Runs a default trajectory on the given fault and returns the relay-point
    ratios (|v2|/|v1|, |v0|/|v1|) at the final settled step.  Without limiter
    engagement (cap never reached) both ratios stay near zero.
    """
    if not isinstance(m.source, CurrentLimitedInverter):
        raise ModelError("calibration requires a CurrentLimitedInverter source")
    points = simulate_trajectory(m.with_fault(fault))
    v_seq = phase_to_sequence(points[-1].relay_v)
    v1 = abs(v_seq.pos)
    if v1 == 0:
        raise ConvergenceError("calibration found no positive-sequence voltage")
    return abs(v_seq.neg) / v1, abs(v_seq.zero) / v1


TRAJECTORY_HEADER = "t_s,Re_Zlg_ohm,Im_Zlg_ohm,Re_Zll_ohm,Im_Zll_ohm,I_a_rms_A,limited"


def format_trajectory(points: list[TrajectoryPoint]) -> str:
    """Delimiter-separated trajectory, one row per step, LF line endings."""
    lines = [TRAJECTORY_HEADER]
    for p in points:
        lines.append(
            f"{p.t:.6g},{p.z_lg.real:.10g},{p.z_lg.imag:.10g},"
            f"{p.z_ll.real:.10g},{p.z_ll.imag:.10g},"
            f"{abs(p.relay_i.a):.10g},{1 if p.limited else 0}"
        )
    return "\n".join(lines) + "\n"
