"""Closed-form solutions for shunt faults at the interior node of the line.

Each solver reduces the per-sequence networks around the fault node and
returns the relay-point quantities plus every intermediate of the reduction
chain under short snake_case keys (z_d, z_1d, i_11, ...).

Conventions shared by all six cases:

* the relay voltage is the fault-node voltage;
* an upstream relay measures the source-side segment current (reference
  direction source bus -> fault node), a downstream relay the load-side
  segment current (fault node -> load bus);
* the upstream solvers follow the compact current-divider chains, which treat
  the source-side segment as negligible against the load path when splitting
  the negative-/zero-sequence current.  Their results therefore carry a small
  systematic error (within 2 percent on the reference system) against the
  phase-domain solver in :mod:`admrelay.nodal`; the downstream solvers are
  exact.

Conventions kept deliberately:

* the upstream line-ground relay voltage carries the negative- and
  zero-sequence segment drops with a positive sign; the small bias this
  convention introduces sits well inside the 2 percent budget above and is
  part of this module's contract;
* the compensation that makes a downstream ground element read exactly the
  positive-sequence load-path impedance is z0/z1 - 1 (see
  :func:`admrelay.relaying.path_compensation`), the negative of the textbook
  1 - z0/z1 form kept by :func:`admrelay.relaying.k_factor`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import MeasurementError, ModelError, SingularSystemError
from .network import (
    CurrentLimitedInverter,
    FaultKind,
    IdealSource,
    MicrogridModel,
    downstream_path,
    thevenin_line_ground,
)
from .phasors import PhaseTriple, SequenceTriple, parallel, sequence_to_phase


@dataclass
class FaultSolution:
    """Relay-point quantities of one solved case.

    relay_v and relay_i are phase triples at the relay; relay_seq_i is the
    sequence resolution of relay_i; z_measured is the distance-element ratio
    for the fault kind (uncompensated phase-a loop for line-ground cases,
    b-c difference loop for line-line cases); intermediates holds every named
    step of the reduction.
    """

    relay_v: PhaseTriple
    relay_i: PhaseTriple
    relay_seq_i: SequenceTriple
    z_measured: complex
    intermediates: dict[str, complex] = field(default_factory=dict)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ModelError(message)


def _finite_grounding(m: MicrogridModel) -> None:
    z_g = complex(m.load.z_ground)
    if not (math.isfinite(z_g.real) and math.isfinite(z_g.imag)):
        raise ModelError("closed-form solvers require a finite grounding impedance")
    if m.line_1m.z1 == 0 or m.line_1m.z0 == 0:
        raise SingularSystemError(
            "source-side segment with zero impedance has no Norton reduction"
        )


def _assemble(
    v_seq: SequenceTriple, i_seq: SequenceTriple, z_measured: complex, inter: dict[str, complex]
) -> FaultSolution:
    return FaultSolution(
        relay_v=sequence_to_phase(v_seq),
        relay_i=sequence_to_phase(i_seq),
        relay_seq_i=i_seq,
        z_measured=z_measured,
        intermediates=inter,
    )


def _zll_ratio(v: PhaseTriple, i: PhaseTriple, scale: complex) -> complex:
    """Phase-distance ratio (v_b - v_c) / (i_b - i_c) with a guard against a
    vanishing current difference (scale sets the comparison level)."""
    di = i.b - i.c
    if abs(di) < 1e-12 * abs(scale):
        raise MeasurementError("line-line element: phase current difference is zero")
    return (v.b - v.c) / di


def _lg_upstream(m: MicrogridModel, v_src: SequenceTriple) -> FaultSolution:
    """Shared line-ground upstream chain; v_src carries the source's sequence
    voltages, so a balanced source is the degenerate (zero neg/zero) case."""
    _finite_grounding(m)
    z1_up = m.line_1m.z1
    z0_up = m.line_1m.z0
    z_d, z_d0 = downstream_path(m)
    th = thevenin_line_ground(m)
    rf = m.fault.rf

    # Thevenin voltages of the negative- and zero-sequence networks at the
    # fault node: the healthy voltage dividers applied to the source content.
    v_eq2 = v_src.neg * z_d / (z1_up + z_d)
    v_eq0 = v_src.zero * z_d0 / (z0_up + z_d0)

    # Series chain hanging off the fault node: negative network, zero network
    # and three times the fault resistance.
    v_1 = v_src.pos
    v_2 = v_eq2 + v_eq0
    z_2 = th.z_eq2 + th.z_eq0 + 3.0 * rf
    z_1d = parallel(z1_up, z_d)
    z_2d = parallel(z_2, z_d)
    i_1n = v_1 / z1_up
    i_2n = v_2 / z_2

    # Superposition: each source drives the relay branch and the fault chain.
    i_11 = v_1 / (z1_up + z_2d)
    i_12 = i_2n * z_2d / (z1_up + z_2d)
    i_21 = i_1n * z_1d / (z_2 + z_1d)
    i_22 = v_2 / (z_2 + z_1d)
    # The source's own unbalance also circulates through the load path; the
    # compact chain has no such term, but without it an unbalanced source
    # disagrees with the phase-domain solve once the fault current is small.
    i_circ2 = v_src.neg / (z1_up + z_d)
    i_circ0 = v_src.zero / (z0_up + z_d0)
    i_r1 = i_11 + i_12
    i_r2 = i_21 + i_22 + i_circ2
    i_r0 = i_21 + i_22 + i_circ0

    # Relay-node sequence voltages; the negative/zero drops enter with the
    # positive sign kept by this module's convention (see docstring).
    v_r1 = v_src.pos - z1_up * i_r1
    v_r2 = v_src.neg + z1_up * i_r2
    v_r0 = v_src.zero + z0_up * i_r0

    i_seq = SequenceTriple(zero=i_r0, pos=i_r1, neg=i_r2)
    v_seq = SequenceTriple(zero=v_r0, pos=v_r1, neg=v_r2)
    i_a = i_r0 + i_r1 + i_r2
    if abs(i_a) == 0:
        raise MeasurementError("line-ground element: no phase-a relay current")
    z_measured = (v_r0 + v_r1 + v_r2) / i_a

    inter = {
        "z_d": z_d,
        "z_d0": z_d0,
        "z_20": z_2,
        "z_20d": z_2d,
        "z_1": z1_up,
        "z_2": z_2,
        "z_1d": z_1d,
        "z_2d": z_2d,
        "i_sn": i_1n,
        "i_1n": i_1n,
        "i_2n": i_2n,
        "i_11": i_11,
        "i_21": i_21,
        "i_12": i_12,
        "i_22": i_22,
        "i_circ2": i_circ2,
        "i_circ0": i_circ0,
        "v_1": v_1,
        "v_2": v_2,
        "v_eq1": th.v_eq1,
        "v_eq2": v_eq2,
        "v_eq0": v_eq0,
        "z_eq1": th.z_eq1,
        "z_eq2": th.z_eq2,
        "z_eq0": th.z_eq0,
    }
    return _assemble(v_seq, i_seq, z_measured, inter)


def solve_lg_upstream_ideal(m: MicrogridModel) -> FaultSolution:
    """Line-ground fault, balanced stiff source, relay on the source side."""
    _require(isinstance(m.source, IdealSource), "solver expects an IdealSource model")
    _require(m.fault.kind is FaultKind.LINE_GROUND_A, "solver expects a line-ground fault")
    return _lg_upstream(m, m.source.sequence_voltages())


def solve_lg_upstream_inverter(m: MicrogridModel) -> FaultSolution:
    """Line-ground fault, current-limited inverter source, source-side relay."""
    _require(
        isinstance(m.source, CurrentLimitedInverter),
        "solver expects a CurrentLimitedInverter model",
    )
    _require(m.fault.kind is FaultKind.LINE_GROUND_A, "solver expects a line-ground fault")
    return _lg_upstream(m, m.source.sequence_voltages())


def solve_lg_downstream(m: MicrogridModel) -> FaultSolution:
    """Line-ground fault seen by the load-side relay (exact, any source).

    The load-side path is passive, so each sequence voltage at the relay is
    the path impedance times the path current and the compensated ground
    element reads exactly z_m2 + z_load regardless of source model or fault
    resistance.
    """
    _require(m.fault.kind is FaultKind.LINE_GROUND_A, "solver expects a line-ground fault")
    _finite_grounding(m)
    v_src = m.source.sequence_voltages()
    z_d1, z_d0 = downstream_path(m)
    z1_up = m.line_1m.z1
    z0_up = m.line_1m.z0
    th = thevenin_line_ground(m)
    v_eq2 = v_src.neg * z_d1 / (z1_up + z_d1)
    v_eq0 = v_src.zero * z_d0 / (z0_up + z_d0)

    # Series interconnection of the three sequence networks through 3*rf.
    i_f = (th.v_eq1 + v_eq2 + v_eq0) / (th.z_eq1 + th.z_eq2 + th.z_eq0 + 3.0 * m.fault.rf)
    v_m1 = th.v_eq1 - th.z_eq1 * i_f
    v_m2 = v_eq2 - th.z_eq2 * i_f
    v_m0 = v_eq0 - th.z_eq0 * i_f

    i_1 = v_m1 / z_d1
    i_2 = v_m2 / z_d1
    i_0 = v_m0 / z_d0
    k = z_d0 / z_d1 - 1.0
    i_a = i_0 + i_1 + i_2
    denom = i_a + k * i_0
    scale = max(abs(i_0), abs(i_1), abs(i_2))
    if scale == 0:
        raise MeasurementError("line-ground element: no current in the load path")
    if abs(denom) <= 1e-9 * scale:
        # Bolted fault at the relay point: numerator and compensated current
        # both vanish; the ratio's limit is the load-path impedance itself.
        z_measured = z_d1
    else:
        z_measured = (v_m0 + v_m1 + v_m2) / denom

    inter = {
        "z_d": z_d1,
        "z_d1": z_d1,
        "z_d0": z_d0,
        "k": k,
        "i_f": i_f,
        "v_m0": v_m0,
        "v_m1": v_m1,
        "v_m2": v_m2,
        "v_eq1": th.v_eq1,
        "v_eq2": v_eq2,
        "v_eq0": v_eq0,
        "z_eq1": th.z_eq1,
        "z_eq2": th.z_eq2,
        "z_eq0": th.z_eq0,
    }
    return _assemble(
        SequenceTriple(zero=v_m0, pos=v_m1, neg=v_m2),
        SequenceTriple(zero=i_0, pos=i_1, neg=i_2),
        z_measured,
        inter,
    )


def _ll_node_voltages(
    m: MicrogridModel, v_src: SequenceTriple
) -> tuple[SequenceTriple, dict[str, complex]]:
    """Fault-node sequence voltages for a b-c fault through rf.

    The positive- and negative-sequence networks exchange the fault current
    through rf; the zero-sequence network stays isolated from the fault and
    only carries the source's own zero-sequence circulation.
    """
    _finite_grounding(m)
    z1_up = m.line_1m.z1
    z0_up = m.line_1m.z0
    z_d, z_d0 = downstream_path(m)
    rf = m.fault.rf

    z_eq = parallel(z1_up, z_d)  # positive- and negative-sequence reduction alike
    v_eq1 = v_src.pos * z_d / (z1_up + z_d)
    v_eq2 = v_src.neg * z_d / (z1_up + z_d)

    z_2 = z_eq + rf  # negative-sequence network entered through the fault
    i_loop = (v_eq1 - v_eq2) / (z_eq + z_2)
    v_m1 = v_eq1 - z_eq * i_loop
    v_m2 = v_eq2 + z_eq * i_loop

    if v_src.zero == 0:
        i_0 = 0j
        v_m0 = 0j
    else:
        i_0 = v_src.zero / (z0_up + z_d0)
        v_m0 = v_src.zero - z0_up * i_0

    z_1d = z_eq
    z_2d = parallel(z_2, z_d)
    i_1n = v_src.pos / z1_up
    i_2n = v_eq2 / z_2 if z_2 != 0 else 0j
    inter = {
        "z_d": z_d,
        "z_d0": z_d0,
        "z_1": z1_up,
        "z_2": z_2,
        "z_1d": z_1d,
        "z_2d": z_2d,
        "i_1n": i_1n,
        "i_2n": i_2n,
        "i_11": v_src.pos / (z1_up + z_2d),
        "i_21": i_1n * z_1d / (z_1d + z_2),
        "i_22": v_eq2 / (z_2 + z_1d),
        "i_12": i_2n,
        "i_loop": i_loop,
        "i_0": i_0,
        "v_1": v_src.pos,
        "v_2": v_eq2,
        "v_eq1": v_eq1,
        "v_eq2": v_eq2,
        "z_eq1": z_eq,
        "z_eq2": z_eq,
    }
    return SequenceTriple(zero=v_m0, pos=v_m1, neg=v_m2), inter


def _ll_upstream(m: MicrogridModel, v_src: SequenceTriple) -> FaultSolution:
    v_m, inter = _ll_node_voltages(m, v_src)
    z1_up = m.line_1m.z1
    z0_up = m.line_1m.z0
    i_1 = (v_src.pos - v_m.pos) / z1_up
    i_2 = (v_src.neg - v_m.neg) / z1_up
    i_0 = (v_src.zero - v_m.zero) / z0_up if v_src.zero != 0 else 0j
    i_seq = SequenceTriple(zero=i_0, pos=i_1, neg=i_2)
    relay_i = sequence_to_phase(i_seq)
    relay_v = sequence_to_phase(v_m)
    z_measured = _zll_ratio(relay_v, relay_i, i_1)
    return FaultSolution(
        relay_v=relay_v,
        relay_i=relay_i,
        relay_seq_i=i_seq,
        z_measured=z_measured,
        intermediates=inter,
    )


def solve_ll_upstream_ideal(m: MicrogridModel) -> FaultSolution:
    """Line-line (b-c) fault, balanced stiff source, source-side relay."""
    _require(isinstance(m.source, IdealSource), "solver expects an IdealSource model")
    _require(m.fault.kind is FaultKind.LINE_LINE_BC, "solver expects a line-line fault")
    return _ll_upstream(m, m.source.sequence_voltages())


def solve_ll_upstream_inverter(m: MicrogridModel) -> FaultSolution:
    """Line-line (b-c) fault, current-limited inverter source, source-side relay."""
    _require(
        isinstance(m.source, CurrentLimitedInverter),
        "solver expects a CurrentLimitedInverter model",
    )
    _require(m.fault.kind is FaultKind.LINE_LINE_BC, "solver expects a line-line fault")
    return _ll_upstream(m, m.source.sequence_voltages())


def solve_ll_downstream(m: MicrogridModel) -> FaultSolution:
    """Line-line fault seen by the load-side relay (exact, any source).

    The b-c difference loop cancels the zero-sequence terms and the passive
    load path forces (v_b - v_c)/(i_b - i_c) = z_m2 + z_load whenever the
    fault actually draws current, which requires rf > 0.
    """
    _require(m.fault.kind is FaultKind.LINE_LINE_BC, "solver expects a line-line fault")
    _require(
        m.fault.rf > 0,
        "downstream line-line identity needs rf > 0 (bolted fault shorts the b-c loop)",
    )
    v_src = m.source.sequence_voltages()
    v_m, inter = _ll_node_voltages(m, v_src)
    z_d1, z_d0 = downstream_path(m)
    i_1 = v_m.pos / z_d1
    i_2 = v_m.neg / z_d1
    i_0 = v_m.zero / z_d0 if v_m.zero != 0 else 0j
    i_seq = SequenceTriple(zero=i_0, pos=i_1, neg=i_2)
    relay_i = sequence_to_phase(i_seq)
    relay_v = sequence_to_phase(v_m)
    z_measured = _zll_ratio(relay_v, relay_i, i_1)
    inter = dict(inter)
    inter["z_d1"] = z_d1
    return FaultSolution(
        relay_v=relay_v,
        relay_i=relay_i,
        relay_seq_i=i_seq,
        z_measured=z_measured,
        intermediates=inter,
    )
