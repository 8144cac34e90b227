"""Independent phase-domain nodal solver for the two-bus microgrid.

Ground truth for the closed-form results in :mod:`admrelay.faults`: every
conductor is represented explicitly and the faulted three-phase system is
solved as one dense complex linear system with partial pivoting.  No
sequence-network reductions are used anywhere in this module beyond the
similarity transform that turns per-sequence element data into 3x3 phase
matrices.

Nodes are the three source-bus phases (known voltages), the three fault-node
phases, the three load-bus phases and, when the load neutral is not solidly
grounded, the neutral itself.  A bolted line-ground fault pins the faulted
phase node to ground; a bolted line-line fault merges the two faulted phase
nodes into one supernode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError
from .faults import FaultSolution
from .network import (
    FaultKind,
    MicrogridModel,
    RelayLocation,
    SequenceImpedancePair,
)
from .phasors import ALPHA, PhaseTriple, SequenceTriple, phase_to_sequence, sequence_to_phase

RESIDUAL_LIMIT = 1e-9

# Synthesis matrix: phases = FORTESCUE @ (zero, pos, neg).
FORTESCUE = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, ALPHA * ALPHA, ALPHA],
        [1.0, ALPHA, ALPHA * ALPHA],
    ],
    dtype=complex,
)


def sequence_to_phase_matrix(z: SequenceImpedancePair) -> np.ndarray:
    """3x3 phase-impedance image of a balanced series element.

    Diagonal entries are (z0 + 2*z1)/3, off-diagonal entries (z0 - z1)/3,
    which is the similarity transform of diag(z0, z1, z1).
    """
    diag = (z.z0 + 2.0 * z.z1) / 3.0
    off = (z.z0 - z.z1) / 3.0
    out = np.full((3, 3), off, dtype=complex)
    np.fill_diagonal(out, diag)
    return out


def _phase_admittance(z: SequenceImpedancePair) -> np.ndarray:
    """Phase-admittance block of a series element; an infinite zero-sequence
    impedance simply contributes zero zero-sequence admittance."""
    if z.z1 == 0 or z.z0 == 0:
        raise SingularSystemError(
            "series element with zero sequence impedance makes the nodal system singular"
        )
    y1 = 1.0 / z.z1
    z0 = complex(z.z0)
    y0 = 0j if not (math.isfinite(z0.real) and math.isfinite(z0.imag)) else 1.0 / z0
    diag = (y0 + 2.0 * y1) / 3.0
    off = (y0 - y1) / 3.0
    out = np.full((3, 3), off, dtype=complex)
    np.fill_diagonal(out, diag)
    return out


def _shunt_admittance(z: complex) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return 0j
    if z == 0:
        raise SingularSystemError("zero-impedance shunt must be handled structurally")
    return 1.0 / z


@dataclass
class NodalSystem:
    """Assembled three-phase nodal problem.

    node_names lists every non-ground node; ground is the implicit reference.
    known maps node name to a fixed voltage (source phases and, for a bolted
    line-ground fault, the faulted phase node).  y is the full admittance
    matrix over node_names and injections the (all-zero here) current vector;
    the solver partitions both around the known entries.
    """

    node_names: list[str]
    index: dict[str, int]
    y: np.ndarray
    known: dict[str, complex]

    def unknown_names(self) -> list[str]:
        return [n for n in self.node_names if n not in self.known]


def _source_phase_voltages(m: MicrogridModel, source_seq: SequenceTriple | None) -> PhaseTriple:
    seq = m.source.sequence_voltages() if source_seq is None else source_seq
    return sequence_to_phase(seq)


def build_system(
    m: MicrogridModel, source_seq: SequenceTriple | None = None
) -> NodalSystem:
    """Assemble the admittance matrix and known-voltage set for one model.

    source_seq overrides the source's own sequence voltages (used by the
    trajectory simulator while the current limiter rescales the source).
    """
    rf = m.fault.rf
    faulted = math.isfinite(rf)
    lg = m.fault.kind is FaultKind.LINE_GROUND_A
    ll = m.fault.kind is FaultKind.LINE_LINE_BC
    merge_bc = ll and faulted and rf == 0.0
    pin_a = lg and faulted and rf == 0.0
    solid_neutral = complex(m.load.z_ground) == 0

    node_names = ["1a", "1b", "1c", "Ma", "Mb", "Mc", "2a", "2b", "2c"]
    alias = {n: n for n in node_names}
    if merge_bc:
        node_names.remove("Mc")
        alias["Mc"] = "Mb"
    if not solid_neutral:
        node_names.append("n")
        alias["n"] = "n"
    index = {name: i for i, name in enumerate(node_names)}

    def idx(name: str) -> int:
        return index[alias[name]]

    n = len(node_names)
    y = np.zeros((n, n), dtype=complex)

    def stamp_series_block(block: np.ndarray, from_nodes: list[str], to_nodes: list[str]) -> None:
        fi = [idx(p) for p in from_nodes]
        ti = [idx(p) for p in to_nodes]
        for r in range(3):
            for c in range(3):
                v = block[r, c]
                y[fi[r], fi[c]] += v
                y[ti[r], ti[c]] += v
                y[fi[r], ti[c]] -= v
                y[ti[r], fi[c]] -= v

    def stamp_shunt(node: str, adm: complex) -> None:
        y[idx(node), idx(node)] += adm

    def stamp_branch(a: str, b: str, adm: complex) -> None:
        ia, ib = idx(a), idx(b)
        y[ia, ia] += adm
        y[ib, ib] += adm
        y[ia, ib] -= adm
        y[ib, ia] -= adm

    stamp_series_block(_phase_admittance(m.line_1m), ["1a", "1b", "1c"], ["Ma", "Mb", "Mc"])
    stamp_series_block(_phase_admittance(m.line_m2), ["Ma", "Mb", "Mc"], ["2a", "2b", "2c"])

    y_load = 1.0 / m.load.z_load
    for ph in ("a", "b", "c"):
        if solid_neutral:
            stamp_shunt(f"2{ph}", y_load)
        else:
            stamp_branch(f"2{ph}", "n", y_load)
    if not solid_neutral:
        stamp_shunt("n", _shunt_admittance(m.load.z_ground))

    if faulted and not pin_a and not merge_bc:
        if lg:
            stamp_shunt("Ma", 1.0 / rf)
        elif ll:
            stamp_branch("Mb", "Mc", 1.0 / rf)

    v_src = _source_phase_voltages(m, source_seq)
    known: dict[str, complex] = {"1a": v_src.a, "1b": v_src.b, "1c": v_src.c}
    if pin_a:
        known["Ma"] = 0j

    return NodalSystem(node_names=node_names, index=index, y=y, known=known)


def _solve_node_voltages(sys: NodalSystem) -> dict[str, complex]:
    unknown = sys.unknown_names()
    u_idx = [sys.index[n] for n in unknown]
    k_names = list(sys.known)
    k_idx = [sys.index[n] for n in k_names]
    v_known = np.array([sys.known[n] for n in k_names], dtype=complex)

    a_uu = sys.y[np.ix_(u_idx, u_idx)]
    a_uk = sys.y[np.ix_(u_idx, k_idx)]
    b = -a_uk @ v_known
    try:
        x = np.linalg.solve(a_uu, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"nodal matrix is singular: {exc}") from exc
    scale = np.linalg.norm(b)
    residual = np.linalg.norm(a_uu @ x - b) / (scale if scale > 0 else 1.0)
    if not residual < RESIDUAL_LIMIT:
        raise SingularSystemError(f"nodal solve residual {residual:.3e} exceeds {RESIDUAL_LIMIT}")

    voltages = dict(sys.known)
    voltages.update({name: complex(val) for name, val in zip(unknown, x)})
    voltages["residual"] = complex(residual, 0.0)
    return voltages


def solve_network(
    m: MicrogridModel,
    relay_location: RelayLocation,
    source_seq: SequenceTriple | None = None,
) -> FaultSolution:
    """Solve the full three-phase network and extract relay quantities.

    The relay voltage is the fault-node voltage; the relay current is the
    source-side segment current (source bus -> fault node) for an upstream
    relay and the load-side segment current (fault node -> load bus) for a
    downstream one.  The intermediates map carries the fault-branch currents
    (i_f_a, i_f_b, i_f_c) and the solve residual.
    """
    sysm = build_system(m, source_seq)
    voltages = _solve_node_voltages(sysm)
    merge_bc = "Mc" not in sysm.index

    mc_name = "Mb" if merge_bc else "Mc"
    v_1 = PhaseTriple(voltages["1a"], voltages["1b"], voltages["1c"])
    v_m = PhaseTriple(voltages["Ma"], voltages["Mb"], voltages[mc_name])
    v_2 = PhaseTriple(voltages["2a"], voltages["2b"], voltages["2c"])

    y_1m = _phase_admittance(m.line_1m)
    y_m2 = _phase_admittance(m.line_m2)
    d1 = np.array([v_1.a - v_m.a, v_1.b - v_m.b, v_1.c - v_m.c], dtype=complex)
    d2 = np.array([v_m.a - v_2.a, v_m.b - v_2.b, v_m.c - v_2.c], dtype=complex)
    i_up = y_1m @ d1
    i_dn = y_m2 @ d2

    if relay_location is RelayLocation.UPSTREAM_OF_FAULT:
        relay_i = PhaseTriple(*(complex(v) for v in i_up))
    elif relay_location is RelayLocation.DOWNSTREAM_OF_FAULT:
        relay_i = PhaseTriple(*(complex(v) for v in i_dn))
    else:
        raise ValueError(f"unknown relay location {relay_location!r}")

    rf = m.fault.rf
    faulted = math.isfinite(rf)
    i_f_a = i_f_b = i_f_c = 0j
    if faulted and m.fault.kind is FaultKind.LINE_GROUND_A:
        if rf > 0:
            i_f_a = v_m.a / rf
        else:
            i_f_a = complex(i_up[0] - i_dn[0])
    elif faulted and m.fault.kind is FaultKind.LINE_LINE_BC:
        if rf > 0:
            i_f_b = (v_m.b - v_m.c) / rf
        else:
            i_f_b = complex(i_up[1] - i_dn[1])
        i_f_c = -i_f_b

    relay_seq_i = phase_to_sequence(relay_i)
    if m.fault.kind is FaultKind.LINE_GROUND_A:
        z_measured = v_m.a / relay_i.a
    else:
        z_measured = (v_m.b - v_m.c) / (relay_i.b - relay_i.c)

    inter = {
        "i_f_a": i_f_a,
        "i_f_b": i_f_b,
        "i_f_c": i_f_c,
        "residual": voltages["residual"],
        "v_src_a": v_1.a,
        "v_load_a": v_2.a,
    }
    return FaultSolution(
        relay_v=v_m,
        relay_i=relay_i,
        relay_seq_i=relay_seq_i,
        z_measured=z_measured,
        intermediates=inter,
    )
