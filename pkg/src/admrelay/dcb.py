"""Directional comparison blocking: relay logic, carrier channel, simulator.

Two relays guard the line; a reverse-looking pickup keys a carrier that blocks
the remote relay, a forward pickup that survives the coordination delay
without a block trips.  The scheme stays dependable with a dead channel (no
block means trip) and secure for external faults (the block arrives inside
the coordination window).

Timing model (fixed scan step): block deliveries due at a scan instant are
applied before the relays are evaluated, so a block landing exactly at timer
expiry still suppresses the trip; carrier transitions computed during a scan
become visible on the channel at the end of that scan.  Net effect on the
classic race: a blocking signal wins if and only if its channel latency is
strictly below the coordination time.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import ModelError
from .network import MicrogridModel, RelayLocation
from .phasors import SequenceTriple, phase_to_sequence
from .relaying import DirectionalDecision, directional_neg_seq
from . import nodal

COORDINATION_TIME_DEFAULT_MS = 16.7  # one fundamental cycle
RELAY_A = "A"
RELAY_B = "B"


class EventKind(Enum):
    PICKUP_FWD = "PickupFwd"
    PICKUP_REV = "PickupRev"
    CARRIER_START = "CarrierStart"
    CARRIER_STOP = "CarrierStop"
    BLOCK_RECEIVED = "BlockReceived"
    TRIP = "Trip"


@dataclass(frozen=True)
class DcbEvent:
    time: float  # ms
    relay: str
    kind: EventKind


@dataclass(frozen=True)
class RelayState:
    forward_pickup: bool = False
    reverse_pickup: bool = False
    carrier_tx: bool = False
    coordination_timer: float = 0.0  # ms of continuous unblocked forward pickup
    tripped: bool = False


@dataclass(frozen=True)
class RelayInputs:
    fwd: bool
    rev: bool
    block_rx: bool


@dataclass(frozen=True)
class RelaySettings:
    coordination_time: float = COORDINATION_TIME_DEFAULT_MS  # ms

    def __post_init__(self) -> None:
        if not self.coordination_time > 0:
            raise ModelError("coordination time must be positive")


@dataclass(frozen=True)
class ChannelModel:
    """Blocking channel: fixed latency [ms], per-transition loss, seeded."""

    latency: float = 2.0
    operational: bool = True
    loss_probability: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.latency < 0:
            raise ModelError("channel latency must be >= 0")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ModelError("loss probability must lie in [0, 1]")


@dataclass(frozen=True)
class PickupChange:
    """Scripted directional pickup state taking effect at `time` [ms]."""

    time: float
    fwd: bool
    rev: bool


FaultScript = Mapping[str, Sequence[PickupChange]]


@dataclass(frozen=True)
class DcbScenario:
    relay_a: RelaySettings
    relay_b: RelaySettings
    channel: ChannelModel
    fault_script: FaultScript
    duration: float = 100.0  # ms
    step: float = 0.1  # ms

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ModelError("simulation step must be positive")
        if self.duration < self.step:
            raise ModelError("duration must cover at least one step")


def relay_step(
    state: RelayState, inputs: RelayInputs, dt: float, coordination_time: float
) -> tuple[RelayState, list[EventKind]]:
    """Advance one relay by one scan of dt ms and report emitted events.

    The timer accumulates while the forward pickup holds without a received
    block and resets otherwise; the trip latches once the accumulated time
    reaches the coordination time before this scan's increment.
    """
    if not dt > 0:
        raise ModelError("relay scan step must be positive")
    events: list[EventKind] = []
    if inputs.fwd and not state.forward_pickup:
        events.append(EventKind.PICKUP_FWD)
    if inputs.rev and not state.reverse_pickup:
        events.append(EventKind.PICKUP_REV)

    carrier = inputs.rev
    if carrier and not state.carrier_tx:
        events.append(EventKind.CARRIER_START)
    elif not carrier and state.carrier_tx:
        events.append(EventKind.CARRIER_STOP)

    counting = inputs.fwd and not inputs.block_rx
    # Tolerance absorbs float accumulation over many scans of dt.
    expired = state.coordination_timer >= coordination_time * (1.0 - 1e-9)
    trip_now = (not state.tripped) and counting and expired
    if trip_now:
        events.append(EventKind.TRIP)
    new_state = RelayState(
        forward_pickup=inputs.fwd,
        reverse_pickup=inputs.rev,
        carrier_tx=carrier,
        coordination_timer=state.coordination_timer + dt if counting else 0.0,
        tripped=state.tripped or trip_now,
    )
    return new_state, events


@dataclass(frozen=True)
class _Delivery:
    due: float
    target: str
    value: bool
    lost: bool


def simulate(scenario: DcbScenario) -> list[DcbEvent]:
    """Run the two-relay scheme on a fixed scan grid; fully deterministic.

    Channel loss is drawn once per carrier transition from the seeded stream;
    an inoperative channel delivers nothing.  The returned trace is ordered by
    (time, relay, kind name).
    """
    rng = random.Random(scenario.channel.seed)
    relays = (RELAY_A, RELAY_B)
    settings = {RELAY_A: scenario.relay_a, RELAY_B: scenario.relay_b}
    other = {RELAY_A: RELAY_B, RELAY_B: RELAY_A}
    states = {r: RelayState() for r in relays}
    block_rx = {r: False for r in relays}
    pickups = {r: (False, False) for r in relays}
    script = {
        r: sorted(scenario.fault_script.get(r, ()), key=lambda ch: ch.time) for r in relays
    }
    cursor = {r: 0 for r in relays}
    pending: list[_Delivery] = []
    events: list[DcbEvent] = []

    n_steps = int(round(scenario.duration / scenario.step))
    eps = scenario.step * 1e-9
    for i in range(n_steps + 1):
        t = i * scenario.step

        # Deliveries first: a block arriving at this instant beats the timer.
        due = [d for d in pending if d.due <= t + eps]
        pending = [d for d in pending if d.due > t + eps]
        for d in sorted(due, key=lambda d: (d.due, d.target)):
            if not scenario.channel.operational or d.lost:
                continue
            rising = d.value and not block_rx[d.target]
            block_rx[d.target] = d.value
            if rising:
                events.append(DcbEvent(time=t, relay=d.target, kind=EventKind.BLOCK_RECEIVED))

        for r in relays:
            seq = script[r]
            while cursor[r] < len(seq) and seq[cursor[r]].time <= t + eps:
                pickups[r] = (seq[cursor[r]].fwd, seq[cursor[r]].rev)
                cursor[r] += 1

        for r in relays:
            fwd, rev = pickups[r]
            prev_carrier = states[r].carrier_tx
            states[r], kinds = relay_step(
                states[r],
                RelayInputs(fwd=fwd, rev=rev, block_rx=block_rx[r]),
                scenario.step,
                settings[r].coordination_time,
            )
            for kind in kinds:
                events.append(DcbEvent(time=t, relay=r, kind=kind))
            if states[r].carrier_tx != prev_carrier:
                # Transition leaves at end of scan, lands `latency` later.
                pending.append(
                    _Delivery(
                        due=t + scenario.step + scenario.channel.latency,
                        target=other[r],
                        value=states[r].carrier_tx,
                        lost=rng.random() < scenario.channel.loss_probability,
                    )
                )

    events.sort(key=lambda e: (e.time, e.relay, e.kind.value))
    return events


def format_trace(events: Iterable[DcbEvent]) -> str:
    """Line-oriented trace: time_ms,relay,kind with LF endings."""
    lines = [f"{e.time:g},{e.relay},{e.kind.value}" for e in events]
    return "\n".join(lines) + ("\n" if lines else "")


def trip_summary(events: Iterable[DcbEvent]) -> dict[str, dict[str, bool]]:
    """Per-relay outcome: whether it tripped and whether it was ever blocked."""
    out = {r: {"tripped": False, "blocked": False} for r in (RELAY_A, RELAY_B)}
    for e in events:
        if e.kind is EventKind.TRIP:
            out[e.relay]["tripped"] = True
        elif e.kind is EventKind.BLOCK_RECEIVED:
            out[e.relay]["blocked"] = True
    return out


def couple_from_network(
    m: MicrogridModel,
    placements: tuple[RelayLocation, RelayLocation] = (
        RelayLocation.UPSTREAM_OF_FAULT,
        RelayLocation.DOWNSTREAM_OF_FAULT,
    ),
    fault_time: float = 10.0,
    line_angle: float | None = None,
) -> dict[str, list[PickupChange]]:
    """Derive the pickup script from a steady-state fault study.

    Both relays measure their own segment current in the source->load
    direction, matching the directional element's source-side-injector
    polarity.  Directional decisions at fault inception become the scripted
    pickups; an undecided element contributes no pickup at all.  On a radial
    feed with the injecting source at one end, a fault beyond the far relay
    still reads FORWARD at both ends (no remote infeed to reverse it), so
    genuine external-fault studies are scripted by hand.

    A model without a fault branch (infinite rf) is solved with the source
    balanced: the inverter only holds unbalanced voltage while its limiter
    is engaged on a fault, so the healthy study produces no pickups.
    """
    if line_angle is None:
        line_angle = math.atan2(m.line_1m.z1.imag, m.line_1m.z1.real)
    healthy = not math.isfinite(m.fault.rf)
    source_seq = SequenceTriple(0j, m.source.v1, 0j) if healthy else None
    script: dict[str, list[PickupChange]] = {}
    for relay_id, location in zip((RELAY_A, RELAY_B), placements):
        sol = nodal.solve_network(m, location, source_seq=source_seq)
        v2 = phase_to_sequence(sol.relay_v).neg
        i2 = sol.relay_seq_i.neg
        decision = directional_neg_seq(v2, i2, line_angle)
        fwd = decision is DirectionalDecision.FORWARD
        rev = decision is DirectionalDecision.REVERSE
        if fwd or rev:
            script[relay_id] = [PickupChange(time=fault_time, fwd=fwd, rev=rev)]
    return script
