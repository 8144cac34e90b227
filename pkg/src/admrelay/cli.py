"""Command-line front end: scenario-driven case runs, sweeps, pilot-scheme
and trajectory simulations, all emitting flat greppable text.

Exit status: 0 on success, 1 on validation problems (bad scenario, case and
scenario disagreeing), 2 on numerical failure (singular system, limiter not
converging).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, dcb, nodal, trajectory
from .errors import ModelError, NumericalError
from .faults import (
    FaultSolution,
    solve_lg_downstream,
    solve_lg_upstream_ideal,
    solve_lg_upstream_inverter,
    solve_ll_downstream,
    solve_ll_upstream_ideal,
    solve_ll_upstream_inverter,
)
from .network import MicrogridModel, RelayLocation, downstream_path
from .relaying import measure_zlg, measure_zll, path_compensation
from .scenario import (
    Scenario,
    build_model,
    parse_scenario,
    relay_location,
    scenario_digest,
    scenario_to_text,
    sweep_points,
)

# case number -> (fault kind, required source or None, relay location, solver)
CASES: dict[int, tuple[str, str | None, RelayLocation, object]] = {
    1: ("lg", "ideal", RelayLocation.UPSTREAM_OF_FAULT, solve_lg_upstream_ideal),
    2: ("lg", "inverter", RelayLocation.UPSTREAM_OF_FAULT, solve_lg_upstream_inverter),
    3: ("lg", None, RelayLocation.DOWNSTREAM_OF_FAULT, solve_lg_downstream),
    4: ("ll", "ideal", RelayLocation.UPSTREAM_OF_FAULT, solve_ll_upstream_ideal),
    5: ("ll", "inverter", RelayLocation.UPSTREAM_OF_FAULT, solve_ll_upstream_inverter),
    6: ("ll", None, RelayLocation.DOWNSTREAM_OF_FAULT, solve_ll_downstream),
}


def fmt_complex(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}j"


def _policy_k(s: Scenario, m: MicrogridModel, location: RelayLocation) -> tuple[str, complex]:
    policy = s.get("relay", "k_policy")
    if isinstance(policy, complex):
        return "explicit", policy
    if policy == "auto":
        policy = (
            "downstream-path" if location is RelayLocation.DOWNSTREAM_OF_FAULT else "line"
        )
    if policy == "line":
        z1 = m.line_1m.z1 + m.line_m2.z1
        z0 = m.line_1m.z0 + m.line_m2.z0
        return "line", path_compensation(z0, z1)
    z_d1, z_d0 = downstream_path(m)
    return "downstream-path", path_compensation(z_d0, z_d1)


def _compensated(sol: FaultSolution, m: MicrogridModel, k: complex) -> complex:
    if m.fault.kind.value == "lg":
        return measure_zlg(sol.relay_v.a, sol.relay_i.a, sol.relay_seq_i.zero, k)
    return measure_zll(sol.relay_v.b, sol.relay_v.c, sol.relay_i.b, sol.relay_i.c)


def run_case(s: Scenario, case: int) -> str:
    if case not in CASES:
        raise ModelError(f"case must be one of {sorted(CASES)}")
    kind, source_req, location, solver = CASES[case]
    if str(s.get("fault", "kind")) != kind:
        raise ModelError(f"case {case} needs a {kind} fault, scenario has "
                         f"{s.get('fault', 'kind')}")
    source_kind = str(s.get("system", "source"))
    if source_req is not None and source_kind != source_req:
        raise ModelError(f"case {case} needs source = {source_req}, scenario has {source_kind}")

    m = build_model(s)
    sol: FaultSolution = solver(m)
    oracle = nodal.solve_network(m, location)
    rel_err = abs(sol.z_measured - oracle.z_measured) / abs(oracle.z_measured)
    policy_name, k = _policy_k(s, m, location)
    z_d1, _ = downstream_path(m)

    lines = [
        "# admrelay case result",
        f"version = {__version__}",
        f"scenario_digest = {scenario_digest(s)}",
        f"case = {case}",
        f"kind = {kind}",
        f"source = {source_kind}",
        f"relay_location = {location.value}",
        f"rf_ohm = {m.fault.rf:.12g}",
        f"z_measured = {fmt_complex(sol.z_measured)}",
        f"z_oracle = {fmt_complex(oracle.z_measured)}",
        f"relative_error = {rel_err:.6e}",
        f"k_policy = {policy_name}",
        f"k = {fmt_complex(k)}",
        f"z_compensated = {fmt_complex(_compensated(sol, m, k))}",
        f"z_d1 = {fmt_complex(z_d1)}",
    ]
    for key in sorted(sol.intermediates):
        lines.append(f"int.{key} = {fmt_complex(sol.intermediates[key])}")
    return "\n".join(lines) + "\n"


def _sweep_case(s: Scenario) -> tuple[RelayLocation, object]:
    kind = str(s.get("fault", "kind"))
    source = str(s.get("system", "source"))
    location = relay_location(s)
    for _, (ckind, csource, clocation, solver) in CASES.items():
        if ckind == kind and clocation is location and csource in (source, None):
            return location, solver
    raise ModelError(f"no analytic case for kind={kind} source={source} "
                     f"location={location.value}")


def run_sweep(s: Scenario) -> str:
    location, solver = _sweep_case(s)
    rows = ["rf_ohm,Re_Z,Im_Z,mag_Z,oracle_mag_Z,rel_err"]
    for rf in sweep_points(s):
        m = build_model(s, rf=rf)
        sol: FaultSolution = solver(m)
        oracle = nodal.solve_network(m, location)
        rel_err = abs(sol.z_measured - oracle.z_measured) / abs(oracle.z_measured)
        z = sol.z_measured
        rows.append(
            f"{rf:.10g},{z.real:.10g},{z.imag:.10g},{abs(z):.10g},"
            f"{abs(oracle.z_measured):.10g},{rel_err:.6e}"
        )
    rows.append(f"# version = {__version__}")
    rows.append(f"# scenario_digest = {scenario_digest(s)}")
    return "\n".join(rows) + "\n"


def run_dcb(s: Scenario, seed: int | None = None) -> str:
    if not s.has("dcb"):
        raise ModelError("scenario has no [dcb] section")
    m = build_model(s)
    script_kind = str(s.get("dcb", "script"))
    fault_time = s.si("dcb", "fault_time") * 1e3  # ms
    if script_kind == "network":
        script = dcb.couple_from_network(m, fault_time=fault_time)
    elif script_kind == "internal":
        script = {
            dcb.RELAY_A: [dcb.PickupChange(fault_time, True, False)],
            dcb.RELAY_B: [dcb.PickupChange(fault_time, True, False)],
        }
    else:  # external: fault beyond relay B
        script = {
            dcb.RELAY_A: [dcb.PickupChange(fault_time, True, False)],
            dcb.RELAY_B: [dcb.PickupChange(fault_time, False, True)],
        }
    settings = dcb.RelaySettings(coordination_time=s.si("dcb", "coordination_time") * 1e3)
    channel = dcb.ChannelModel(
        latency=s.si("dcb", "latency") * 1e3,
        operational=bool(s.get("dcb", "operational")),
        loss_probability=float(s.get("dcb", "loss")),  # type: ignore[arg-type]
        seed=int(s.get("dcb", "seed")) if seed is None else seed,  # type: ignore[arg-type]
    )
    scenario = dcb.DcbScenario(
        relay_a=settings,
        relay_b=settings,
        channel=channel,
        fault_script=script,
        duration=s.si("dcb", "duration") * 1e3,
        step=s.si("dcb", "step") * 1e3,
    )
    events = dcb.simulate(scenario)
    out = dcb.format_trace(events)
    summary = dcb.trip_summary(events)
    for relay in (dcb.RELAY_A, dcb.RELAY_B):
        flags = summary[relay]
        out += (f"# summary {relay}: tripped=" + ("yes" if flags["tripped"] else "no")
                + " blocked=" + ("yes" if flags["blocked"] else "no") + "\n")
    out += f"# version = {__version__}\n# scenario_digest = {scenario_digest(s)}\n"
    return out


def run_trajectory(s: Scenario) -> str:
    if not s.has("transient"):
        raise ModelError("scenario has no [transient] section")
    m = build_model(s)
    limiter_name = str(s.get("transient", "limiter"))
    limiter = None if limiter_name == "none" else trajectory.LimiterKind(limiter_name)
    fault_time = s.si("transient", "fault_time")
    points = trajectory.simulate_trajectory(
        m,
        fault_time=fault_time,
        duration=s.si("transient", "duration"),
        dt=s.si("transient", "dt"),
        limiter=limiter,
        relay_location=relay_location(s),
    )
    out = trajectory.format_trajectory(points)
    final = points[-1]
    post = [p for p in points if p.t >= fault_time]
    quad_lg = all(p.z_lg.real > 0 and p.z_lg.imag > 0 for p in post)
    quad_ll = all(p.z_ll.real > 0 and p.z_ll.imag > 0 for p in post)
    out += f"# final_z_lg = {fmt_complex(final.z_lg)}\n"
    out += f"# final_z_ll = {fmt_complex(final.z_ll)}\n"
    out += f"# post_fault_first_quadrant_z_lg = {'yes' if quad_lg else 'no'}\n"
    out += f"# post_fault_first_quadrant_z_ll = {'yes' if quad_ll else 'no'}\n"
    out += f"# version = {__version__}\n# scenario_digest = {scenario_digest(s)}\n"
    return out


def run_validate(s: Scenario) -> str:
    return scenario_to_text(s)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admrelay",
        description="Admittance-relaying study tool for a two-bus microgrid",
    )
    parser.add_argument("--version", action="version", version=f"admrelay {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("case", "run one analytic fault case with its oracle cross-check"),
        ("sweep", "sweep fault resistance and tabulate measured impedance"),
        ("dcb", "simulate the directional comparison blocking scheme"),
        ("trajectory", "run the quasi-static R-X trajectory simulation"),
        ("validate", "validate a scenario file and print its canonical form"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("scenario", help="scenario file path")
        p.add_argument("--out", help="write output here instead of stdout")
        if name == "case":
            p.add_argument("--case", type=int, required=True, help="case number 1..6")
        if name == "dcb":
            p.add_argument("--seed", type=int, help="override the channel seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.scenario, encoding="utf-8") as fh:
            scenario = parse_scenario(fh.read())
        if args.command == "case":
            out = run_case(scenario, args.case)
        elif args.command == "sweep":
            out = run_sweep(scenario)
        elif args.command == "dcb":
            out = run_dcb(scenario, seed=args.seed)
        elif args.command == "trajectory":
            out = run_trajectory(scenario)
        else:
            out = run_validate(scenario)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
