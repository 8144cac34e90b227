import math

import pytest

from admrelay import cli
from admrelay.errors import ScenarioError
from admrelay.network import FaultKind
from admrelay.phasors import phasor
from admrelay.scenario import (
    build_model,
    default_scenario,
    parse_scenario,
    scenario_digest,
    scenario_to_text,
    sweep_points,
)

from support import close


def default_text():
    return scenario_to_text(default_scenario())


def test_parse_emit_round_trip_is_idempotent():
    text = default_text()
    once = scenario_to_text(parse_scenario(text))
    twice = scenario_to_text(parse_scenario(once))
    assert once == text
    assert twice == once


def test_digest_is_stable():
    d1 = scenario_digest(default_scenario())
    d2 = scenario_digest(parse_scenario(default_text()))
    assert d1 == d2
    assert len(d1) == 64


def test_default_scenario_carries_nameplate_ratings_verbatim():
    text = default_text()
    for token in (
        "frequency = 60 Hz",
        "line_line_voltage = 480 V",
        "rated_power = 50 kW",
        "dc_bus_voltage = 1800 V",
        "filter_inductance = 18 uF",
        "filter_capacitance = 250 nF",
        "i_max = 70 A",
        "cable_resistance = 39 mohm",
        "cable_inductance = 70.8 uH",
        "load_real_power = 25 kW",
        "load_reactive_power = 12.5 kvar",
        "kpv = 0.35",
        "krv = 400",
        "kvh5 = 4",
        "kvh7 = 20",
        "kvh11 = 11",
        "kpi = 0.7",
        "kri = 400",
        "kih5 = 30",
    ):
        assert token in text, token


def test_minimal_file_gets_documented_defaults():
    s = parse_scenario("[system]\nsource = ideal\n")
    assert s.si("system", "frequency") == 60.0
    assert s.si("system", "i_max") == 70.0
    assert str(s.get("fault", "kind")) == "lg"
    assert not s.has("dcb")  # optional sections stay absent
    assert not s.has("transient")


def test_unknown_section_key_and_unit_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("[sistem]\n")
    with pytest.raises(ScenarioError):
        parse_scenario("[system]\nmystery = 1\n")
    with pytest.raises(ScenarioError):
        parse_scenario("[system]\nfrequency = 60 kHz\n")
    with pytest.raises(ScenarioError):
        parse_scenario("[system]\nfrequency = sixty Hz\n")
    with pytest.raises(ScenarioError):
        parse_scenario("[system]\nfault_position = 1.5\n")
    with pytest.raises(ScenarioError):
        parse_scenario("[fault]\nrf_min = 10 ohm\nrf_max = 1 ohm\n")


def test_unit_scaling_applies():
    s = parse_scenario("[system]\ncable_resistance = 39 mohm\n")
    assert close(s.si("system", "cable_resistance"), 0.039, 1e-12)
    s = parse_scenario("[transient]\ndt = 1 ms\n")
    assert close(s.si("transient", "dt"), 1e-3, 1e-12)


def test_build_model_matches_reference_values():
    m = build_model(default_scenario())
    assert close(m.source.v1, phasor(480.0 / math.sqrt(3.0)), 1e-12)
    assert close(m.line_1m.z1 + m.line_m2.z1,
                 complex(0.039, 2 * math.pi * 60 * 70.8e-6), 1e-12)
    assert close(m.line_1m.z0, 3.0 * m.line_1m.z1, 1e-12)
    assert close(m.load.z_load, 7.3728 + 3.6864j, 1e-9)
    assert m.fault.kind is FaultKind.LINE_GROUND_A
    assert m.fault.rf == 3.68
    assert m.source.i_max_rms == 70.0


def test_sweep_points_default_and_degenerate():
    pts = sweep_points(default_scenario())
    assert len(pts) == 40
    assert close(pts[0], 3.68, 1e-12)
    assert close(pts[-1], 1000.0, 1e-12)
    ratios = [b / a for a, b in zip(pts, pts[1:])]
    assert all(abs(r - ratios[0]) < 1e-9 for r in ratios)

    s = parse_scenario("[fault]\nrf_min = 5 ohm\nrf_max = 5 ohm\n")
    assert sweep_points(s) == [5.0]

    s = parse_scenario("[fault]\nrf_min = 1 ohm\nrf_max = 3 ohm\nrf_points = 3\nrf_spacing = linear\n")
    assert sweep_points(s) == pytest.approx([1.0, 2.0, 3.0])


def _write_default(tmp_path, extra=""):
    path = tmp_path / "scenario.scn"
    path.write_text(default_text() + extra, encoding="utf-8")
    return str(path)


def test_explicit_k_policy_parses_and_reaches_the_case_output(tmp_path, capsys):
    text = default_text().replace("k_policy = auto", "k_policy = 0.5-0.2j")
    s = parse_scenario(text)
    assert s.get("relay", "k_policy") == 0.5 - 0.2j
    assert "k_policy = 0.5-0.2j" in scenario_to_text(s)
    path = tmp_path / "kexp.scn"
    path.write_text(text, encoding="utf-8")
    assert cli.main(["case", str(path), "--case", "2"]) == 0
    out = capsys.readouterr().out
    fields = dict(line.split(" = ", 1) for line in out.splitlines() if " = " in line)
    assert fields["k_policy"] == "explicit"
    assert close(complex(fields["k"]), 0.5 - 0.2j, 1e-12)


def test_nonzero_sequence_angles_rotate_the_source(tmp_path):
    text = default_text().replace("v2_angle = 0 deg", "v2_angle = 90 deg")
    m = build_model(parse_scenario(text))
    seq = m.source.sequence_voltages()
    assert close(seq.neg, 0.6j * m.source.v1, 1e-12)


def test_cli_validate_round_trips(tmp_path, capsys):
    path = _write_default(tmp_path)
    assert cli.main(["validate", path]) == 0
    out = capsys.readouterr().out
    assert out == default_text()


def test_cli_case_runs_and_reports_oracle_error(tmp_path, capsys):
    path = _write_default(tmp_path)
    assert cli.main(["case", path, "--case", "2"]) == 0
    out = capsys.readouterr().out
    fields = dict(
        line.split(" = ", 1) for line in out.splitlines() if " = " in line
    )
    assert float(fields["relative_error"]) <= 0.02
    assert fields["case"] == "2"
    assert "z_measured" in fields and "z_oracle" in fields
    assert any(k.startswith("int.") for k in fields)


def test_cli_case_3_reads_the_load_path(tmp_path, capsys):
    path = _write_default(tmp_path)
    assert cli.main(["case", path, "--case", "3"]) == 0
    out = capsys.readouterr().out
    fields = dict(line.split(" = ", 1) for line in out.splitlines() if " = " in line)
    assert fields["z_measured"] == fields["z_d1"]


def test_cli_case_source_mismatch_fails_validation(tmp_path, capsys):
    path = _write_default(tmp_path)  # default source is the inverter
    assert cli.main(["case", path, "--case", "1"]) == 1
    err = capsys.readouterr().err
    assert "validation error" in err


def test_cli_case_kind_mismatch_fails_validation(tmp_path, capsys):
    path = _write_default(tmp_path)
    assert cli.main(["case", path, "--case", "5"]) == 1


def test_cli_missing_file_fails(tmp_path, capsys):
    assert cli.main(["case", str(tmp_path / "nope.scn"), "--case", "2"]) == 1


def test_cli_bad_scenario_fails(tmp_path, capsys):
    path = tmp_path / "bad.scn"
    path.write_text("[system]\nfrequency = 60 kHz\n", encoding="utf-8")
    assert cli.main(["validate", str(path)]) == 1


def test_cli_singular_model_exits_with_numerical_status(tmp_path, capsys):
    path = tmp_path / "singular.scn"
    path.write_text(
        "[system]\ncable_resistance = 0 mohm\ncable_inductance = 0 uH\n",
        encoding="utf-8",
    )
    assert cli.main(["case", str(path), "--case", "2"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_cli_sweep_is_reproducible_and_monotone(tmp_path):
    path = _write_default(tmp_path)
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert cli.main(["sweep", path, "--out", str(out1)]) == 0
    assert cli.main(["sweep", path, "--out", str(out2)]) == 0
    b1 = out1.read_bytes()
    assert b1 == out2.read_bytes()
    lines = b1.decode().strip().split("\n")
    assert lines[0] == "rf_ohm,Re_Z,Im_Z,mag_Z,oracle_mag_Z,rel_err"
    rows = [l.split(",") for l in lines[1:] if not l.startswith("#")]
    assert len(rows) == 40
    mags = [float(r[3]) for r in rows]
    assert all(b > a for a, b in zip(mags, mags[1:]))
    assert all(float(r[5]) <= 0.02 for r in rows)


def test_cli_single_point_sweep_matches_case(tmp_path, capsys):
    text = default_text().replace("rf_min = 3.68 ohm", "rf_min = 3.68 ohm") \
        .replace("rf_max = 1000 ohm", "rf_max = 3.68 ohm")
    path = tmp_path / "single.scn"
    path.write_text(text, encoding="utf-8")
    assert cli.main(["sweep", str(path)]) == 0
    sweep_out = capsys.readouterr().out
    row = sweep_out.strip().split("\n")[1].split(",")
    assert cli.main(["case", str(path), "--case", "2"]) == 0
    case_out = capsys.readouterr().out
    fields = dict(line.split(" = ", 1) for line in case_out.splitlines() if " = " in line)
    z = complex(fields["z_measured"])
    assert close(complex(float(row[1]), float(row[2])), z, 1e-9)


def test_cli_dcb_trace_and_summary(tmp_path, capsys):
    path = _write_default(tmp_path)
    assert cli.main(["dcb", path]) == 0
    out = capsys.readouterr().out
    assert "PickupFwd" in out
    assert "# summary A: tripped=yes blocked=no" in out
    assert "# summary B: tripped=yes blocked=no" in out


def test_cli_dcb_external_script_blocks_the_forward_relay(tmp_path, capsys):
    text = default_text().replace("script = network", "script = external")
    path = tmp_path / "ext.scn"
    path.write_text(text, encoding="utf-8")
    assert cli.main(["dcb", str(path)]) == 0
    out = capsys.readouterr().out
    assert "# summary A: tripped=no blocked=yes" in out
    assert "# summary B: tripped=no blocked=no" in out
    assert "CarrierStart" in out


def test_cli_dcb_dead_channel_still_trips(tmp_path, capsys):
    text = default_text().replace("script = network", "script = internal")
    text = text.replace("operational = true", "operational = false")
    path = tmp_path / "dead.scn"
    path.write_text(text, encoding="utf-8")
    assert cli.main(["dcb", str(path)]) == 0
    out = capsys.readouterr().out
    assert "# summary A: tripped=yes blocked=no" in out
    assert "# summary B: tripped=yes blocked=no" in out


def test_cli_dcb_seed_override_is_deterministic(tmp_path):
    path = _write_default(tmp_path)
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    assert cli.main(["dcb", path, "--seed", "9", "--out", str(a)]) == 0
    assert cli.main(["dcb", path, "--seed", "9", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_dcb_requires_section(tmp_path, capsys):
    path = tmp_path / "nodcb.scn"
    path.write_text("[system]\nsource = inverter\n", encoding="utf-8")
    assert cli.main(["dcb", str(path)]) == 1


def test_cli_trajectory_output(tmp_path, capsys):
    path = _write_default(tmp_path)
    assert cli.main(["trajectory", path]) == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert lines[0] == "t_s,Re_Zlg_ohm,Im_Zlg_ohm,Re_Zll_ohm,Im_Zll_ohm,I_a_rms_A,limited"
    assert "# post_fault_first_quadrant_z_lg = yes" in out
    assert "# final_z_lg = " in out


def test_cli_trajectory_requires_section(tmp_path):
    path = tmp_path / "notrans.scn"
    path.write_text("[system]\nsource = inverter\n", encoding="utf-8")
    assert cli.main(["trajectory", str(path)]) == 1


def test_cli_results_carry_version_and_digest(tmp_path, capsys):
    path = _write_default(tmp_path)
    digest = scenario_digest(default_scenario())
    for argv in (["case", path, "--case", "2"], ["sweep", path],
                 ["dcb", path], ["trajectory", path]):
        assert cli.main(argv) == 0
        out = capsys.readouterr().out
        assert digest in out
        assert "0.1.0" in out
