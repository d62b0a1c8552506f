import json
from pathlib import Path

import pytest

from mating.circle import Angle, BinarySequence, RotationNumber
from mating.cli import COMMANDS, main
from mating.config import (RunConfig, emit_json, load_config, load_json, save_config,
                           to_jsonable)
from mating.errors import SchemaMismatch

FIXTURES = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parabolic_cycle_command(capsys):
    code, out, _ = run(capsys, "angles", "parabolic-cycle", "--nu", "3/5")
    assert code == 0 and out.split() == ["11/31", "13/31", "21/31", "22/31", "26/31"]


def test_double_returns_to_start(capsys):
    code, out, _ = run(capsys, "angles", "double", "--t", "11/31", "--steps", "5")
    orbit = out.split()
    assert code == 0 and orbit[0] == orbit[-1] == "11/31" and len(set(orbit)) == 5


def test_expansion_command(capsys):
    code, out, _ = run(capsys, "--json", "angles", "expansion", "--t", "22/31")
    data = load_json(out.encode(), kind="angles")
    assert code == 0 and data["period"] == "10110" and data["preperiod"] == ""


def test_golden_fixture_bytes(capsys):
    code, out, _ = run(capsys, "--json", "angles", "parabolic-cycle", "--nu", "3/5")
    assert code == 0
    assert out.encode() == (FIXTURES / "cycle_3_5.json").read_bytes()


def test_usage_errors_exit_1(capsys):
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "angles", "parabolic-cycle")[0] == 1          # --nu missing
    assert run(capsys, "cf", "--theta", "0.618")[0] == 1             # floats rejected
    assert run(capsys, "angles", "expansion", "--t", "1/0")[0] == 1
    code, _, err = run(capsys, "ray", "--t", "1/3")
    assert code == 1 and "--map" in err


def test_numerical_failure_exit_2(capsys):
    code, _, err = run(capsys, "inspect", "--map", "mating", "--theta", "golden", "--nu", "3/5",
                       "--budget", "1")
    assert code == 2 and "numerical failure" in err


def test_cf_command(capsys):
    code, out, _ = run(capsys, "--json", "cf", "--theta", "golden")
    data = load_json(out.encode(), kind="cf")
    assert code == 0 and data["bounded"] is True and data["partial_quotients"][:3] == [1, 1, 1]


def test_classes_command(capsys):
    code, out, _ = run(capsys, "--json", "classes", "--t", "20/31", "0", "w:01")
    rows = load_json(out.encode(), kind="classes")
    assert code == 0
    assert rows[0]["class"] == ["5/31", "9/31", "10/31", "18/31", "20/31"]
    assert rows[1]["kind"] == "BetaClass"
    assert rows[2]["kind"] == "SiegelBiaccess" and rows[2]["class"] == ["0.01w", "0.10w"]


def test_classes_verify(capsys):
    code, out, _ = run(capsys, "classes", "--random", "200", "--seed", "3", "--verify")
    assert code == 0 and "0 violations" in out


def test_itinerary_command(capsys):
    code, out, _ = run(capsys, "--json", "itinerary", "--point", "y0", "--nu", "3/5")
    data = load_json(out.encode(), kind="itinerary")
    assert [r["angle"] for r in data["itineraries"]] == ["11/31", "13/31", "21/31", "22/31", "26/31"]
    code, out, _ = run(capsys, "itinerary", "--side", "siegel", "--point", "crit:2:1")
    assert code == 0 and out.split() == ["0.01w", "0.10w"]


def test_ray_command(capsys):
    code, out, _ = run(capsys, "--json", "ray", "--map", "parabolic", "--nu", "3/5", "--t", "0")
    rows = load_json(out.encode(), kind="ray")
    assert code == 0 and rows[0]["converged"]
    assert abs(complex(*rows[0]["landing"]) - (1.8090169943749475 + 0.5877852522924731j)) < 1e-6


def test_inspect_and_petal_commands(capsys):
    code, out, _ = run(capsys, "--json", "inspect", "--map", "siegel", "--theta", "golden")
    data = load_json(out.encode(), kind="inspect")
    assert code == 0 and [f["kind"] for f in data["fixed_points"]] == ["Siegel", "repelling", "attracting"]
    assert data["fixed_points"][2]["location"] == "inf"
    code, out, _ = run(capsys, "--json", "petal", "--map", "parabolic", "--nu", "1/2")
    data = load_json(out.encode(), kind="petal")
    assert code == 0 and data["p"] == 2 and abs(complex(*data["a"]) + 2) < 1e-6
    assert all(r["residual"] < 1e-12 for r in data["attracting"] + data["repelling"])


def test_render_command(tmp_path, capsys):
    out = tmp_path / "fig.png"
    code, _, _ = run(capsys, "--threads", "2", "render", "--map", "mating", "--theta", "golden",
                     "--nu", "3/5", "--width", "64", "--height", "48", "--maxiter", "300",
                     "--out", str(out))
    assert code == 0 and out.exists()
    side = json.loads(Path(str(out) + ".json").read_text())
    assert side["image"]["map"] == {"kind": "mating", "theta": "golden", "nu": "3/5"}


def test_saved_config_reruns_identically(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    first = tmp_path / "a.png"
    code, _, _ = run(capsys, "--save-config", str(cfg), "render", "--map", "parabolic",
                     "--nu", "3/5", "--width", "80", "--height", "80", "--maxiter", "200",
                     "--rays", "11/31", "13/31", "--out", str(first))
    assert code == 0
    loaded = load_config(cfg)
    assert loaded.command == "render" and loaded.params["rays"] == ["11/31", "13/31"]
    again = first.read_bytes()
    first.unlink()
    code, _, _ = run(capsys, "--config", str(cfg))
    assert code == 0 and first.read_bytes() == again


def test_saved_config_for_text_commands(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    _, out1, _ = run(capsys, "--save-config", str(cfg), "classes", "--t", "5/62", "1/3")
    _, out2, _ = run(capsys, "--config", str(cfg))
    assert out1 == out2 and "ParabolicColand" in out1


def test_config_round_trip(tmp_path):
    for cfg in (RunConfig("angles", {"action": "double", "t": "11/31", "steps": 5}),
                RunConfig("render", {"map": "mating", "theta": "golden", "nu": "3/5",
                                     "rays": [], "out": "x.png", "width": 64})):
        path = save_config(cfg, tmp_path / "r.json")
        assert load_config(path) == cfg
    assert set(COMMANDS) == {"angles", "itinerary", "classes", "ray", "inspect", "petal",
                             "cf", "render"}


def test_emit_load_round_trip():
    values = [
        {"cycle": [Angle(11, 31), Angle(13, 31)], "nu": RotationNumber(3, 5)},
        [1, 2.5, None, True, "s"],
        {"z": 1.5 - 2j, "inf": complex("inf"), "seq": BinarySequence("1", "01")},
    ]
    for v in values:
        raw = emit_json(v, kind="t")
        back = load_json(raw, kind="t")
        assert back == to_jsonable(v)
        assert emit_json(back, kind="t") == raw


def test_schema_mismatch():
    raw = json.dumps({"version": 99, "kind": "t", "data": 1}).encode()
    with pytest.raises(SchemaMismatch):
        load_json(raw)
    with pytest.raises(SchemaMismatch):
        load_json(json.dumps({"kind": "t", "data": 1}).encode())
    with pytest.raises(SchemaMismatch):
        load_json(emit_json(1, kind="a"), kind="b")


def test_bad_config_version_exits_1(tmp_path, capsys):
    cfg = tmp_path / "old.json"
    cfg.write_text(json.dumps({"version": 0, "kind": "run-config", "data": {"command": "cf"}}))
    assert run(capsys, "--config", str(cfg))[0] == 1
