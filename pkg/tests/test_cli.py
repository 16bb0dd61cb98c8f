import csv
import json
import subprocess
import sys

import pytest

from shockselect import cli
from shockselect.errors import InstabilityError


def read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def test_analyze_defaults(tmp_path, capsys):
    code, out = run(tmp_path, "analyze")
    assert code == 0
    rows = read(out / "shocks.csv")
    assert [r["rule"] for r in rows] == ["lower-knee", "equal-area", "continuous-D", "upper-knee"]
    lengths = {r["rule"]: float(r["length"]) for r in rows}
    assert max(lengths, key=lengths.get) == "continuous-D"
    assert len(read(out / "length_table.csv")) == 1001
    ext = read(out / "extrema.csv")
    assert len(ext) == 1 and ext[0]["kind"] == "maximum" and ext[0]["global_max"] == "true"
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["command"] == "analyze" and meta["config"]["model.delta"] == "0.5"
    assert "shockselect" in meta["versions"]
    assert "continuous-D" in capsys.readouterr().out


def test_analyze_symmetric(tmp_path):
    code, out = run(tmp_path, "analyze", "--set", "model.delta=0")
    rows = {r["rule"]: r for r in read(out / "shocks.csv")}
    for key in ("u_left", "u_right"):
        assert abs(float(rows["equal-area"][key]) - float(rows["continuous-D"][key])) <= 1e-8


def test_seventeen_digits(tmp_path):
    code, out = run(tmp_path, "analyze")
    text = (out / "shocks.csv").read_text()
    assert "0.080333840654540342" in text


def test_missing_config(tmp_path):
    assert cli.main(["analyze", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_inadmissible_model(tmp_path):
    code, _ = run(tmp_path, "analyze", "--set", "model.delta=3")
    assert code == 2


@pytest.mark.parametrize("args", [["--set", "bogus.key=1"], ["--set", "model.a=abc"],
                                  ["--set", "noequals"], ["--workers", "0"]])
def test_usage_errors(tmp_path, args):
    code, _ = run(tmp_path, "analyze", *args)
    assert code == 1


def test_bad_verb():
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 1


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# symmetric case\nmodel.delta = 0   # inline comment\n\nmodel.a=0.2\n")
    code, out = run(tmp_path, "analyze", "--config", str(cfg))
    assert code == 0
    assert json.loads((out / "metadata.json").read_text())["config"]["model.delta"] == "0"


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model.epsilon=0.1\n")
    code, _ = run(tmp_path, "analyze", "--config", str(cfg))
    assert code == 1


def test_metadata_round_trip(tmp_path):
    code, first = run(tmp_path, "analyze", "--set", "model.delta=-0.3", "--set", "model.b=0.45",
                      name="first")
    code2, second = run(tmp_path, "analyze", "--config", str(first / "metadata.json"),
                        name="second")
    assert code == code2 == 0
    assert (first / "shocks.csv").read_bytes() == (second / "shocks.csv").read_bytes()


def test_env_overrides_out(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(cli.ENV_OUT, str(target))
    code, flagged = run(tmp_path, "analyze")
    assert code == 0 and (target / "shocks.csv").exists() and not flagged.exists()


def test_solve_a(tmp_path):
    code, out = run(tmp_path, "solve-a")
    row = read(out / "weight.csv")[0]
    assert abs(abs(float(row["A"])) - 3.0757) <= 1e-3
    assert abs(float(row["closed_form_residual"])) <= 1e-8
    code, out = run(tmp_path, "solve-a", "--set", "reg.family=quadratic", name="q")
    assert abs(float(read(out / "weight.csv")[0]["A"]) - 10.6453) <= 1e-3


def test_solve_a_constant_family(tmp_path):
    code, _ = run(tmp_path, "solve-a", "--set", "reg.family=constant")
    assert code == 1


def test_solve_a_no_bracket(tmp_path):
    code, _ = run(tmp_path, "solve-a", "--set", "reg.family=quadratic", "--set", "model.delta=-0.5")
    assert code == 3


def test_wave_speed(tmp_path):
    code, out = run(tmp_path, "wave-speed", "--gnuplot-script")
    row = read(out / "speed.csv")[0]
    assert row["mode"] == "solve" and abs(float(row["c"]) - 0.0232) <= 5e-4
    assert abs(float(row["weak_residual"])) <= 1e-8
    assert len(read(out / "scan.csv")) >= 2
    traj = read(out / "unstable_manifold.csv")
    assert list(traj[0]) == ["psi", "u", "p"] and len(traj) > 10
    assert (out / "phase_plane.gp").exists()


def test_wave_speed_equal_area(tmp_path):
    code, out = run(tmp_path, "wave-speed", "--set", "shock.rule=equal-area")
    assert abs(float(read(out / "speed.csv")[0]["c"]) - 0.026) <= 1e-3


def test_wave_speed_diagnostic(tmp_path):
    code, out = run(tmp_path, "wave-speed", "--set", "wave.c=0.013")
    row = read(out / "speed.csv")[0]
    assert row["mode"] == "diagnostic" and float(row["delta_p"]) != 0.0
    assert read(out / "scan.csv") == []


def test_wave_speed_no_sign_change(tmp_path):
    code, _ = run(tmp_path, "wave-speed", "--set", "wave.c_min=0.05")
    assert code == 3


def test_wave_speed_zero_reaction(tmp_path):
    code, _ = run(tmp_path, "wave-speed", "--set", "reaction.family=zero")
    assert code == 2


def test_simulate_desk(tmp_path):
    code, out = run(tmp_path, "simulate", "--set", "sim.dx=0.01", "--set", "sim.T=10",
                    "--set", "sim.eps=0.02")
    assert code == 0
    snaps = sorted((out / "snapshots").iterdir())
    assert len(snaps) == 6
    assert list(read(snaps[0])[0]) == ["x", "u"] and len(read(snaps[0])) == 1001
    trace = read(out / "trace.csv")
    assert [float(r["t"]) for r in trace] == [0, 2, 4, 6, 8, 10]
    assert abs(float(trace[-1]["u_left"]) - 0.0803338) <= 0.05
    assert "Phi_xxxx" in (out / "discretisation_error.txt").read_text()


def test_simulate_instability(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise InstabilityError("non-finite right-hand side", time=1.5)
    monkeypatch.setattr(cli, "integrate", boom)
    code, _ = run(tmp_path, "simulate", "--set", "sim.dx=0.1")
    assert code == 4


def test_simulate_bad_grid(tmp_path):
    code, _ = run(tmp_path, "simulate", "--set", "sim.dx=0.003")
    assert code == 1


def test_sweep_solve_a(tmp_path):
    code, out = run(tmp_path, "sweep", "--set", "sweep.command=solve-a",
                    "--set", "sweep.start=-0.5", "--set", "sweep.stop=0.5", "--set", "sweep.step=0.1")
    rows = read(out / "sweep.csv")
    assert code == 0 and len(rows) == 11
    mid = [r for r in rows if float(r["model.delta"]) == 0.0][0]
    assert float(mid["A"]) == 0.0


def test_sweep_analyze_curves_cross(tmp_path):
    code, out = run(tmp_path, "sweep", "--set", "sweep.start=-0.5", "--set", "sweep.stop=0.5",
                    "--set", "sweep.step=0.05", "--workers", "2")
    rows = read(out / "sweep.csv")
    assert len(rows) == 21
    gap = [float(r["cd_u_right"]) - float(r["ea_u_right"]) for r in rows]
    assert all(g < 0 for g in gap[:10]) and all(g > 0 for g in gap[11:])
    assert abs(gap[10]) <= 1e-8


def test_sweep_deterministic(tmp_path):
    args = ["sweep", "--set", "sweep.start=0.1", "--set", "sweep.stop=0.5", "--set", "sweep.step=0.2"]
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, "--workers", "3", name="b")
    _, c = run(tmp_path, *args, name="c")
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes() == \
        (c / "sweep.csv").read_bytes()


def test_sweep_empty_range(tmp_path):
    code, _ = run(tmp_path, "sweep", "--set", "sweep.start=1", "--set", "sweep.stop=0",
                  "--set", "sweep.step=0.1")
    assert code == 1


def test_sweep_records_failures(tmp_path):
    code, out = run(tmp_path, "sweep", "--set", "sweep.start=0.5", "--set", "sweep.stop=3.5",
                    "--set", "sweep.step=3")
    rows = read(out / "sweep.csv")
    assert code == 0 and [r["status"] for r in rows] == ["ok", "error"]
    assert "InadmissibleModelError" in rows[1]["message"]
    code, out = run(tmp_path, "sweep", "--set", "sweep.start=3", "--set", "sweep.stop=4",
                    "--set", "sweep.step=1", name="allbad")
    assert code == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "shockselect", "analyze", "--out",
                           str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0 and "equal-area" in proc.stdout
