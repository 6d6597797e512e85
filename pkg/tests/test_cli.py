import json
import shutil
import subprocess

import pytest

import wallachflow.cli as cli
from wallachflow.cli import EXIT_INPUT, EXIT_INTEGRATION, EXIT_OK, EXIT_VERIFY, main
from wallachflow.integrator import STEP_FLOOR
from wallachflow.serialize import read_trajectory_csv


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def payload(out):
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    return doc["payload"]


def test_classify_w(capsys):
    rc, out, _ = run(capsys, "classify", "--a", "1/8", "--w", "2,20")
    p = payload(out)
    assert rc == EXIT_OK
    assert p["signature"]["ricci"] == "Mixed" and p["signature"]["scalar"] == "Positive"
    assert p["residuals"]["rho"][0] == pytest.approx(-70.5)


def test_classify_x_normal(capsys):
    rc, out, _ = run(capsys, "classify", "--x", "1,1,1")
    s = payload(out)["signature"]
    assert s == {"sectional": "Boundary", "ricci": "Positive", "scalar": "Positive"}


def test_classify_kahler(capsys):
    rc, out, _ = run(capsys, "classify", "--a", "1/6", "--x", "1,1,2")
    p = payload(out)
    assert p["kahler"] is True and p["signature"]["ricci"] == "Positive"


def test_classify_non_wallach_has_no_sectional(capsys):
    _, out, _ = run(capsys, "classify", "--a", "0.3", "--w", "2,3")
    assert payload(out)["signature"]["sectional"] is None


@pytest.mark.parametrize(
    "argv",
    [
        ("classify", "--w", "2"),
        ("classify", "--w", "2,3", "--x", "1,1,1"),
        ("classify", "--w", "a,b"),
        ("classify", "--a", "0.7", "--w", "2,3"),
        ("classify", "--x", "1,-1,1"),
        ("integrate", "--start", "0,1"),
        ("integrate", "--system", "x3", "--start", "1,1"),
        ("sweep", "--region", "D", "--grid", "ten"),
        ("portrait", "--window", "1,1,1,2"),
    ],
)
def test_input_errors(capsys, argv):
    rc, _, err = run(capsys, *argv)
    assert rc == EXIT_INPUT and "invalid input" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["integrate", "--system", "q", "--start", "1,1"])
    assert exc.value.code == 2


def test_integrate_events(capsys):
    rc, out, _ = run(capsys, "integrate", "--start", "1.2,1.5", "--events", "D")
    p = payload(out)
    assert rc == EXIT_OK and [e["name"] for e in p["events"]] == ["s3"]
    assert p["events"][0]["direction"] == "+-"


def test_integrate_x3_volume(capsys):
    rc, out, _ = run(capsys, "integrate", "--system", "x3", "--start", "1.1,0.95,0.956937799", "--tmax", "20")
    p = payload(out)
    assert rc == EXIT_OK and p["max_volume_deviation"] <= 1e-8


def test_integrate_x2_events(capsys):
    rc, out, _ = run(capsys, "integrate", "--system", "x2", "--start", "1.05,0.98", "--events", "R", "--tmax", "5")
    assert rc == EXIT_OK and payload(out)["reason"]


def test_integrate_kahler_check(capsys):
    # 1/1.5 + 1/3 = 1: the start is on the Kahler curve
    rc, out, _ = run(capsys, "integrate", "--a", "1/6", "--start", "1.5,3", "--kahler-check", "--tmax", "5")
    assert rc == EXIT_OK and payload(out)["max_kahler_residual"] <= 1e-8


def test_integrate_csv(capsys):
    rc, out, _ = run(capsys, "integrate", "--start", "1.2,1.5", "--format", "csv", "--tmax", "0.5")
    header, rows = read_trajectory_csv(out)
    assert rc == EXIT_OK and header == ["t", "w1", "w2"] and rows[0].tolist() == [0.0, 1.2, 1.5]


def test_integrate_out_files(capsys, tmp_path):
    base = tmp_path / "run"
    rc, out, _ = run(capsys, "integrate", "--start", "1.2,1.5", "--events", "D", "--out", str(base))
    assert rc == EXIT_OK
    assert (tmp_path / "run.csv").read_text().startswith("t,w1,w2\n")
    ev = json.loads((tmp_path / "run.events.json").read_text())
    assert ev["payload"]["events"][0]["name"] == "s3"


def test_integrate_step_floor_exit_code(capsys, monkeypatch):
    real = cli.integrate_w

    def fake(*args, **kwargs):
        tr = real(*args, **kwargs)
        tr.reason = STEP_FLOOR
        return tr

    monkeypatch.setattr(cli, "integrate_w", fake)
    rc, _, err = run(capsys, "integrate", "--start", "1.2,1.5", "--tmax", "0.1")
    assert rc == EXIT_INTEGRATION and "step_floor" in err


def test_sweep(capsys):
    rc, out, _ = run(capsys, "sweep", "--region", "D", "--grid", "2x2", "--jobs", "1")
    s = payload(out)["summary"]
    assert rc == EXIT_OK and s["n_starts"] >= 3 and s["n_exited"] == s["n_starts"]


def test_sweep_constraint(capsys):
    rc, out, _ = run(capsys, "sweep", "--a", "1/6", "--region", "R", "--grid", "2x2", "--constraint", "below_kahler",
                     "--tmax", "30", "--jobs", "1")
    assert rc == EXIT_OK and payload(out)["summary"]["n_exited"] == 0


def test_equilibria(capsys):
    rc, out, _ = run(capsys, "equilibria", "--a", "1/8")
    p = payload(out)
    assert [e["classification"] for e in p["equilibria"]] == ["UnstableNode", "Saddle", "Saddle", "Saddle"]
    assert p["q_point"]["t_star"] == pytest.approx(0.36143771089446353, abs=1e-11)


def test_equilibria_degenerate(capsys):
    rc, out, _ = run(capsys, "equilibria", "--a", "0.25")
    p = payload(out)
    assert rc == EXIT_OK and p["equilibria"] == [] and any("degenerate" in w for w in p["warnings"])


def test_portrait_json_and_svg(capsys, tmp_path):
    svg = tmp_path / "p.svg"
    rc, out, _ = run(capsys, "portrait", "--density", "40", "--tmax", "2", "--svg", str(svg))
    assert rc == EXIT_OK and "curves" in payload(out)
    assert svg.read_text().startswith("<svg")
    rc, out, _ = run(capsys, "portrait", "--density", "40", "--tmax", "2", "--format", "svg", "--mode", "simplex")
    assert rc == EXIT_OK and out.startswith("<svg")


def test_output_is_deterministic(capsys):
    outs = [run(capsys, "integrate", "--start", "1.3,2.5", "--events", "R")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_config_defaults_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"a": "1/6", "tmax": 0.5}))
    _, out, _ = run(capsys, "integrate", "--config", str(cfg), "--start", "1.2,1.5")
    doc = json.loads(out)
    assert doc["space"]["a"] == pytest.approx(1 / 6) and doc["payload"]["t_final"] == pytest.approx(0.5)
    _, out, _ = run(capsys, "integrate", "--config", str(cfg), "--a", "1/9", "--start", "1.2,1.5")
    assert json.loads(out)["space"]["a"] == pytest.approx(1 / 9)


@pytest.mark.parametrize("content", ['{"nope": 1}', "not json", "[1, 2]"])
def test_bad_config(capsys, tmp_path, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    rc, _, _ = run(capsys, "classify", "--config", str(cfg), "--w", "2,3")
    assert rc == EXIT_INPUT


def test_verify_fast(capsys):
    rc, out, err = run(capsys, "verify", "--level", "fast")
    p = payload(out)
    assert [c["number"] for c in p["criteria"]] == [1, 2, 9, 10]
    assert len(err.strip().splitlines()) == 4
    # two of the reference Q-point pairs are off r1, so criterion 1 fails and the exit code says so
    assert [c["passed"] for c in p["criteria"]] == [False, True, True, True]
    assert rc == EXIT_VERIFY and not p["passed"]


@pytest.mark.skipif(shutil.which("wallachflow") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["wallachflow", "classify", "--w", "1,1"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["payload"]["signature"]["ricci"] == "Positive"
