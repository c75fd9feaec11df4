import csv
import json

import pytest

from pdeobs.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_heat_gramian(tmp_path, capsys):
    out = tmp_path / "heat.csv"
    man = tmp_path / "heat.json"
    assert main(["heat-gramian", "--n-max", "8", "--out-csv", str(out), "--out-manifest", str(man)]) == 0
    rows = read_csv(out)
    assert [int(r["n"]) for r in rows] == list(range(1, 9))
    assert float(rows[0]["sigma_min"]) == pytest.approx(0.121585, abs=1e-5)
    manifest = json.loads(man.read_text())
    assert manifest["status"] == "ok" and manifest["warnings"]
    assert manifest["config"]["L"] == pytest.approx(6.283185307179586)
    assert "sigma_min" in capsys.readouterr().out


def test_wave_ratio(tmp_path):
    out = tmp_path / "wave.csv"
    assert main(["wave-ratio", "--n", "10,20,40,80", "--out-csv", str(out)]) == 0
    ratios = [float(r["ratio"]) for r in read_csv(out)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_burgers_defaults_and_format(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["burgers-index", "--threads", "4", "--out-csv", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    header = raw.split(b"\n", 1)[0].decode()
    assert header == "n,sigma_min,epsilon,index"
    rows = read_csv(out)
    assert [int(r["n"]) for r in rows] == list(range(20, 77, 4))
    assert float(rows[0]["index"]) == float(repr(float(rows[0]["index"])))
    assert len(rows[0]["sigma_min"].replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 17


def test_timings_column(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["burgers-index", "--n-list", "20,24", "--timings", "--threads", "1",
                 "--out-csv", str(out)]) == 0
    assert "wall_time_s" in read_csv(out)[0]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# burgers run\nn_list = 20, 24, 28\nrho = 0.05\nthreads = 1\n")
    out = tmp_path / "b.csv"
    man = tmp_path / "b.json"
    assert main(["burgers-index", "--config", str(cfg), "--rho", "0.1",
                 "--out-csv", str(out), "--out-manifest", str(man)]) == 0
    manifest = json.loads(man.read_text())
    assert manifest["config"]["rho"] == 0.1
    assert manifest["config"]["n_list"] == [20, 24, 28]


def test_invalid_configuration_exit_one(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["burgers-index", "--config", str(cfg)]) == 1
    assert main(["burgers-index", "--method", "magic"]) == 1
    assert main(["burgers-index", "--n-list", "24,20"]) == 1
    assert main(["burgers-index", "--n-list", "21,25"]) == 1
    assert main(["heat-gramian", "--kappa", "0.1"]) == 1


def test_numerical_failure_exit_two(tmp_path):
    man = tmp_path / "m.json"
    code = main(["burgers-index", "--n-list", "20,24", "--nt-sensors", "2", "--dt", "0.5",
                 "--threads", "1", "--out-manifest", str(man)])
    assert code == 2
    manifest = json.loads(man.read_text())
    assert manifest["exit_code"] == 2 and manifest["errors"]


def test_manifest_round_trip(tmp_path):
    out1, man1, out2 = tmp_path / "a.csv", tmp_path / "a.json", tmp_path / "b.csv"
    assert main(["burgers-index", "--n-list", "20,24,28", "--kf", "1", "--threads", "2",
                 "--out-csv", str(out1), "--out-manifest", str(man1)]) == 0
    assert main(["burgers-index", "--config", str(man1), "--out-csv", str(out2),
                 "--out-manifest", str(tmp_path / "b.json")]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_wave_initial_mode_option(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["wave-ratio", "--n-list", "10,20", "--initial-mode", "1", "--out-csv", str(out)]) == 0
    assert [r["initial_mode"] for r in read_csv(out)] == ["1", "1"]
