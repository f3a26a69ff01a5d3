import csv
import io
import json

import pytest

from parabolic_screen.cli import COEF_COLUMNS, EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, main


def write_config(tmp_path, **over):
    cfg = {"ka": 100, "epsilon": 0.05, "m": 31, "absorption": 0.0,
           "theta_scan": {"min": 0.01, "max": 0.2, "count": 4, "spacing": "log"}}
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path


def read_csv(path):
    text = path.read_text()
    header = [ln for ln in text.splitlines() if ln.startswith("#")]
    body = "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
    return header, list(csv.DictReader(io.StringIO(body)))


def test_scan_writes_header_and_columns(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--config", str(write_config(tmp_path)), "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out)
    keys = [h.split(":")[0] for h in header]
    for k in ("# pipeline", "# config_hash", "# config", "# versions", "# warning"):
        assert k in keys
    assert "# pipeline: asymptotic" in header
    for c in COEF_COLUMNS:
        assert f"{c}_re" in rows[0] and f"{c}_im" in rows[0]
    assert {"theta_in", "n", "mode_index", "flux_defect", "regime_label"} <= set(rows[0])
    assert len({r["theta_in"] for r in rows}) == 4


def test_scan_is_deterministic_across_jobs(tmp_path):
    cfg = write_config(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["scan", "--config", str(cfg), "--out", str(a)]) == EXIT_OK
    assert main(["scan", "--config", str(cfg), "--out", str(b), "--jobs", "2"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_scan_svg(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--config", str(write_config(tmp_path)), "--out", str(out),
                 "--svg"]) == EXIT_OK
    svg = (tmp_path / "scan.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert "polyline" in svg or "path" in svg


def test_empty_grid_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, theta_scan={"min": 0.01, "max": 0.2, "count": 0})
    out = tmp_path / "scan.csv"
    assert main(["scan", "--config", str(cfg), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    assert "empty theta grid" in capsys.readouterr().err


def test_bad_config_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "ka": 100,\n  "epsilon": 2.0,\n  "m": 31\n}\n')
    assert main(["scan", "--config", str(path)]) == EXIT_CONFIG
    assert "line 3" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["scan", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG


def test_bad_jobs(tmp_path):
    assert main(["scan", "--config", str(write_config(tmp_path)), "--jobs", "0"]) == EXIT_CONFIG


def test_oracle_unbranched_is_trivial(tmp_path):
    cfg = write_config(tmp_path, epsilon=0.0, theta_scan=None, theta_in=0.045)
    data = json.loads(cfg.read_text())
    del data["theta_scan"]
    cfg.write_text(json.dumps(data))
    out = tmp_path / "oracle.csv"
    assert main(["oracle", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out)
    assert "# pipeline: simulator" in header
    assert any("too evanescent" in h for h in header)
    for r in rows:
        if int(r["n"]) < 0:
            assert r["T1_re"] == "nan"
            continue
        t2 = 1.0 if r["n"] == "0" else 0.0
        assert abs(float(r["T1_re"])) < 1e-12 and abs(float(r["R1_re"])) < 1e-12
        assert abs(complex(float(r["T2_re"]), float(r["T2_im"])) - t2) < 1e-12


def test_validate_filter(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["validate", "--filter", "polylog", "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert [c["id"] for c in report["criteria"]] == [6]
    assert report["all_passed"]
    assert "[PASS] C06" in capsys.readouterr().err


def test_validate_detects_wrong_branch(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["validate", "--filter", "C03", "--perturb-branch",
                 "--out", str(out)]) == EXIT_VALIDATION
    assert "[FAIL] C03" in capsys.readouterr().err
    assert json.loads(out.read_text())["perturbed_branch"] is True


@pytest.mark.parametrize("pattern", ["3", "c3", "C03", "closed-limit"])
def test_validate_id_patterns(pattern, tmp_path):
    out = tmp_path / "r.json"
    assert main(["validate", "--filter", pattern, "--out", str(out)]) == EXIT_OK
    assert [c["id"] for c in json.loads(out.read_text())["criteria"]] == [3]
