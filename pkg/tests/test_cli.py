import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

import ttfa
from ttfa import heisenberg as H
from ttfa.cli import main
from ttfa.grid import BoxGrid, load_phase_field

DATA = Path(ttfa.__file__).parent / "data"


@pytest.fixture
def run(monkeypatch):
    def _run(*args, env=None):
        return CliRunner().invoke(main, [str(a) for a in args], env=env)

    return _run


def _strip(doc):
    doc = dict(doc)
    doc.pop("timestamp")
    return doc


def test_verify_constants_passes(run, tmp_path):
    r = run("verify", "constants", "--out", tmp_path)
    assert r.exit_code == 0, r.output
    doc = json.loads((tmp_path / "report-constants.json").read_text())
    assert doc["n_checks"] == doc["n_pass"] >= 10
    for rec in doc["records"]:
        assert {"id", "paper_ref", "lhs", "rhs", "ratio", "tol", "pass"} <= set(rec)
        assert rec["paper_ref"]
    lines = (tmp_path / "summary-constants.csv").read_text().splitlines()
    assert lines[0].startswith("id,paper_ref") and len(lines) == doc["n_checks"] + 1


def test_report_is_deterministic(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("verify", "constants", "--out", a).exit_code == 0
    assert run("verify", "constants", "--out", b, env={"TTFA_THREADS": "3"}).exit_code == 0
    da = json.loads((a / "report-constants.json").read_text())
    db = json.loads((b / "report-constants.json").read_text())
    da["config"].pop("out_dir")
    db["config"].pop("out_dir")
    assert _strip(da) == _strip(db)
    assert (a / "summary-constants.csv").read_bytes() == (b / "summary-constants.csv").read_bytes()


def test_flags_override_config(run, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lambda_list": [0.5, 2.0], "pq_list": [[1, 1]]}))
    r = run("verify", "constants", "--config", cfg, "--lambda", "1.5", "--out", tmp_path / "o")
    assert r.exit_code == 0, r.output
    doc = json.loads((tmp_path / "o" / "report-constants.json").read_text())
    assert doc["config"]["lambda_list"] == [1.5]
    assert doc["config"]["pq_list"] == [[1.0, 1.0]]


@pytest.mark.parametrize(
    "cfg, field",
    [
        ({"base_points": -48}, "base_points"),
        ({"t_points": 48}, "t_points"),
        ({"lambda_list": [0.0]}, "lambda_list"),
        ({"tolerances": {"d_n": -1}}, "tolerances.d_n"),
        ({"pq_list": [[0.5, 2]]}, "pq_list"),
        ({"grid": 3}, "grid"),
    ],
)
def test_config_errors_name_the_field(run, tmp_path, cfg, field):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    r = run("verify", "constants", "--config", p, "--out", tmp_path)
    assert r.exit_code == 2
    assert field in r.output


def test_unknown_suite(run, tmp_path):
    r = run("verify", "everything", "--out", tmp_path)
    assert r.exit_code == 2 and "suite" in r.output


def test_bad_pq_flag(run, tmp_path):
    assert run("verify", "constants", "--pq", "1;2", "--out", tmp_path).exit_code == 2


def test_bad_threads(run, tmp_path):
    r = run("verify", "constants", "--out", tmp_path, env={"TTFA_THREADS": "many"})
    assert r.exit_code == 2 and "TTFA_THREADS" in r.output


def test_missing_config_is_io_error(run, tmp_path):
    assert run("verify", "constants", "--config", tmp_path / "nope.json", "--out", tmp_path).exit_code == 3


def test_unwritable_output_is_io_error(run, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("verify", "constants", "--out", blocker / "sub").exit_code == 3


def test_check_failure_exit_code(run, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"tolerances": {"k_mass": 1e-300}}))
    r = run("verify", "constants", "--config", p, "--out", tmp_path / "o")
    assert r.exit_code == 1
    doc = json.loads((tmp_path / "o" / "report-constants.json").read_text())
    assert doc["n_pass"] < doc["n_checks"]


# ---------------------------------------------------------------- transform


def test_identity_roundtrip_bit_exact(run, tmp_path):
    out = tmp_path / "f.json"
    assert run("transform", "identity", "--in", DATA / "golden_gaussian.json", "--out", out).exit_code == 0
    assert (tmp_path / "f.json.bin").read_bytes() == (DATA / "golden_gaussian.json.bin").read_bytes()


def test_twisted_stft_matches_golden(run, tmp_path):
    out = tmp_path / "v.json"
    r = run("transform", "twisted_stft", "--in", DATA / "golden_gaussian.json", "--out", out, "--lambda", 1, "--half-width", 4)
    assert r.exit_code == 0, r.output
    V, meta = load_phase_field(out)
    G, gmeta = load_phase_field(DATA / "golden_stft.json")
    assert V.xi_grid == G.xi_grid
    assert np.abs(V.values - G.values).max() < 1e-9
    assert gmeta["route"] == "direct" and meta["lambda"] == 1.0


def test_norms_match_golden(run):
    golden = json.loads((DATA / "golden_norms.json").read_text())
    args = ["transform", "norms", "--in", DATA / "golden_gaussian.json", "--lambda", 1, "--half-width", 4]
    for s in golden["norms"]:
        args += ["--pq", s]
    r = run(*args)
    assert r.exit_code == 0, r.output
    got = json.loads(r.output)["norms"]
    for s, v in golden["norms"].items():
        assert got[s] == pytest.approx(v, rel=1e-6)


def test_norms_of_phase_field(run):
    r = run("transform", "norms", "--in", DATA / "golden_stft.json", "--pq", "2,2")
    golden = json.loads((DATA / "golden_norms.json").read_text())
    assert json.loads(r.output)["norms"]["2,2"] == pytest.approx(golden["norms"]["2,2"], rel=1e-12)


def test_bargmann_transform_writes_phase_field(run, tmp_path):
    out = tmp_path / "b.json"
    r = run("transform", "bargmann", "--in", DATA / "golden_gaussian.json", "--out", out, "--lambda", 1, "--half-width", 4)
    assert r.exit_code == 0, r.output
    F, meta = load_phase_field(out)
    assert meta["op"] == "bargmann"
    assert np.isfinite(F.values).sum() > 0.5 * F.values.size


def test_v_transform_and_stack_norms(run, tmp_path):
    base = BoxGrid(32, 8.0, dim=2)
    tg = BoxGrid(4, 8.0)
    f = H.HeisenbergField.from_function(base, tg, lambda x, u, t: np.exp(-(x**2 + u**2) / 2 - t**2 / 8))
    H.save_stack(H.central_inverse_ft(f), tmp_path / "s")
    r = run("transform", "v_transform", "--in", tmp_path / "s", "--out", tmp_path / "v")
    assert r.exit_code == 0, r.output
    V = H.load_vstack(tmp_path / "v")
    assert V.active.any()
    a = json.loads(run("transform", "norms", "--in", tmp_path / "v", "--pq", "2,2").output)
    b = json.loads(run("transform", "norms", "--in", tmp_path / "s", "--pq", "2,2").output)
    assert a["norms"]["2,2"] == pytest.approx(b["norms"]["2,2"], rel=1e-12)
    assert run("transform", "identity", "--in", tmp_path / "s", "--out", tmp_path / "s2").exit_code == 0
    assert np.array_equal(H.load_stack(tmp_path / "s2").slices, H.load_stack(tmp_path / "s").slices)


def test_transform_errors(run, tmp_path):
    g = DATA / "golden_gaussian.json"
    assert run("transform", "twisted_stft", "--in", g, "--out", tmp_path / "x").exit_code == 2
    assert run("transform", "twisted_stft", "--in", tmp_path / "missing.json", "--out", tmp_path / "x", "--lambda", 1).exit_code == 3
    assert run("transform", "v_transform", "--in", g, "--out", tmp_path / "x").exit_code == 2
    assert run("transform", "identity", "--in", g).exit_code == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "points_per_axis": [8, 8], "half_width": [1, 1], "dtype": "c128", "layout": "axis-major", "data": "g.bin"}))
    (tmp_path / "g.bin").write_bytes(b"\0" * 32)
    r = run("transform", "identity", "--in", bad, "--out", tmp_path / "y")
    assert r.exit_code == 2 and "payload" in r.output


@pytest.mark.slow
def test_verify_all_at_one_lambda(run, tmp_path):
    r = run("verify", "all", "--lambda", 1, "--out", tmp_path, env={"TTFA_THREADS": "4"})
    assert r.exit_code == 0, r.output
    doc = json.loads((tmp_path / "report-all.json").read_text())
    assert doc["n_checks"] >= 40 and doc["n_pass"] == doc["n_checks"]
