import csv
import io
import json
from pathlib import Path

import jsonschema
import pytest

from gtail import cli

SCHEMAS = cli.SCHEMA_DIR


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv, env=env or {}, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def load(path):
    return json.loads(Path(path).read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def check_manifest(d):
    m = load(d / "manifest.json")
    jsonschema.validate(m, schema("manifest"))
    for o in m["outputs"]:
        assert (d / o["path"]).exists()
    return m


def test_constants(tmp_path):
    code, out, _ = run(["constants", "--cutoff", "100000", "--out", str(tmp_path)])
    assert code == 0
    obj = load(tmp_path / "constants.json")
    jsonschema.validate(obj, schema("constants"))
    assert 0.74 <= obj["exp_C_e"] <= 0.76
    assert json.loads(out)["C_e"] == obj["C_e"]
    check_manifest(tmp_path)


def test_predict_scalar_and_grid(tmp_path):
    code, _, _ = run(["predict", "--L", "2", "--out", str(tmp_path / "a")])
    assert code == 0
    obj = load(tmp_path / "a" / "predict.json")
    jsonschema.validate(obj, schema("predict"))
    assert obj["predicted_log_prob"] == pytest.approx(-1.33, abs=0.01)
    code, _, _ = run(["predict", "--L", "0:2:5", "--out", str(tmp_path / "b")])
    rows = read_csv(tmp_path / "b" / "predict.csv")
    assert [float(r["L"]) for r in rows] == [0.0, 0.5, 1.0, 1.5, 2.0]


def test_verify_identities(tmp_path):
    code, _, _ = run(["verify-identities", "--out", str(tmp_path)])
    assert code == 0
    obj = load(tmp_path / "identities.json")
    jsonschema.validate(obj, schema("checks"))
    assert obj["passed"]
    modular = [c for c in obj["checks"] if c["check"].startswith("modular")]
    assert len(modular) == 10 and all(abs(c["residual"]) < 1e-12 for c in modular)


def test_verify_lemmas_small(tmp_path):
    code, _, _ = run(["verify-lemmas", "--samples", "20000", "--z-max", "5", "--out", str(tmp_path)])
    obj = load(tmp_path / "lemmas.json")
    jsonschema.validate(obj, schema("checks"))
    assert code == (0 if obj["passed"] else 2)
    assert obj["passed"]


def test_mc_walk_rows(tmp_path):
    code, _, _ = run(["mc-walk", "--L", "2,3", "--samples", "2000", "--out", str(tmp_path)])
    assert code == 0
    rows = load(tmp_path / "mc_walk.json")
    jsonschema.validate(rows, schema("estimates"))
    assert len(rows) == 2
    run(["mc-walk", "--L", "1", "--bridge-n", "3", "--functional", "range_capped", "--samples", "1000",
         "--out", str(tmp_path / "b")])
    rows = load(tmp_path / "b" / "mc_walk.json")
    jsonschema.validate(rows, schema("estimates"))


def test_transfer_exit_csv(tmp_path):
    code, _, _ = run(["transfer-exit", "--L", "2,5", "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "transfer_exit.csv")
    assert list(rows[0]) == ["L", "probability", "scaled", "steps", "spacing", "tail_extrapolation"]
    assert float(rows[1]["probability"]) < float(rows[0]["probability"])


def test_convergence_failure_exit_code(tmp_path):
    code, _, err = run(["transfer-exit", "--L", "5", "--spacing", "0.5", "--out", str(tmp_path)])
    assert code == 3 and "convergence" in err


def test_usage_errors(tmp_path):
    assert run(["predict", "--bogus", "1"])[0] == 64
    assert run(["nonsense"])[0] == 64
    assert run([])[0] == 64
    assert run(["predict", "--L", "abc", "--out", str(tmp_path)])[0] == 64
    assert run(["compare", "--out", str(tmp_path)])[0] == 64
    assert run(["constants", "--cutoff", "1", "--out", str(tmp_path)])[0] == 64


def test_precedence(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# defaults\ncount = 1100\nseed = 4\nn = 8\n")
    ns = cli._build_parser().parse_args(["mc-ginibre", "--config", str(cfg), "--seed", "9"])
    p = cli.resolve("mc-ginibre", ns, env={"GTAIL_COUNT": "1200", "GTAIL_SEED": "7"})
    assert p["seed"] == 9  # flag beats environment and file
    assert p["count"] == 1200  # environment beats file
    assert p["n"] == 8  # file beats default
    assert p["method"] == "schur"  # default


def test_ginibre_abm_compare_and_replay(tmp_path):
    g1, g2, a1 = tmp_path / "g1", tmp_path / "g2", tmp_path / "a1"
    assert run(["mc-ginibre", "--n", "32", "--count", "1200", "--seed", "2", "--out", str(g1)])[0] == 0
    assert run(["mc-ginibre", "--n", "32", "--count", "1200", "--seed", "2", "--workers", "3",
                "--out", str(g2)])[0] == 0
    assert (g1 / "ginibre_samples_N32.csv").read_bytes() == (g2 / "ginibre_samples_N32.csv").read_bytes()
    assert (g1 / "ginibre_tail_N32.csv").read_bytes() == (g2 / "ginibre_tail_N32.csv").read_bytes()
    tail = read_csv(g1 / "ginibre_tail_N32.csv")
    assert list(tail[0])[:5] == ["L", "empirical_log_prob", "stderr", "count", "n_samples"]
    assert tail[0]["N"] == "32"

    env = {"GTAIL_COUNT": "1100", "GTAIL_SPACING": "0.05"}
    assert run(["mc-abm", "--out", str(a1)], env=env)[0] == 0
    m = check_manifest(a1)
    assert m["parameters"]["count"] == 1100
    abm_tail = read_csv(a1 / "abm_tail.csv")
    assert {"dt", "spacing"} <= set(abm_tail[0])

    c = tmp_path / "c"
    code, _, _ = run(["compare", "--ginibre-samples", str(g1 / "ginibre_samples_N32.csv"),
                      "--abm-samples", str(a1 / "abm_samples.csv"), "--out", str(c)])
    assert code == 0
    jsonschema.validate(load(c / "compare.json"), schema("compare"))
    rows = read_csv(c / "compare.csv")
    assert set(rows[0]) == {"L", "predicted_log_prob", "ginibre_log_prob", "ginibre_stderr", "abm_log_prob",
                            "abm_stderr"}

    assert cli.replay(a1 / "manifest.json", tmp_path / "r", io.StringIO()) == 0
    # a tampered digest is detected
    m["outputs"][0]["sha256"] = "0" * 64
    (tmp_path / "bad.json").write_text(json.dumps(m))
    assert run(["replay", str(tmp_path / "bad.json"), "--out", str(tmp_path / "r2")])[0] == 2
