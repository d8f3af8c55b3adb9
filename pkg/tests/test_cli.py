import json

import pytest

from latcover.dependencies import load_body, load_lattice
from latcover.lattice_cover import is_covering
from latcover.main import build_parser, run
from latcover.schemas import CertificateOut
from pydantic_core import to_jsonable_python


def invoke(capsys, *argv):
    code = run([str(a) for a in argv])
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload, captured.err


# ============= GEOMETRY =============

def test_verify_theorem1(capsys):
    code, payload, err = invoke(capsys, "verify-theorem1", "--n", 3, "--mu", 2, "--nu", 1)
    assert code == 0
    assert payload["formula"] == [63, 1]
    assert payload["geometric"] == [63, 1]
    assert payload["match"] is True
    assert payload["command"] == "verify-theorem1"
    assert "generated_at" in payload
    assert "✅" in err


def test_verify_theorem1_accepts_rational_flags(capsys):
    code, payload, _ = invoke(capsys, "verify-theorem1", "--n", 2, "--mu", "1/2", "--nu", 3)
    assert code == 0
    # 9 + 4*3/2 + 1/4
    assert payload["formula"] == [61, 4]


def test_decompose(capsys):
    code, payload, _ = invoke(capsys, "decompose", "--n", 2, "--mu", 2, "--nu", 1)
    assert code == 0
    assert len(payload["pieces"]) == 4
    assert payload["report"]["ok"] is True
    assert payload["body_volume"] == [13, 2]


def test_mixed_volumes(capsys, fixtures_dir):
    code, payload, _ = invoke(capsys, "mixed-volumes", "--body", fixtures_dir / "t2.json")
    assert code == 0
    assert payload["profile"] == [[1, 2], [1, 1], [1, 2]]
    assert payload["ratio_coefficients"] == [[1, 1], [4, 1], [1, 1]]


def test_bounds_audit(capsys, fixtures_dir):
    code, payload, _ = invoke(capsys, "bounds-audit", "--body", fixtures_dir / "square.json", "--grid", "1:1,1:2")
    assert code == 0
    assert payload["report"]["ok"] is True
    assert payload["conjecture_violations"] == 0
    checks = [row["check"] for row in payload["report"]["rows"]]
    assert "brunn_minkowski mu=1 nu=2" in checks


def test_diffbody(capsys, fixtures_dir):
    code, payload, _ = invoke(capsys, "diffbody", "--body", fixtures_dir / "t2.json")
    assert code == 0
    assert len(payload["vertices"]) == 6
    assert payload["ratio"] == [6, 1]


# ============= COVERING =============

def test_covering_check_fary(capsys, fixtures_dir):
    code, payload, _ = invoke(
        capsys, "covering-check", "--body", fixtures_dir / "t2.json", "--lattice", fixtures_dir / "fary.json", "--depth", 8
    )
    assert code == 0
    assert payload["verdict"] == "Covered"


def test_covering_check_is_a_thin_adapter(capsys, fixtures_dir):
    body, lattice = fixtures_dir / "t2.json", fixtures_dir / "fary.json"
    _, payload, _ = invoke(capsys, "covering-check", "--body", body, "--lattice", lattice, "--depth", 8)
    direct = CertificateOut.from_certificate(is_covering(load_body(body), load_lattice(lattice), 8))
    expected = to_jsonable_python(direct)
    assert {k: payload[k] for k in expected} == expected


def test_covering_check_failures_exit_2(capsys, fixtures_dir):
    body, lattice = fixtures_dir / "small_square.json", fixtures_dir / "z2.json"
    code, payload, _ = invoke(capsys, "covering-check", "--body", body, "--lattice", lattice)
    assert code == 2
    assert payload["verdict"] == "VolumeDeficit"

    code, payload, _ = invoke(capsys, "covering-check", "--body", body, "--lattice", lattice, "--depth", 6, "--no-volume-check")
    assert code == 2
    assert payload["verdict"] == "UncoveredWitness"
    assert payload["witness"] is not None


def test_density_and_star_number(capsys, fixtures_dir):
    args = ("--body", fixtures_dir / "t2.json", "--lattice", fixtures_dir / "fary.json")
    code, payload, _ = invoke(capsys, "density", *args)
    assert code == 0
    assert payload["density"] == [3, 2]
    assert payload["density_decimal"] == "1.5"

    code, payload, _ = invoke(capsys, "star-number", *args, "--brute-force")
    assert code == 0
    assert payload["star_number"] == payload["brute_force"]


def test_counting_density(capsys, fixtures_dir):
    code, payload, _ = invoke(
        capsys, "counting-density", "--body", fixtures_dir / "square.json", "--lattice", fixtures_dir / "z2.json", "--ell", 11
    )
    assert code == 0
    assert payload["counting_density"] == [1, 1]


def test_hadwiger_audit(capsys, fixtures_dir):
    code, payload, _ = invoke(
        capsys, "hadwiger-audit", "--body", fixtures_dir / "t2.json", "--lattice", fixtures_dir / "fary.json", "--depth", 8
    )
    assert code == 0
    assert payload["ok"] is True
    assert payload["rows"][0]["check"] == "star_number_bound"


def test_homothety(capsys, fixtures_dir):
    square = fixtures_dir / "square.json"
    code, payload, _ = invoke(capsys, "homothety", "--body", square, "--x", "1/2,1/2")
    assert code == 0
    assert payload["homothetic"] is True
    assert payload["lambda"] == [1, 2]

    code, payload, _ = invoke(capsys, "homothety", "--body", square, "--x", "1/2,1/4")
    assert payload["homothetic"] is False

    code, _, _ = invoke(capsys, "homothety", "--body", square, "--x", "1/2,1/4,0")
    assert code == 1


def test_theorem2_audit(capsys, fixtures_dir):
    code, payload, _ = invoke(
        capsys, "theorem2-audit", "--simplex", fixtures_dir / "t2.json", "--lattice", fixtures_dir / "fary.json", "--depth", 8
    )
    assert code == 0
    assert payload["ok"] is True
    final = payload["rows"][-1]
    assert final["check"] == "theorem2_bound"
    assert final["rhs_decimal"] == "1.0001220703125"


def test_theorem2_audit_on_a_non_covering(capsys, fixtures_dir):
    code, payload, err = invoke(
        capsys, "theorem2-audit", "--simplex", fixtures_dir / "t2.json", "--lattice", fixtures_dir / "z2.json"
    )
    assert code == 2
    assert payload["certificate"]["verdict"] == "VolumeDeficit"
    assert "❌" in err


def test_lemma3_estimate(capsys, fixtures_dir):
    args = ("--simplex", fixtures_dir / "t2.json", "--lattice", fixtures_dir / "fary.json", "--depth", 8)
    code, payload, _ = invoke(capsys, "lemma3-estimate", *args, "--samples", 20000, "--seed", 4)
    assert code == 0
    assert payload["within_4_sigma"] is True
    assert payload["exact_det"] == [1, 3]
    assert payload["samples"] == 20000


def test_cover_scale(capsys, fixtures_dir):
    code, payload, _ = invoke(
        capsys, "cover-scale", "--body", fixtures_dir / "square.json", "--lattice", fixtures_dir / "z2.json", "--depth", 4
    )
    assert code == 0
    assert payload["t_hi"] == [1, 1]
    assert payload["lower_verdict"] == "VolumeDeficit"


# ============= EXIT CODES AND OUTPUT =============

def test_malformed_json_reports_position(capsys, fixtures_dir):
    code, payload, err = invoke(capsys, "density", "--body", fixtures_dir / "broken.json", "--lattice", fixtures_dir / "z2.json")
    assert code == 1
    assert payload is None
    assert "line" in err


def test_schema_errors_exit_1(capsys, fixtures_dir, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "vertices": [[0, 0], [1, 0, 0], [0, 1]]}))
    code, _, err = invoke(capsys, "density", "--body", bad, "--lattice", fixtures_dir / "z2.json")
    assert code == 1
    assert "vertex 1" in err

    code, _, _ = invoke(capsys, "density", "--body", tmp_path / "missing.json", "--lattice", fixtures_dir / "z2.json")
    assert code == 1


def test_flat_body_exits_1(capsys, tmp_path, fixtures_dir):
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps({"dim": 2, "vertices": [[0, 0], [1, 1], [2, 2]]}))
    code, _, _ = invoke(capsys, "density", "--body", flat, "--lattice", fixtures_dir / "z2.json")
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["no-such-command"],
        ["verify-theorem1", "--n", "3", "--mu", "x"],
        ["lemma3-estimate", "--simplex", "a.json", "--lattice", "b.json"],
        ["optimize", "--n", "2"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, _ = invoke(capsys, *argv)
    assert code == 1


def test_optimize_needs_one_body_source(capsys, fixtures_dir):
    code, _, err = invoke(capsys, "optimize", "--seed", 0)
    assert code == 1
    code, _, _ = invoke(capsys, "optimize", "--seed", 0, "--n", 2, "--simplex", fixtures_dir / "t2.json")
    assert code == 1


def test_out_flag_writes_a_file(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, payload, _ = invoke(capsys, "verify-theorem1", "--n", 2, "--mu", 1, "--nu", 1, "--out", out)
    assert code == 0
    assert payload is None
    assert json.loads(out.read_text())["match"] is True


def test_output_is_reproducible(capsys, fixtures_dir):
    args = ("lemma3-estimate", "--simplex", fixtures_dir / "t2.json", "--lattice", fixtures_dir / "fary.json")
    runs = []
    for _ in range(2):
        _, payload, _ = invoke(capsys, *args, "--samples", 2000, "--seed", 9, "--depth", 8)
        payload.pop("generated_at")
        runs.append(payload)
    assert runs[0] == runs[1]


def test_every_subcommand_is_registered():
    parser = build_parser()
    subparsers = next(a for a in parser._actions if a.dest == "command")
    expected = {
        "diffbody", "verify-theorem1", "decompose", "mixed-volumes", "bounds-audit",
        "covering-check", "density", "counting-density", "star-number", "hadwiger-audit",
        "lemma3-estimate", "homothety", "theorem2-audit", "cover-scale", "optimize", "runs",
    }
    assert set(subparsers.choices) == expected


@pytest.mark.slow
def test_optimize_writes_history(capsys, tmp_path, fixtures_dir):
    history = tmp_path / "history.csv"
    code, payload, _ = invoke(
        capsys, "optimize", "--n", 2, "--config", fixtures_dir / "search_t2.toml", "--seed", 0,
        "--iterations", 10, "--history-csv", history,
    )
    assert code == 0
    assert payload["best_density"] == [3, 2]
    assert history.exists()
