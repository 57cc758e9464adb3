"""Tests for the seqspace command line"""

import json

import pytest

from seqspace import __version__
from seqspace.cli import EXIT_OK, EXIT_USAGE, EXIT_VERDICT, main


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def l2(tmp_path):
    return write(tmp_path, "l2.json", {"kind": "lorentz", "w": [1.0, 1.0], "p": 2.0})


@pytest.fixture
def lorentz(tmp_path):
    return write(tmp_path, "lorentz.json", {"kind": "lorentz", "w": [1.0, 0.8], "p": 2.0})


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_norm(capsys, l2):
    code, report = run_json(capsys, ["norm", "--space", l2, "--x", "3,4"])
    assert code == EXIT_OK
    assert report["schema"] == "seqspace/1"
    assert report["command"] == "norm"
    assert report["result"]["norm"] == pytest.approx(5.0)


def test_norm_human_output(capsys, l2):
    assert main(["norm", "--space", l2, "--x", "3,4"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("norm") and line.endswith(" 5") for line in lines)


def test_dimension_mismatch_is_a_usage_error(capsys, l2):
    assert main(["norm", "--space", l2, "--x", "1,2,3"]) == EXIT_USAGE
    assert "dimension" in capsys.readouterr().err


def test_missing_space_and_bad_json(capsys, tmp_path):
    assert main(["norm", "--x", "1,2"]) == EXIT_USAGE
    broken = tmp_path / "broken.json"
    broken.write_text('{"kind": "lorentz", "w": [1.0,}')
    assert main(["norm", "--space", str(broken), "--x", "1,2"]) == EXIT_USAGE
    assert "line 1" in capsys.readouterr().err


def test_invalid_space_names_the_field(capsys, tmp_path):
    space = write(tmp_path, "bad.json", {"kind": "lorentz", "w": [1.0, 2.0], "p": 2.0})
    assert main(["norm", "--space", space, "--x", "1,2"]) == EXIT_USAGE
    assert "non-increasing" in capsys.readouterr().err


def test_out_writes_report(capsys, l2, tmp_path):
    out = tmp_path / "report.json"
    assert main(["norm", "--space", l2, "--x", "3,4", "--format", "json", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["result"]["norm"] == pytest.approx(5.0)


def test_conjugate(capsys, tmp_path):
    phi = write(tmp_path, "phi.json", {"square_patch": 0.6})
    code, report = run_json(capsys, ["conjugate", "--phi", phi, "--points", "5"])
    assert code == EXIT_OK
    assert report["result"]["domain_end"] == pytest.approx(1.6)
    assert report["result"]["table"][-1]["conjugate"] == "inf"
    assert main(["conjugate"]) == EXIT_USAGE


def test_norming_is_deterministic(capsys, tmp_path):
    space = write(tmp_path, "space.json", {"kind": "lorentz", "w": [1.0, 0.5], "p": 2.0})
    argv = ["norming", "--space", space, "--x", "1,1", "--seed", "3"]
    code, first = run_json(capsys, argv)
    _, second = run_json(capsys, argv)
    assert code == EXIT_OK
    assert first == second
    assert first["result"]["functional"] == pytest.approx([0.75, 0.75])
    assert len(first["result"]["extremes"]) == 3
    assert first["result"]["complete"] is True


def test_opnorm(capsys, l2, tmp_path):
    matrix = write(tmp_path, "T.json", {"matrix": [[2.0, 0.0], [0.0, 1.0]]})
    code, report = run_json(capsys, ["opnorm", "--space", l2, "--matrix", matrix, "--budget", "4"])
    assert code == EXIT_OK
    assert report["result"]["norm"] == pytest.approx(2.0)
    wrong = write(tmp_path, "T3.json", {"matrix": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]})
    assert main(["opnorm", "--space", l2, "--matrix", wrong]) == EXIT_USAGE


def test_positivity_scan_of_minus_identity(capsys, l2, tmp_path):
    matrix = write(tmp_path, "T.json", {"matrix": [[-1.0, 0.0], [0.0, -1.0]]})
    argv = ["positivity", "--space", l2, "--matrix", matrix, "--budget", "4"]
    code, report = run_json(capsys, argv)
    assert code == EXIT_OK
    assert report["result"]["verdict"] == "Refuted"
    code, _ = run_json(capsys, argv + ["--expect-compatible"])
    assert code == EXIT_VERDICT


def test_lorentz_hyperplane_verdicts(capsys, lorentz):
    code, report = run_json(capsys, ["classify", "lorentz-hyperplane", "--space", lorentz, "--f", "1,2"])
    assert code == EXIT_OK
    assert report["result"]["status"] == "Impossible"
    assert report["result"]["reason"] == "COR34_UNEQUAL_MODULI"
    code, _ = run_json(capsys, ["classify", "lorentz-hyperplane", "--space", lorentz, "--f", "1,2", "--expect-compatible"])
    assert code == EXIT_VERDICT
    code, report = run_json(capsys, ["classify", "lorentz-hyperplane", "--space", lorentz, "--f", "1,-1", "--expect-compatible"])
    assert code == EXIT_OK
    assert report["result"]["status"] == "PossiblyOne"


def test_orlicz_subspace(capsys, tmp_path):
    space = write(tmp_path, "orlicz.json", {"kind": "orlicz", "dim": 4, "power": 3.0})
    fs = write(tmp_path, "fs.json", [[1.0, 1.0, 1.0, 0.0]])
    code, report = run_json(capsys, ["classify", "orlicz-subspace", "--space", space, "--fs", fs, "--expect-compatible"])
    assert code == EXIT_VERDICT
    assert report["result"]["reason"] == "THM41_SUPPORT_GT_2"
    assert report["result"]["phi_class"] == "SimilarTo(3,1)"
    assert report["result"]["basis_vectors"] == [3]
    assert report["result"]["property_Q"] is True


def test_classify_phi(capsys, tmp_path):
    spec = write(tmp_path, "space.json", {"kind": "orlicz", "dim": 3, "phi": {"power": 2.5}})
    code, report = run_json(capsys, ["classify", "phi", "--spec", spec])
    assert code == EXIT_OK
    assert report["result"]["class"] == "SimilarTo(2.5,1)"
    bad = write(tmp_path, "bad.json", {"power": 0.5})
    assert main(["classify", "phi", "--spec", bad]) == EXIT_USAGE


def test_verify_rejects_unknown_case(capsys):
    assert main(["verify", "--case", "no-such-case"]) == EXIT_USAGE


def test_minproj_in_l2_finds_the_orthogonal_projection(capsys, tmp_path):
    space = write(tmp_path, "l2_3.json", {"kind": "lorentz", "w": [1.0, 1.0, 1.0], "p": 2.0})
    fs = write(tmp_path, "fs.json", [[1.0, 1.0, 1.0]])
    code, report = run_json(capsys, ["minproj", "--space", space, "--fs", fs, "--budget", "4"])
    assert code == EXIT_OK
    assert report["result"]["norm"] == pytest.approx(1.0, abs=1e-6)


def test_verify_lorentz_example(capsys):
    code, report = run_json(capsys, ["verify", "--case", "lorentz-example", "--quick"])
    assert code == EXIT_OK
    assert report["result"]["passed"] is True
    assert [case["case"] for case in report["result"]["cases"]] == ["AC-1"]
