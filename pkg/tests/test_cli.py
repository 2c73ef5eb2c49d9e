import json

import numpy as np
import pytest

from ecclab import cli
from ecclab import code as codes


def run(argv):
    return cli.main(argv)


def read(path):
    with open(path) as f:
        return f.read()


@pytest.fixture
def code_file(tmp_path):
    path = tmp_path / "code.txt"
    assert run(["codegen", "--hamming-k", "4", "-o", str(path)]) == 0
    return path


def test_codegen_hamming(code_file):
    text = read(code_file)
    assert text.splitlines()[0] == "7 4 3"
    spec = codes.load_code(code_file)
    assert np.array_equal(spec.H, codes.hamming_sec(4).H)
    assert (code_file.parent / (code_file.name + ".manifest.json")).exists()


def test_codegen_usage_errors(tmp_path):
    out = tmp_path / "x.txt"
    # unknown flag: argparse usage error, exit code 2
    with pytest.raises(SystemExit) as exc:
        run(["codegen", "--bogus", "-o", str(out)])
    assert exc.value.code == 2
    # random without seed: domain error, exit code 1
    assert run(["codegen", "--random-k", "8", "-o", str(out)]) == 1


def test_simulate_and_infer_roundtrip(tmp_path, code_file):
    hist = tmp_path / "hist.csv"
    args = ["simulate", "--spec", str(code_file), "--rber", "0.01",
            "--pattern", "ALL_ONES", "--burst-bits", "16", "--words", "20000",
            "--seed", "3", "-o", str(hist)]
    assert run(args) == 0
    text = read(hist)
    assert text.startswith("errors,count")

    report = tmp_path / "report.json"
    assert run(["ein-infer", "--observed", str(hist), "--word-bits", "16",
                "--candidates", str(code_file), "--include-no-ecc",
                "--rber-grid", "1e-3:1e-1:10", "--patterns", "ALL_ONES",
                "--budget", "20000", "--seed", "5", "-o", str(report)]) == 0
    doc = json.loads(read(report))
    assert doc["map"] == "(7,4,3)"
    assert len(doc["ranked"]) == 2


def test_beer_profile_and_recover(tmp_path, code_file):
    profile = tmp_path / "profile.json"
    assert run(["beer-profile", "--spec", str(code_file), "--weights", "1",
                "--rber", "0.35", "--trials", "4000", "--threshold", "0.01",
                "--seed", "2", "-o", str(profile)]) == 0
    doc = json.loads(read(profile))
    assert doc["k"] == 4

    solutions = tmp_path / "solutions.json"
    assert run(["beer-recover", "--profile", str(profile), "--exhaustive",
                "-o", str(solutions)]) == 0
    sol = json.loads(read(solutions))
    assert sol["unique"] is True
    assert sol["n_solutions"] == 1


def test_beep_locate(tmp_path, code_file):
    written = tmp_path / "w.bits"
    observed = tmp_path / "o.bits"
    written.write_text("1000\n")
    observed.write_text("1001\n")
    out = tmp_path / "loc.json"
    assert run(["beep-locate", "--spec", str(code_file), "--written", str(written),
                "--observed", str(observed), "-o", str(out)]) == 0
    doc = json.loads(read(out))
    assert doc["indeterminate"] is False
    assert doc["error_positions"] == [5, 6]

    observed.write_text("1000\n")
    assert run(["beep-locate", "--spec", str(code_file), "--written", str(written),
                "--observed", str(observed), "-o", str(out)]) == 0
    assert json.loads(read(out))["indeterminate"] is True


def test_beep_profile(tmp_path):
    code31 = tmp_path / "c31.txt"
    assert run(["codegen", "--hamming-k", "26", "-o", str(code31)]) == 0
    out = tmp_path / "beep.csv"
    assert run(["beep-profile", "--spec", str(code31), "--words", "6",
                "--errors", "3", "--pbit", "1.0", "--passes", "1",
                "--trials", "1", "--seed", "4", "-o", str(out)]) == 0
    lines = read(out).splitlines()
    assert lines[0] == "word,success,true_at_risk,recovered"
    assert lines[-1].startswith("# success_rate,")


def test_harp_eval(tmp_path):
    code71 = tmp_path / "c71.txt"
    assert run(["codegen", "--hamming-k", "64", "-o", str(code71)]) == 0
    cov = tmp_path / "cov.csv"
    maxsim = tmp_path / "maxsim.csv"
    assert run(["harp-eval", "--spec", str(code71), "--words", "200",
                "--errors", "2", "--pbit", "1.0", "--rounds", "4",
                "--algos", "NAIVE,HARP_U", "--seed", "6",
                "-o", str(cov), "--out-maxsim", str(maxsim)]) == 0
    lines = read(cov).splitlines()
    assert lines[0] == "algorithm,round,direct_coverage,indirect_coverage"
    assert len(lines) == 1 + 2 * 5
    assert read(maxsim).splitlines()[0] == "algorithm,max_simultaneous,words"


def test_reach_eval_and_uber_calc(tmp_path):
    out = tmp_path / "reach.csv"
    assert run(["reach-eval", "--cells", "2000", "--target-trefw", "1.0",
                "--reach-trefw", "1.0,1.25", "--reach-dt", "0",
                "--iterations", "8", "--seed", "7", "-o", str(out)]) == 0
    lines = read(out).splitlines()
    assert lines[0].startswith("reach_trefw,")
    assert len(lines) == 3

    uber_out = tmp_path / "uber.txt"
    assert run(["uber-calc", "--w", "64", "--k", "0", "--target", "1e-15",
                "-o", str(uber_out)]) == 0
    text = read(uber_out)
    value = float(text.splitlines()[1].split(",")[-1])
    assert value == pytest.approx(1e-15, rel=0.01)
    assert "3.8e-09" in text  # the flagged table discrepancy note


def test_cli_outputs_byte_identical_across_runs_and_workers(tmp_path, code_file):
    outs = []
    for tag, workers in (("a", "1"), ("b", "1"), ("c", "8")):
        hist = tmp_path / f"hist_{tag}.csv"
        assert run(["simulate", "--spec", str(code_file), "--rber", "0.02",
                    "--pattern", "RANDOM", "--pattern-seed", "9",
                    "--burst-bits", "16", "--words", "30000",
                    "--seed", "11", "--workers", workers, "-o", str(hist)]) == 0
        outs.append(read(hist))
    assert outs[0] == outs[1] == outs[2]


def test_domain_error_exit_code(tmp_path, code_file):
    out = tmp_path / "h.csv"
    # burst not a multiple of k: domain error -> exit 1
    assert run(["simulate", "--spec", str(code_file), "--rber", "0.01",
                "--burst-bits", "15", "--words", "100", "--seed", "1",
                "-o", str(out)]) == 1
