import json

import numpy as np
import pytest

from daglattice import TargetSequence, build_random, save_lattice, save_target
from daglattice.cli import main

from conftest import lattice_from_probs


@pytest.fixture
def fixture_dir(tmp_path):
    lat = build_random(6, 4, 3, 13)
    save_lattice(lat, tmp_path / "lat.json", "json")
    save_lattice(lat, tmp_path / "lat.bin", "binary")
    save_target(TargetSequence(np.array([1, 0, 3, 2])), tmp_path / "tgt.json")

    single = lattice_from_probs([[0.0, 1.0], [0.0, 0.0]], [[0.5, 0.5], [0.75, 0.25]])
    save_lattice(single, tmp_path / "single.json", "json")
    save_target(TargetSequence(np.array([0, 1])), tmp_path / "single_tgt.json")
    # infeasible: target longer than the graph
    save_target(TargetSequence(np.array([0, 1, 0])), tmp_path / "long_tgt.json")
    return tmp_path


def run(capsys, *argv):
    code = main(["--no-timing", *argv])
    return code, capsys.readouterr().out


def test_score_single_path(fixture_dir, capsys):
    code, out = run(capsys, "score",
                    "--lattice", str(fixture_dir / "single.json"),
                    "--target", str(fixture_dir / "single_tgt.json"))
    assert code == 0
    report = json.loads(out)
    assert report["outputs"]["nll"] == pytest.approx(2.0794415416798357, abs=1e-9)
    # at least 9 significant digits survive the formatting
    assert "2.07944154" in out


def test_score_infeasible_exit_3(fixture_dir, capsys):
    code, out = run(capsys, "score",
                    "--lattice", str(fixture_dir / "single.json"),
                    "--target", str(fixture_dir / "long_tgt.json"))
    assert code == 3
    assert json.loads(out)["outputs"]["nll"] == "inf"


def test_score_matches_oracle_subcommand(fixture_dir, capsys):
    _, out1 = run(capsys, "score",
                  "--lattice", str(fixture_dir / "lat.json"),
                  "--target", str(fixture_dir / "tgt.json"))
    _, out2 = run(capsys, "oracle", "--mode", "logprob",
                  "--lattice", str(fixture_dir / "lat.json"),
                  "--target", str(fixture_dir / "tgt.json"))
    a = json.loads(out1)["outputs"]["nll"]
    b = json.loads(out2)["outputs"]["nll"]
    assert a == pytest.approx(b, abs=1e-9)


def test_decode_viterbi_single_path(fixture_dir, capsys):
    code, out = run(capsys, "decode", "--strategy", "viterbi",
                    "--lattice", str(fixture_dir / "single.json"))
    assert code == 0
    assert json.loads(out)["outputs"]["path"] == [1, 2]


def test_decode_binary_and_json_agree(fixture_dir, capsys):
    _, out1 = run(capsys, "decode", "--strategy", "lookahead",
                  "--lattice", str(fixture_dir / "lat.json"))
    _, out2 = run(capsys, "decode", "--strategy", "lookahead",
                  "--lattice", str(fixture_dir / "lat.bin"))
    assert json.loads(out1)["outputs"] == json.loads(out2)["outputs"]


def test_glance_deterministic_stdout(fixture_dir, capsys):
    args = ("glance", "--lattice", str(fixture_dir / "lat.json"),
            "--target", str(fixture_dir / "tgt.json"), "--tau", "0.5", "--seed", "3")
    _, out1 = run(capsys, *args)
    _, out2 = run(capsys, *args)
    assert out1 == out2
    assert json.loads(out1)["outputs"]["unmasked"] == 2  # ceil(0.5 * 4)


def test_gradcheck(fixture_dir, capsys):
    code, out = run(capsys, "gradcheck",
                    "--lattice", str(fixture_dir / "lat.json"),
                    "--target", str(fixture_dir / "tgt.json"))
    assert code == 0
    assert json.loads(out)["outputs"]["max_rel_err"] <= 1e-5


def test_posterior_gamma_rows_normalized(fixture_dir, capsys):
    code, out = run(capsys, "posterior", "--pairwise",
                    "--lattice", str(fixture_dir / "lat.json"),
                    "--target", str(fixture_dir / "tgt.json"))
    assert code == 0
    gamma = np.array(json.loads(out)["outputs"]["gamma"])
    assert gamma.sum(axis=1) == pytest.approx(np.ones(4), abs=1e-9)


def test_expect_shape(fixture_dir, capsys):
    code, out = run(capsys, "expect",
                    "--lattice", str(fixture_dir / "lat.json"),
                    "--target", str(fixture_dir / "tgt.json"))
    assert code == 0
    z = np.array(json.loads(out)["outputs"]["expected_states"])
    assert z.shape == (4, 3)


def test_bestpath_one_based_output(fixture_dir, capsys):
    code, out = run(capsys, "bestpath",
                    "--lattice", str(fixture_dir / "lat.json"),
                    "--target", str(fixture_dir / "tgt.json"))
    assert code == 0
    path = json.loads(out)["outputs"]["path"]
    assert path[0] == 1 and path[-1] == 6


def test_parse_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["score", "--lattice", str(bad), "--target", str(bad)])
    capsys.readouterr()
    assert code == 2


def test_validation_failure_exit_4_and_skip_flag(tmp_path, capsys):
    lat = build_random(4, 3, 0, 0)
    lt = np.array(lat.log_transition)
    lt[0, 1] += 1.0  # denormalize a row
    bad = type(lat)(4, 3, 0, lt, lat.log_emission)
    save_lattice(bad, tmp_path / "bad.json", "json")
    save_target(TargetSequence(np.array([0, 1, 2])), tmp_path / "tgt.json")
    code = main(["score", "--lattice", str(tmp_path / "bad.json"),
                 "--target", str(tmp_path / "tgt.json")])
    capsys.readouterr()
    assert code == 4
    code = main(["--no-timing", "score", "--skip-validation",
                 "--lattice", str(tmp_path / "bad.json"),
                 "--target", str(tmp_path / "tgt.json")])
    capsys.readouterr()
    assert code == 0


def test_pipeline_command(tmp_path, capsys):
    (tmp_path / "states.json").write_text(json.dumps([[1.0], [2.0]]))
    (tmp_path / "dur.json").write_text(json.dumps([2, 3]))
    code = main(["--no-timing", "pipeline",
                 "--states", str(tmp_path / "states.json"),
                 "--durations", str(tmp_path / "dur.json"),
                 "--emit-frames"])
    out = capsys.readouterr().out
    assert code == 0
    report = json.loads(out)
    assert report["outputs"]["frame_count"] == 5
    assert report["outputs"]["frames"] == [[1.0], [1.0], [2.0], [2.0], [2.0]]


def test_pipeline_shape_error_exit_4(tmp_path, capsys):
    (tmp_path / "states.json").write_text(json.dumps([[1.0], [2.0]]))
    (tmp_path / "dur.json").write_text(json.dumps([2, 3, 1]))
    code = main(["pipeline", "--states", str(tmp_path / "states.json"),
                 "--durations", str(tmp_path / "dur.json")])
    capsys.readouterr()
    assert code == 4


def test_bench_single_size_null_ratio(capsys):
    code, out = run(capsys, "bench", "--sizes", "32",
                    "--target-len", "4", "--repeats", "2")
    assert code == 0
    rows = json.loads(out)["outputs"]["rows"]
    assert len(rows) == 1
    assert rows[0]["ratio_to_prev"] is None


def test_bench_equal_sizes_ratio_near_one(capsys):
    code, out = run(capsys, "bench", "--sizes", "128,128",
                    "--target-len", "8", "--repeats", "5")
    assert code == 0
    rows = json.loads(out)["outputs"]["rows"]
    assert 0.8 <= rows[1]["ratio_to_prev"] <= 1.25
