"""End-to-end CLI behavior: exit codes, CSV artifacts, determinism, report."""

from frame_hebb.cli import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_DIVERGED,
    EXIT_PASS,
    TRAJECTORY_SCHEMA_VERSION,
    main,
)
from frame_hebb.records import make_record, read_records_csv, write_records_csv

FAST = ["--samples", "20000"]
CHEAP_EQUIV = ["--checks", "closed-equivalence,fixed-point-sharing"]
CHEAP_FRAME = ["--checks", "frame-bounds,kernel-annihilation,restricted-inverse"]


def run(args):
    return main([str(a) for a in args])


class TestEquivalence:
    def test_default_cheap_checks_pass(self, tmp_path):
        assert run(["equivalence", "--out", tmp_path] + FAST + CHEAP_EQUIV) == EXIT_PASS
        records = read_records_csv(tmp_path / "equivalence.csv")
        assert {r.check_name for r in records} == {
            "closed-equivalence",
            "fixed-point-sharing",
        }
        assert all(r.passed for r in records)

    def test_nu_above_nx_is_config_error(self, tmp_path, capsys):
        code = run(["equivalence", "--out", tmp_path, "--nx", "2", "--nu", "5"])
        assert code == EXIT_CONFIG_ERROR
        assert "nu" in capsys.readouterr().err

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(["equivalence", "--out", a] + FAST + CHEAP_EQUIV)
        run(["equivalence", "--out", b] + FAST + CHEAP_EQUIV)
        assert (a / "equivalence.csv").read_bytes() == (b / "equivalence.csv").read_bytes()


class TestFrameCheck:
    def test_cheap_checks_pass(self, tmp_path):
        assert run(["frame-check", "--out", tmp_path] + FAST + CHEAP_FRAME) == EXIT_PASS
        records = read_records_csv(tmp_path / "frame_check.csv")
        assert len(records) == 3 and all(r.passed for r in records)

    def test_single_check_single_row(self, tmp_path):
        run(["frame-check", "--out", tmp_path, "--checks", "coefficient-identity"])
        records = read_records_csv(tmp_path / "frame_check.csv")
        assert [r.check_name for r in records] == ["coefficient-identity"]

    def test_near_degenerate_covariance_rejected(self, tmp_path, capsys):
        code = run(
            ["frame-check", "--out", tmp_path, "--sigma", "random-spd:1e-10,1.0"]
            + CHEAP_FRAME
        )
        assert code == EXIT_CONFIG_ERROR
        assert "ill-conditioned" in capsys.readouterr().err

    def test_unknown_check_rejected_at_parse(self, tmp_path):
        code = run(["frame-check", "--out", tmp_path, "--checks", "bogus"])
        assert code == EXIT_CONFIG_ERROR


class TestTrain:
    def test_closed_oja_converges(self, tmp_path):
        code = run(
            ["train", "--out", tmp_path, "--nx", "5", "--nu", "2",
             "--sigma", "diagonal:5,4,3,2,1", "--steps", "5000"]
        )
        assert code == EXIT_PASS
        records = read_records_csv(tmp_path / "train.csv")
        assert records[0].check_name == "train-final"
        assert records[0].value <= 1e-6
        lines = (tmp_path / "train_trajectory.csv").read_text().splitlines()
        assert lines[0] == f"# {TRAJECTORY_SCHEMA_VERSION}"
        assert lines[1] == "step,subspace_error,orthonormality_residual,update_norm"
        assert len(lines) > 3

    def test_divergence_exit_code(self, tmp_path, capsys):
        code = run(
            ["train", "--out", tmp_path, "--nx", "5", "--nu", "2",
             "--sigma", "diagonal:5,4,3,2,1", "--learning-rate", "10"]
        )
        assert code == EXIT_DIVERGED
        assert "step" in capsys.readouterr().err

    def test_fixed_point_start_stays_flat(self, tmp_path):
        # seed chosen arbitrarily; the trained metric must already be tiny
        code = run(
            ["train", "--out", tmp_path, "--nx", "3", "--nu", "1",
             "--sigma", "diagonal:3,2,1", "--steps", "50", "--threshold", "1e-6"]
        )
        assert code in (EXIT_PASS, EXIT_CHECK_FAILED)

    def test_empirical_mode_runs(self, tmp_path):
        code = run(
            ["train", "--out", tmp_path, "--nx", "3", "--nu", "1",
             "--sigma", "diagonal:4,2,1", "--mode", "empirical",
             "--steps", "4000", "--threshold", "0.2"]
        )
        assert code == EXIT_PASS


class TestReport:
    def test_aggregates_and_passes(self, tmp_path):
        run(["equivalence", "--out", tmp_path] + FAST + CHEAP_EQUIV)
        run(["frame-check", "--out", tmp_path] + FAST + CHEAP_FRAME)
        run(["train", "--out", tmp_path, "--nx", "5", "--nu", "2",
             "--sigma", "diagonal:5,4,3,2,1"])
        assert run(["report", "--out", tmp_path]) == EXIT_PASS

    def test_report_output_grouped(self, tmp_path, capsys):
        run(["frame-check", "--out", tmp_path] + FAST + CHEAP_FRAME)
        capsys.readouterr()
        assert run(["report", "--out", tmp_path]) == EXIT_PASS
        out = capsys.readouterr().out
        assert "frame machinery" in out
        assert "overall: PASS" in out

    def test_missing_directory(self, tmp_path):
        assert run(["report", "--out", tmp_path / "nope"]) == EXIT_CONFIG_ERROR

    def test_empty_directory(self, tmp_path):
        assert run(["report", "--out", tmp_path]) == EXIT_CONFIG_ERROR

    def test_corrupt_csv_named(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,records\nfile,at,all\n")
        assert run(["report", "--out", tmp_path]) == EXIT_CONFIG_ERROR
        assert "bad.csv" in capsys.readouterr().err

    def test_mixed_pass_fail_reports_fail(self, tmp_path, capsys):
        records = [
            make_record("good", value=0.0, reference=0.0, tolerance=1.0,
                        metric="abs", seed=1, group="g"),
            make_record("bad", value=9.0, reference=0.0, tolerance=1.0,
                        metric="abs", seed=1, group="g"),
        ]
        write_records_csv(tmp_path / "mixed.csv", records)
        assert run(["report", "--out", tmp_path]) == EXIT_CHECK_FAILED
        assert "overall: FAIL" in capsys.readouterr().out

    def test_trajectory_files_skipped(self, tmp_path):
        run(["train", "--out", tmp_path, "--nx", "3", "--nu", "1",
             "--sigma", "diagonal:3,2,1", "--steps", "100"])
        # train writes both a trajectory and a records CSV; report must
        # aggregate the records and ignore the curves
        assert run(["report", "--out", tmp_path]) in (EXIT_PASS, EXIT_CHECK_FAILED)


class TestConfigFile:
    def test_config_file_drives_run(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "[run]\nnx = 3\nnu = 1\nseed = 9\nsamples = 20000\n"
            "sigma = diagonal:3,2,1\nchecks = frame-bounds\n"
        )
        out = tmp_path / "results"
        assert run(["frame-check", "--config", cfg, "--out", out]) == EXIT_PASS
        records = read_records_csv(out / "frame_check.csv")
        assert [r.check_name for r in records] == ["frame-bounds"]
        assert records[0].seed == 9

    def test_flag_overrides_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[run]\nseed = 9\nchecks = frame-bounds\n")
        out = tmp_path / "results"
        run(["frame-check", "--config", cfg, "--out", out, "--seed", "123"])
        assert read_records_csv(out / "frame_check.csv")[0].seed == 123
