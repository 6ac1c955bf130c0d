"""ExperimentRecord invariants and CSV round-tripping."""

import math

import pytest

from frame_hebb.records import (
    CSV_SCHEMA_VERSION,
    ExperimentRecord,
    digest_inputs,
    make_record,
    read_records_csv,
    write_records_csv,
)


def test_make_record_pass_fail_logic():
    rec = make_record("t", value=1.0, reference=1.0 + 1e-15, tolerance=1e-12,
                      metric="rel", seed=1)
    assert rec.passed
    rec = make_record("t", value=2.0, reference=1.0, tolerance=1e-12,
                      metric="rel", seed=1)
    assert not rec.passed


def test_rel_error_falls_back_to_abs_at_zero_reference():
    rec = make_record("t", value=3e-13, reference=0.0, tolerance=1e-12,
                      metric="rel", seed=1)
    assert rec.rel_error == rec.abs_error == pytest.approx(3e-13)
    assert rec.passed


def test_inconsistent_passed_flag_rejected():
    with pytest.raises(ValueError):
        ExperimentRecord(
            check_name="t", inputs_digest="", value=5.0, reference=0.0,
            abs_error=5.0, rel_error=5.0, metric="abs", tolerance=1e-12,
            passed=True, wall_time_ms=0.0, seed=0,
        )


def test_non_finite_fields_rejected():
    with pytest.raises(ValueError):
        make_record("t", value=math.nan, reference=0.0, tolerance=1.0,
                    metric="abs", seed=0)


def test_unknown_metric_rejected():
    with pytest.raises(ValueError):
        make_record("t", value=0.0, reference=0.0, tolerance=1.0,
                    metric="between", seed=0)


def test_csv_round_trip(tmp_path):
    records = [
        make_record("alpha", value=1 / 3, reference=0.0, tolerance=1.0,
                    metric="abs", seed=7, inputs_digest="abc", group="g1"),
        make_record("beta", value=2.0, reference=1.0, tolerance=1e-3,
                    metric="rel", seed=8, group="g2"),
    ]
    path = tmp_path / "out.csv"
    write_records_csv(path, records)
    text = path.read_text()
    assert text.startswith(f"# {CSV_SCHEMA_VERSION}\n")
    assert "0.33333333333333331" in text  # 17 significant digits
    loaded = read_records_csv(path)
    assert [r.check_name for r in loaded] == ["alpha", "beta"]
    assert loaded[0].value == records[0].value  # bit-exact float round trip
    assert loaded[0].passed and not loaded[1].passed
    assert loaded[1].group == "g2"


def test_read_rejects_wrong_schema(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# some-other-schema\na,b\n1,2\n")
    with pytest.raises(ValueError):
        read_records_csv(path)


def test_digest_is_stable_and_input_sensitive():
    a = digest_inputs(nx=4, seed=1)
    assert a == digest_inputs(nx=4, seed=1)
    assert a != digest_inputs(nx=5, seed=1)
    assert len(a) == 12
