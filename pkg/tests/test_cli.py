import math

import pytest

from collision_lab.analytics import BucketSpace, expected_collisions
from collision_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def csv_rows(text):
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


class TestExpect:
    def test_headline(self, capsys):
        code, out, err = run(capsys, "expect", "--n", "1000000", "--bits", "32")
        assert code == 0 and err == ""
        assert "116.4062" in out

    def test_trivial(self, capsys):
        code, out, _ = run(capsys, "expect", "--n", "1", "--bits", "32")
        assert code == 0
        assert "(stable) = 0" in out

    def test_64bit(self, capsys):
        code, out, _ = run(capsys, "expect", "--n", "1000000", "--bits", "64")
        assert code == 0
        assert "2.712477e-08" in out

    def test_csv_roundtrips_losslessly(self, capsys):
        code, out, _ = run(capsys, "expect", "--n", "1000000", "--bits", "32",
                           "--format", "csv")
        assert code == 0
        header, rows = csv_rows(out)
        assert header == ["n", "buckets", "naive", "stable", "relative_difference"]
        stable = float(rows[0][3])
        assert stable == expected_collisions(10 ** 6, BucketSpace.power_of_two(32))

    def test_defaults_are_headline_case(self, capsys):
        code, out, _ = run(capsys, "expect")
        assert code == 0
        assert "n = 1000000" in out and "2^32" in out

    def test_bits_and_buckets_conflict(self, capsys):
        code, out, err = run(capsys, "expect", "--bits", "32", "--buckets", "100")
        assert code == 1
        assert err.startswith("error:") and "\n" not in err.strip()


class TestScan:
    def test_scan_across_bit_range(self, capsys):
        code, out, _ = run(capsys, "scan", "--n", "1000000")
        assert code == 0
        header, rows = csv_rows(out)
        assert header == ["k", "naive", "stable"]
        assert len(rows) == 33
        by_k = {int(r[0]): (float(r[1]), float(r[2])) for r in rows}
        assert by_k[39][1] <= 1.0 < by_k[38][1]
        assert by_k[54][0] == 10 ** 6
        assert by_k[32][0] == pytest.approx(116.4062, abs=1e-4)
        assert by_k[32][1] == pytest.approx(116.4062, abs=1e-4)

    def test_range_flag(self, capsys):
        code, out, _ = run(capsys, "scan", "--n", "1000", "--range", "35:37")
        _, rows = csv_rows(out)
        assert [int(r[0]) for r in rows] == [35, 36, 37]

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "scan.csv"
        code, out, _ = run(capsys, "scan", "--n", "1000", "--range", "32:33",
                           "--out", str(path))
        assert code == 0 and out == ""
        header, rows = csv_rows(path.read_text())
        assert header == ["k", "naive", "stable"] and len(rows) == 2


class TestProb:
    def test_headline_64(self, capsys):
        code, out, _ = run(capsys, "prob", "--n", "1000000", "--bits", "64")
        assert code == 0
        assert "2.710503e-08" in out

    def test_pigeonhole(self, capsys):
        code, out, _ = run(capsys, "prob", "--n", "3", "--buckets", "2")
        assert code == 0
        assert "(stable) = 1" in out

    def test_three_draws_54(self, capsys):
        code, out, _ = run(capsys, "prob", "--n", "3", "--bits", "54")
        assert code == 0
        assert "1.665335e-16" in out

    def test_errcmp_csv(self, capsys):
        code, out, _ = run(capsys, "prob", "--n", "1000", "--errcmp",
                           "--range", "32:40")
        assert code == 0
        header, rows = csv_rows(out)
        assert header == ["k", "relative_error", "zero_error"]
        assert len(rows) == 9
        for r in rows:
            if r[2] == "zero":
                assert float(r[1]) == 0.0
            elif r[2] == "":
                assert math.isfinite(float(r[1]))


class TestPmf:
    def test_three_draws_two_buckets(self, capsys):
        code, out, _ = run(capsys, "pmf", "--n", "3", "--buckets", "2")
        assert code == 0
        header, rows = csv_rows(out)
        assert header == ["c", "probability"]
        data = {r[0]: r[1] for r in rows}
        assert float(data["0"]) == 0.0
        assert float(data["1"]) == 0.75
        assert float(data["2"]) == 0.25
        assert float(data["sum"]) == 1.0

    def test_two_draws_two_buckets(self, capsys):
        code, out, _ = run(capsys, "pmf", "--n", "2", "--buckets", "2")
        _, rows = csv_rows(out)
        data = {r[0]: r[1] for r in rows}
        assert float(data["0"]) == 0.5 and float(data["1"]) == 0.5

    def test_footer_mean_matches_expectation(self, capsys):
        code, out, _ = run(capsys, "pmf", "--n", "1000", "--bits", "32")
        assert code == 0
        _, rows = csv_rows(out)
        mean = float({r[0]: r[1] for r in rows}["mean"])
        e = expected_collisions(1000, BucketSpace.power_of_two(32))
        assert mean == pytest.approx(e, abs=1e-9)

    def test_cap_error(self, capsys):
        code, _, err = run(capsys, "pmf", "--n", "100000", "--bits", "32")
        assert code == 1
        assert err.startswith("error:")


class TestSimulate:
    def test_single_draw(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "1", "--bits", "32")
        assert code == 0
        assert "duplicates=0" in out and "ties=0" in out

    def test_csv_deterministic(self, capsys):
        args = ("simulate", "--n", "20000", "--bits", "16", "--seeds", "3",
                "--seed-base", "7", "--format", "csv")
        code, out1, _ = run(capsys, *args)
        assert code == 0
        code, out2, _ = run(capsys, *args)
        assert out1 == out2
        header, rows = csv_rows(out1)
        assert header == ["seed", "duplicates", "ties"]
        assert len(rows) == 6  # 3 seeds + mean + sd + expected

    def test_generator_flag(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "10000",
                           "--generator", "cmrg:271:16", "--format", "csv")
        assert code == 0
        header, rows = csv_rows(out)
        assert rows[0][0] == "271"

    def test_tie_bound_on_report(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "20000", "--bits", "16",
                           "--format", "csv")
        _, rows = csv_rows(out)
        c, t = int(rows[0][1]), int(rows[0][2])
        assert c >= 1
        assert c + 1 <= t <= 2 * c

    def test_trace_files(self, capsys, tmp_path):
        prefix = tmp_path / "run"
        code, out, _ = run(capsys, "simulate", "--n", "5000", "--bits", "16",
                           "--seed-base", "5", "--out", str(prefix))
        assert code == 0
        traj = (tmp_path / "run_trajectory.csv").read_text().splitlines()
        pos = (tmp_path / "run_positions.csv").read_text().splitlines()
        assert traj[0] == "index,cumulative_collisions"
        assert pos[0] == "collision_rank,position"
        assert len(traj) == 5001
        final = int(traj[-1].split(",")[1])
        assert final == len(pos) - 1  # cumulative total equals listed positions

    def test_capacity_error_via_env(self, capsys, monkeypatch):
        monkeypatch.setenv("COLLISION_LAB_MAX_DISTINCT", "1000")
        code, _, err = run(capsys, "simulate", "--n", "2000", "--bits", "16")
        assert code == 1
        assert err.startswith("error:") and "COLLISION_LAB_MAX_DISTINCT" in err

    def test_buckets_rejected(self, capsys):
        code, _, err = run(capsys, "simulate", "--n", "100", "--buckets", "100")
        assert code == 1
        assert err.startswith("error:")


class TestSolve:
    def test_min_bits(self, capsys):
        code, out, _ = run(capsys, "solve", "--n", "1000000", "--target", "1")
        assert code == 0
        assert "k = 39" in out

    def test_min_bits_csv(self, capsys):
        code, out, _ = run(capsys, "solve", "--n", "1000000", "--target", "1",
                           "--format", "csv")
        _, rows = csv_rows(out)
        assert rows[0][2] == "39"

    def test_none_in_range(self, capsys):
        code, out, _ = run(capsys, "solve", "--n", "1000000", "--target", "1e-12")
        assert code == 0
        assert "none in range" in out

    def test_sample_size_64(self, capsys):
        code, out, _ = run(capsys, "solve", "--bits", "64", "--target", "1",
                           "--range", "1e6:1e10", "--format", "csv")
        assert code == 0
        _, rows = csv_rows(out)
        assert float(rows[0][2]) == pytest.approx(6.074e9, abs=0.001e9)

    def test_sample_size_headline_inverse(self, capsys):
        code, out, _ = run(capsys, "solve", "--bits", "32", "--target",
                           "116.4062", "--range", "1e3:1e9", "--format", "csv")
        _, rows = csv_rows(out)
        assert float(rows[0][2]) == pytest.approx(1e6, abs=1.0)

    def test_requires_exactly_one_unknown(self, capsys):
        code, _, err = run(capsys, "solve", "--n", "10", "--bits", "32",
                           "--target", "1")
        assert code == 1 and err.startswith("error:")

    def test_bracketing_error(self, capsys):
        code, _, err = run(capsys, "solve", "--bits", "32", "--target", "1",
                           "--range", "1e6:1e7")
        assert code == 1 and err.startswith("error:")


class TestInspect:
    def test_one(self, capsys):
        code, out, _ = run(capsys, "inspect", "1.0")
        assert code == 0
        assert "sign             = 0" in out
        assert "exponent field   = 1023" in out
        assert "class            = normal" in out

    def test_negative_zero(self, capsys):
        code, out, _ = run(capsys, "inspect", "-0.0")
        assert "sign             = 1" in out
        assert "class            = zero" in out

    def test_hex_input(self, capsys):
        code, out, _ = run(capsys, "inspect", "0x1p-1022")
        assert code == 0
        assert "class            = normal" in out
        assert "exponent field   = 1" in out

    def test_specials(self, capsys):
        for text, cls in (("inf", "infinity"), ("nan", "nan")):
            code, out, _ = run(capsys, "inspect", text)
            assert code == 0
            assert f"class            = {cls}" in out

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "inspect", "1.0", "--format", "csv")
        header, rows = csv_rows(out)
        assert header == ["value", "bits_hex", "sign", "exponent_field",
                          "significand_hex", "class"]
        assert rows[0][1] == "0x3ff0000000000000"

    def test_garbage_value(self, capsys):
        code, _, err = run(capsys, "inspect", "not-a-number")
        assert code == 1 and err.startswith("error:")
