import math

import numpy as np
import pytest

from bqsm.entropy import binary_entropy
from bqsm.errors import CapacityError, InputError
from bqsm.protocols.codes import hamming_7_4
from bqsm.qkd import (Eavesdropper, QkdConfig, binary_rate, key_length,
                      noise_threshold, overall_bound, overall_bound_mc,
                      rate_bound_check, run_qkd, threshold_table)


class TestRates:
    def test_binary_rate_values(self):
        assert binary_rate(0.5, 0.0) == pytest.approx(0.5)
        assert binary_rate(2 / 3, 0.0) == pytest.approx(2 / 3)
        assert binary_rate(0.72, 0.1) == pytest.approx(
            0.72 - binary_entropy(0.1))

    def test_thresholds(self):
        assert noise_threshold(0.5) == pytest.approx(0.1100, abs=5e-4)
        assert noise_threshold(2 / 3) == pytest.approx(0.1735, abs=2e-3)
        assert noise_threshold(overall_bound(2)) == pytest.approx(
            0.199, abs=2e-3)

    def test_round_trip(self):
        for p in (0.05, 0.11, 0.2, 0.35, 0.49):
            assert noise_threshold(binary_entropy(p)) == pytest.approx(
                p, abs=1e-6)

    def test_rate_zero_at_threshold(self):
        for h in (0.5, 2 / 3, overall_bound(2)):
            assert binary_rate(h, noise_threshold(h)) == pytest.approx(
                0.0, abs=1e-6)

    def test_threshold_table_rows(self):
        rows = threshold_table()
        assert [r["alphabet"] for r in rows] == ["bb84", "six-state",
                                                 "all-bases"]


class TestOverallBound:
    def test_table_two_decimals(self):
        for d, want in ((2, 0.72), (4, 1.56), (8, 2.48), (16, 3.43)):
            assert round(overall_bound(d), 2) == want

    def test_strictly_increasing_and_ratio_monotone(self):
        values = [overall_bound(d) for d in range(2, 33)]
        assert all(a < b for a, b in zip(values, values[1:]))
        ratios = [overall_bound(d) / math.log2(d) for d in (2, 4, 8, 16)]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < 1.0

    def test_monte_carlo_agrees(self):
        est, se = overall_bound_mc(2, 30_000, 5)
        assert abs(est - overall_bound(2)) <= 3 * se
        est4, se4 = overall_bound_mc(4, 5_000, 6)
        assert abs(est4 - overall_bound(4)) <= 3 * se4

    def test_deterministic(self):
        assert overall_bound_mc(2, 500, 9) == overall_bound_mc(2, 500, 9)


class TestHonestRuns:
    def test_noiseless_bb84(self):
        cfg = QkdConfig(alphabet="bb84", p=0.0, symbols=4000,
                        ec_bits_per_symbol=0.0, margin_bits=1.0)
        rec = run_qkd(cfg, 3)
        assert rec["keys_equal"]
        assert abs(rec["sift_rate"] - 0.5) <= 3 * 0.5 / math.sqrt(4000)

    def test_six_state_sift_rate(self):
        cfg = QkdConfig(alphabet="six-state", p=0.0, symbols=6000,
                        ec_bits_per_symbol=0.0, margin_bits=1.0)
        rec = run_qkd(cfg, 4)
        assert abs(rec["sift_rate"] - 1 / 3) <= 3 * 0.5 / math.sqrt(6000)

    def test_noisy_reconciliation_rate(self):
        code = hamming_7_4(0.05)
        cfg = QkdConfig(alphabet="six-state", p=0.05, symbols=210,
                        code=code, margin_bits=2.0)
        runs = [run_qkd(cfg, s) for s in range(150)]
        rate = np.mean([r["reconciled"] for r in runs])
        design = np.mean([
            1 - code.failure_probability_chunked(r["sifted"], 0.05)
            for r in runs])
        assert rate >= design - 3 * math.sqrt(0.25 / len(runs))

    def test_key_extraction_when_rate_positive(self):
        code = hamming_7_4(0.05)
        cfg = QkdConfig(alphabet="six-state", p=0.05, symbols=300,
                        code=code, margin_bits=1.0)
        rec = run_qkd(cfg, 8)
        assert rec["key_length"] > 0
        if rec["reconciled"]:
            assert rec["keys_equal"]

    def test_above_threshold_refuses(self):
        cfg = QkdConfig(alphabet="bb84", p=0.12,
                        ec_bits_per_symbol=binary_entropy(0.12),
                        symbols=400)
        rec = run_qkd(cfg, 1)
        assert rec["refused"]

    def test_config_validation(self):
        with pytest.raises(InputError):
            QkdConfig(alphabet="haar")
        with pytest.raises(InputError):
            QkdConfig(p=0.2, ec_bits_per_symbol=0.1)

    def test_rate_formula(self):
        cfg = QkdConfig(alphabet="six-state", p=0.0,
                        ec_bits_per_symbol=3 / 7, memory_qubits=2,
                        margin_bits=0.5)
        m = 42
        want = int(math.floor(m * (2 / 3 - 3 / 7) - 2 - 0.5))
        assert key_length(cfg, m) == want


class TestRateBoundCheck:
    def test_trivial_eavesdropper(self):
        cfg = QkdConfig(alphabet="six-state", p=0.0, code=hamming_7_4(0.05),
                        margin_bits=0.5)
        rec = rate_bound_check(cfg, Eavesdropper("trivial"), 7, 3)
        assert rec["pass"] and rec["key_length"] >= 1

    def test_intercept_resend(self):
        cfg = QkdConfig(alphabet="six-state", p=0.0, code=hamming_7_4(0.05),
                        margin_bits=0.5)
        for basis in ("+", "x"):
            rec = rate_bound_check(
                cfg, Eavesdropper("intercept_resend", (basis,)), 7, 3)
            assert rec["pass"]

    def test_store_subset_rate_reduced(self):
        cfg0 = QkdConfig(alphabet="six-state", p=0.0,
                         ec_bits_per_symbol=0.0, margin_bits=0.5)
        cfg2 = QkdConfig(alphabet="six-state", p=0.0,
                         ec_bits_per_symbol=0.0, memory_qubits=2,
                         margin_bits=0.5)
        assert key_length(cfg2, 6) == key_length(cfg0, 6) - 2
        rec = rate_bound_check(cfg2, Eavesdropper("store_subset", (2,)),
                               6, 5)
        assert rec["pass"]

    def test_capacity(self):
        cfg = QkdConfig(ec_bits_per_symbol=0.0)
        with pytest.raises(CapacityError):
            rate_bound_check(cfg, Eavesdropper("trivial"), 11, 0)

    def test_stored_qubits_increase_distance(self):
        cfg = QkdConfig(alphabet="six-state", p=0.0,
                        ec_bits_per_symbol=0.0, margin_bits=0.5)
        base = rate_bound_check(cfg, Eavesdropper("trivial"), 5, 9)
        cfg_q = QkdConfig(alphabet="six-state", p=0.0,
                          ec_bits_per_symbol=0.0, memory_qubits=0,
                          margin_bits=0.5)
        spy = rate_bound_check(cfg_q, Eavesdropper("store_subset", (2,)),
                               5, 9)
        # same extraction length; holding qubits cannot shrink the distance
        assert spy["key_length"] == base["key_length"]
        assert spy["distance"] >= base["distance"] - 1e-12
