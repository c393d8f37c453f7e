"""Tests of the Monte Carlo driver: pairing, determinism, aggregation, I/O."""

import numpy as np
import pytest

from onebit_mimo.harness import (
    BerRecord,
    ExperimentConfig,
    count_bit_errors,
    read_results,
    run_coherence_block,
    run_experiment,
    sweep_pilot_lengths,
    write_results,
)
from onebit_mimo.numerics import ConfigurationError


def small_config(**overrides):
    base = dict(
        num_users=2,
        num_rx_antennas=4,
        mod_order=4,
        snr_db_list=(5.0,),
        pilots_per_class=1,
        tu_factor=10.0,
        data_slots=64,
        blocks=8,
        seed=99,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_defaults_valid(self):
        cfg = ExperimentConfig()
        assert cfg.training_slots == 16 and cfg.update_slots == 160

    @pytest.mark.parametrize(
        "overrides",
        [
            dict(mod_order=8),
            dict(snr_db_list=()),
            dict(blocks=0),
            dict(detectors=("SL", "bogus")),
            dict(detectors=()),
            dict(noise_convention="unit"),
            dict(tu_factor=-1.0),
            dict(num_users=7),  # 4**7 classes exceed the cap
        ],
    )
    def test_rejects_bad_configs(self, overrides):
        with pytest.raises(ConfigurationError):
            small_config(**overrides)

    def test_noise_conventions(self):
        assert small_config().noise_std == pytest.approx(1 / np.sqrt(2))
        assert small_config(noise_convention="literal-eq8").noise_std == 1.0


class TestCountBitErrors:
    def test_hand_cases(self):
        # m=4, K=2: classes 5 = digits (1,1) and 6 = digits (2,1)
        assert count_bit_errors([5], [5]) == 0
        assert count_bit_errors([5], [6]) == 2  # 0b0101 vs 0b0110
        assert count_bit_errors([0], [15]) == 4
        assert count_bit_errors([0, 1], [1, 1]) == 1

    def test_matches_digitwise_popcount(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 16, 50)
        b = rng.integers(0, 16, 50)
        want = sum(bin(int(x) ^ int(y)).count("1") for x, y in zip(a, b))
        assert count_bit_errors(a, b) == want


class TestRunCoherenceBlock:
    def test_deterministic_given_seed_and_index(self):
        cfg = small_config()
        a = run_coherence_block(cfg, 5.0, 3)
        b = run_coherence_block(cfg, 5.0, 3)
        assert a.bit_errors == b.bit_errors
        assert a.em_iterations == b.em_iterations

    def test_distinct_blocks_differ(self):
        cfg = small_config(data_slots=256)
        a = run_coherence_block(cfg, 5.0, 0)
        b = run_coherence_block(cfg, 5.0, 1)
        assert a.bit_errors != b.bit_errors

    def test_effectively_noiseless_snr_gives_zero_errors(self):
        cfg = small_config(snr_db_list=(200.0,))
        counts = run_coherence_block(cfg, 200.0, 0)
        assert all(v == 0 for v in counts.bit_errors.values())

    def test_total_bits_accounting(self):
        cfg = small_config()
        counts = run_coherence_block(cfg, 5.0, 0)
        assert counts.total_bits == (cfg.update_slots + cfg.data_slots) * 2 * 2

    def test_detector_subset(self):
        cfg = small_config(detectors=("SL",))
        counts = run_coherence_block(cfg, 5.0, 0)
        assert set(counts.bit_errors) == {"SL"}

    def test_genie_beats_sl_on_average(self):
        cfg = small_config(blocks=60, data_slots=128, detectors=("SL", "MLD-CSIR"))
        totals = {"SL": 0, "MLD-CSIR": 0}
        for b in range(cfg.blocks):
            counts = run_coherence_block(cfg, 5.0, b)
            for k in totals:
                totals[k] += counts.bit_errors[k]
        assert totals["MLD-CSIR"] < totals["SL"]


class TestRunExperiment:
    def test_single_block_matches_block_run(self):
        cfg = small_config(blocks=1)
        records = run_experiment(cfg)
        counts = run_coherence_block(cfg, 5.0, 0)
        by_name = {r.detector: r for r in records}
        for name, errs in counts.bit_errors.items():
            assert by_name[name].bit_errors == errs
            assert by_name[name].total_bits == counts.total_bits

    def test_record_layout(self):
        cfg = small_config(snr_db_list=(0.0, 5.0))
        records = run_experiment(cfg)
        assert [r.snr_db for r in records] == [0.0] * 3 + [5.0] * 3
        for r in records:
            assert r.ber == r.bit_errors / r.total_bits
            assert (r.mean_em_iterations is not None) == (r.detector == "SSL")

    def test_doubling_blocks_is_consistent(self):
        # pooled BER stays within 4 binomial std of each half
        half_a = run_experiment(small_config(blocks=40, detectors=("SL",)))[0]
        full = run_experiment(small_config(blocks=80, detectors=("SL",)))[0]
        sd = np.sqrt(full.ber * (1 - full.ber) / half_a.total_bits)
        assert abs(half_a.ber - full.ber) <= 4 * sd

    def test_ber_monotone_in_snr(self):
        cfg = small_config(
            blocks=40, snr_db_list=(0.0, 5.0, 10.0), detectors=("MLD-CSIR",)
        )
        records = run_experiment(cfg, workers=2)
        bers = [r.ber for r in records]
        for lo, hi in zip(bers[1:], bers[:-1]):
            sd = np.sqrt(
                lo * (1 - lo) / records[0].total_bits
                + hi * (1 - hi) / records[0].total_bits
            )
            assert lo <= hi + 3 * sd

    def test_worker_count_invariance(self):
        cfg = small_config(blocks=10, snr_db_list=(2.5,))
        strip = lambda rs: [
            (r.snr_db, r.detector, r.T, r.blocks, r.total_bits, r.bit_errors, r.ber,
             r.mean_em_iterations)
            for r in rs
        ]
        assert strip(run_experiment(cfg, workers=1)) == strip(
            run_experiment(cfg, workers=2)
        )

    def test_sweep_concatenates_pilot_lengths(self):
        cfg = small_config(blocks=2)
        records = sweep_pilot_lengths(cfg, (1, 2))
        assert sorted({r.T for r in records}) == [1, 2]


class TestResultsIo:
    def _records(self):
        cfg = small_config(blocks=3)
        return cfg, run_experiment(cfg)

    def test_csv_round_trip(self, tmp_path):
        cfg, records = self._records()
        path = tmp_path / "out.csv"
        write_results(records, path, format="csv", config=cfg)
        assert read_results(path) == records

    def test_json_round_trip(self, tmp_path):
        cfg, records = self._records()
        path = tmp_path / "out.json"
        write_results(records, path, format="json", config=cfg)
        assert read_results(path) == records

    def test_csv_layout(self, tmp_path):
        cfg, records = self._records()
        path = tmp_path / "out.csv"
        write_results(records, path, format="csv", config=cfg)
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        assert lines[0].startswith("# config:")
        assert f'"seed": {cfg.seed}' in lines[0]
        assert lines[1] == (
            "snr_db,detector,T,blocks,total_bits,bit_errors,ber,"
            "mean_em_iterations,wall_seconds"
        )
        assert "\r" not in text
        # non-SSL rows leave the iteration field empty
        sl_row = next(ln for ln in lines if ",SL," in ln)
        assert sl_row.split(",")[7] == ""

    def test_ber_full_precision(self, tmp_path):
        record = BerRecord(0.0, "SL", 1, 7, 999983, 123457, 123457 / 999983, None, 0.5)
        path = tmp_path / "one.csv"
        write_results([record], path)
        got = read_results(path)[0]
        assert got.ber == record.ber

    def test_empty_records(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_results([], path, config=small_config())
        assert read_results(path) == []
        assert path.read_text().count("\n") == 2  # metadata + header only

    def test_write_failure_names_path(self, tmp_path):
        with pytest.raises(OSError, match="no/such/dir"):
            write_results([], str(tmp_path / "no/such/dir/out.csv"))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigurationError):
            write_results([], tmp_path / "x.txt", format="tsv")
