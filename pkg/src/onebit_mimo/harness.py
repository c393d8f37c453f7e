"""Monte Carlo BER experiment driver.

Each coherence block draws a fresh Rayleigh channel, runs the pilot /
parameter-update / data phases, and evaluates every enabled detector on the
identical observations, so the comparison is paired. Blocks are independent
work units keyed by (seed, block index): results are bit-identical no matter
how many workers execute them.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .channel import (
    build_psk_constellation,
    draw_rayleigh_channel,
    modulate_all_classes,
    realify,
    transmit_block,
    true_code_and_epsilons,
)
from .detectors import LabeledSet, ml_detect_batch, pilot_labels, sl_estimate
from .numerics import ConfigurationError, RngStream
from .ssl_em import EmConfig, ObservedData, run_em

DETECTOR_SL = "SL"
DETECTOR_SSL = "SSL"
DETECTOR_MLD = "MLD-CSIR"
ALL_DETECTORS = (DETECTOR_SL, DETECTOR_SSL, DETECTOR_MLD)

NOISE_CONVENTIONS = {
    "complex-unit": 1.0 / np.sqrt(2.0),  # CN(0,1) noise: each real part has var 1/2
    "literal-eq8": 1.0,
}

CSV_COLUMNS = (
    "snr_db",
    "detector",
    "T",
    "blocks",
    "total_bits",
    "bit_errors",
    "ber",
    "mean_em_iterations",
    "wall_seconds",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One BER sweep: a fixed pilot length over a list of SNR points."""

    num_users: int = 2
    num_rx_antennas: int = 4
    mod_order: int = 4
    snr_db_list: tuple = (0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0)
    pilots_per_class: int = 1
    tu_factor: float = 10.0
    data_slots: int = 512
    blocks: int = 1000
    seed: int = 0
    detectors: tuple = ALL_DETECTORS
    em: EmConfig = EmConfig()
    noise_convention: str = "complex-unit"
    class_cap: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "snr_db_list", tuple(float(s) for s in self.snr_db_list))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if min(self.num_users, self.num_rx_antennas, self.pilots_per_class,
               self.data_slots, self.blocks) < 1:
            raise ConfigurationError("all counts must be positive")
        if self.mod_order not in (2, 4):
            raise ConfigurationError("mod_order must be 2 (BPSK) or 4 (QPSK)")
        if not self.snr_db_list:
            raise ConfigurationError("snr_db_list must be non-empty")
        if self.tu_factor < 0:
            raise ConfigurationError("tu_factor must be non-negative")
        unknown = set(self.detectors) - set(ALL_DETECTORS)
        if unknown or not self.detectors:
            raise ConfigurationError(
                f"detectors must be a non-empty subset of {ALL_DETECTORS}"
            )
        if self.noise_convention not in NOISE_CONVENTIONS:
            raise ConfigurationError(
                f"noise_convention must be one of {sorted(NOISE_CONVENTIONS)}"
            )
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigurationError("seed must fit in 64 bits")
        if self.num_classes > self.class_cap:
            raise ConfigurationError(
                f"{self.num_classes} classes exceed the cap of {self.class_cap}"
            )

    @property
    def num_classes(self):
        return self.mod_order**self.num_users

    @property
    def training_slots(self):
        """T_t = T * m**K pilot slots."""
        return self.pilots_per_class * self.num_classes

    @property
    def update_slots(self):
        """T_u, the unlabeled window length used for the EM refinement."""
        return int(round(self.tu_factor * self.training_slots))

    @property
    def noise_std(self):
        return NOISE_CONVENTIONS[self.noise_convention]


@dataclass(frozen=True)
class BerRecord:
    """Aggregated bit-error statistics for one (snr, detector, T) cell."""

    snr_db: float
    detector: str
    T: int
    blocks: int
    total_bits: int
    bit_errors: int
    ber: float
    mean_em_iterations: float | None
    wall_seconds: float


@dataclass
class BlockCounts:
    """Raw per-block tallies, exactly summable across blocks in any order."""

    bit_errors: dict
    detector_seconds: dict
    total_bits: int = 0
    em_iterations: int = 0

    def add(self, other):
        for name, errs in other.bit_errors.items():
            self.bit_errors[name] = self.bit_errors.get(name, 0) + errs
            self.detector_seconds[name] = (
                self.detector_seconds.get(name, 0.0) + other.detector_seconds[name]
            )
        self.total_bits += other.total_bits
        self.em_iterations += other.em_iterations


def count_bit_errors(true_classes, detected_classes):
    """Bit mismatches between class indices under the natural binary map.

    Valid because mod_order is a power of two: the binary expansion of a class
    index is the concatenation of its per-user digit bit patterns, so the
    per-bit mismatch count is the popcount of the index XOR.
    """
    a = np.asarray(true_classes, dtype=np.uint64)
    b = np.asarray(detected_classes, dtype=np.uint64)
    return int(np.bitwise_count(a ^ b).sum())


def run_coherence_block(config, snr_db, block_index):
    """Simulate one coherence block at one SNR and score every detector.

    All detectors see the same channel, messages, and noise; errors are
    counted over the T_u + T_d non-pilot slots against the true messages.
    """
    stream = RngStream(config.seed, block_index)
    constellation = build_psk_constellation(config.mod_order, 10.0 ** (snr_db / 10.0))
    H = realify(draw_rayleigh_channel(config.num_users, config.num_rx_antennas, stream))
    noise_std = config.noise_std
    J = config.num_classes
    T_t, T_u, T_d = config.training_slots, config.update_slots, config.data_slots
    codebook = modulate_all_classes(constellation, config.num_users)  # (2K, J)

    labels = pilot_labels(config.pilots_per_class, J)
    pilot_bits = transmit_block(H, codebook[:, labels], noise_std, stream)
    update_msgs = stream.integers(J, T_u)
    update_bits = transmit_block(H, codebook[:, update_msgs], noise_std, stream)
    data_msgs = stream.integers(J, T_d)
    data_bits = transmit_block(H, codebook[:, data_msgs], noise_std, stream)

    labeled = LabeledSet(
        observations=pilot_bits,
        labels=labels,
        pilots_per_class=config.pilots_per_class,
        mod_order=config.mod_order,
        num_users=config.num_users,
    )
    true_msgs = np.concatenate([update_msgs, data_msgs])
    nonpilot_bits = np.vstack([update_bits, data_bits])

    counts = BlockCounts(
        bit_errors={},
        detector_seconds={},
        total_bits=(T_u + T_d) * config.num_users * int(np.log2(config.mod_order)),
    )

    if DETECTOR_SL in config.detectors:
        t0 = time.perf_counter()
        params = sl_estimate(labeled, config.em.eps_min)
        detected = ml_detect_batch(nonpilot_bits, params)
        counts.bit_errors[DETECTOR_SL] = count_bit_errors(true_msgs, detected)
        counts.detector_seconds[DETECTOR_SL] = time.perf_counter() - t0

    if DETECTOR_SSL in config.detectors:
        t0 = time.perf_counter()
        params, gamma, trace = run_em(ObservedData(labeled, update_bits), config.em)
        window = np.argmax(gamma.gamma[T_t:], axis=1)
        detected = np.concatenate([window, ml_detect_batch(data_bits, params)])
        counts.bit_errors[DETECTOR_SSL] = count_bit_errors(true_msgs, detected)
        counts.detector_seconds[DETECTOR_SSL] = time.perf_counter() - t0
        counts.em_iterations = trace.iterations_run

    if DETECTOR_MLD in config.detectors:
        t0 = time.perf_counter()
        params = true_code_and_epsilons(
            H, constellation, config.num_users, noise_std, config.class_cap
        )
        detected = ml_detect_batch(nonpilot_bits, params)
        counts.bit_errors[DETECTOR_MLD] = count_bit_errors(true_msgs, detected)
        counts.detector_seconds[DETECTOR_MLD] = time.perf_counter() - t0

    return counts


def _run_block_range(config, snr_db, start, stop):
    total = BlockCounts(bit_errors={}, detector_seconds={})
    for block_index in range(start, stop):
        total.add(run_coherence_block(config, snr_db, block_index))
    return total


def _block_ranges(blocks, chunks):
    edges = np.linspace(0, blocks, chunks + 1).astype(int)
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_experiment(config, workers=1):
    """Run every (snr, detector) cell of the configured sweep.

    Blocks are distributed over ``workers`` processes; per-block tallies are
    integers, so the aggregate is independent of scheduling and worker count.
    Returns one BerRecord per (snr, detector) in configuration order.
    """
    if workers < 1:
        raise ConfigurationError("workers must be at least 1")
    per_snr = {}
    if workers == 1:
        for snr_db in config.snr_db_list:
            per_snr[snr_db] = _run_block_range(config, snr_db, 0, config.blocks)
    else:
        tasks = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for snr_db in config.snr_db_list:
                for start, stop in _block_ranges(config.blocks, 4 * workers):
                    tasks.append(
                        (snr_db, pool.submit(_run_block_range, config, snr_db, start, stop))
                    )
            for snr_db, future in tasks:
                chunk = future.result()
                if snr_db in per_snr:
                    per_snr[snr_db].add(chunk)
                else:
                    per_snr[snr_db] = chunk

    records = []
    for snr_db in config.snr_db_list:
        counts = per_snr[snr_db]
        for name in config.detectors:
            errors = counts.bit_errors[name]
            mean_iters = (
                counts.em_iterations / config.blocks if name == DETECTOR_SSL else None
            )
            records.append(
                BerRecord(
                    snr_db=snr_db,
                    detector=name,
                    T=config.pilots_per_class,
                    blocks=config.blocks,
                    total_bits=counts.total_bits,
                    bit_errors=errors,
                    ber=errors / counts.total_bits,
                    mean_em_iterations=mean_iters,
                    wall_seconds=counts.detector_seconds[name],
                )
            )
    return records


def sweep_pilot_lengths(config, pilot_lengths, workers=1):
    """Run the experiment once per pilot length and concatenate the records."""
    records = []
    for T in pilot_lengths:
        records.extend(run_experiment(replace(config, pilots_per_class=T), workers))
    return records


def _record_to_row(record):
    row = []
    for name in CSV_COLUMNS:
        value = getattr(record, name)
        row.append("" if value is None else str(value))
    return row


def write_results(records, path, format="csv", config=None):
    """Write BER records as CSV or JSON.

    The CSV carries a comment-prefixed metadata line recording the full
    configuration and seed, then one row per record in the fixed column
    order; JSON mirrors the same field names.
    """
    if format not in ("csv", "json"):
        raise ConfigurationError(f"unknown output format {format!r}")
    meta = {}
    if config is not None:
        meta["config"] = config if isinstance(config, dict) else asdict(config)
    try:
        if format == "csv":
            buf = io.StringIO()
            if meta:
                buf.write("# config: " + json.dumps(meta["config"], sort_keys=True) + "\n")
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for record in records:
                writer.writerow(_record_to_row(record))
            payload = buf.getvalue()
        else:
            body = dict(meta)
            body["records"] = [asdict(r) for r in records]
            payload = json.dumps(body, indent=2, sort_keys=True) + "\n"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results(path):
    """Parse a results file written by :func:`write_results` back into records."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        rows = json.loads(text)["records"]
        return [BerRecord(**row) for row in rows]
    records = []
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    for row in csv.DictReader(lines):
        records.append(
            BerRecord(
                snr_db=float(row["snr_db"]),
                detector=row["detector"],
                T=int(row["T"]),
                blocks=int(row["blocks"]),
                total_bits=int(row["total_bits"]),
                bit_errors=int(row["bit_errors"]),
                ber=float(row["ber"]),
                mean_em_iterations=(
                    float(row["mean_em_iterations"]) if row["mean_em_iterations"] else None
                ),
                wall_seconds=float(row["wall_seconds"]),
            )
        )
    return records
