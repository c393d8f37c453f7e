"""Command-line front end for the Monte Carlo harness.

``simulate`` runs the configured BER sweep and writes CSV/JSON records;
``estimate`` dumps estimated vs. true per-class parameters for a single
coherence block as a diagnostic CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict

import numpy as np

from .channel import (
    build_psk_constellation,
    draw_rayleigh_channel,
    realify,
    transmit_block,
    modulate_all_classes,
    true_code_and_epsilons,
)
from .detectors import LabeledSet, pilot_labels, sl_estimate
from .harness import ExperimentConfig, sweep_pilot_lengths, write_results
from .numerics import ConfigurationError, RngStream
from .ssl_em import EmConfig, ObservedData, run_em


def _comma_floats(text):
    return tuple(float(s) for s in text.split(",") if s.strip())


def _comma_ints(text):
    return tuple(int(s) for s in text.split(",") if s.strip())


def _comma_names(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _add_common_flags(parser):
    parser.add_argument("--users", type=int, default=2, help="number of users K")
    parser.add_argument("--rx-antennas", type=int, default=4, help="receive antennas")
    parser.add_argument("--mod-order", type=int, default=4, help="constellation size (2 or 4)")
    parser.add_argument("--tu-factor", type=float, default=10.0,
                        help="unlabeled window length as a multiple of the pilot count")
    parser.add_argument("--data-slots", type=int, default=512, help="data slots per block")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--em-tol", type=float, default=1e-4,
                        help="log-likelihood improvement stopping threshold (nats)")
    parser.add_argument("--em-max-iters", type=int, default=50)
    parser.add_argument("--eps-min", type=float, default=1e-4,
                        help="clamp for estimated crossover probabilities")
    parser.add_argument("--noise-convention", choices=("complex-unit", "literal-eq8"),
                        default="complex-unit")
    parser.add_argument("--out", required=True, help="output file path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="onebit-mimo",
        description="Link-level BER simulation for one-bit-quantized uplink MU-MIMO",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a BER sweep")
    _add_common_flags(sim)
    sim.add_argument("--snr-db", type=_comma_floats, default=(0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0),
                     help="comma-separated SNR grid in dB")
    sim.add_argument("--pilots-per-class", type=_comma_ints, default=(1, 2, 4),
                     help="comma-separated pilot lengths T")
    sim.add_argument("--blocks", type=int, default=1000, help="coherence blocks per cell")
    sim.add_argument("--detectors", type=_comma_names, default=("SL", "SSL", "MLD-CSIR"))
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    est = sub.add_parser("estimate", help="dump estimated vs. true parameters for one block")
    _add_common_flags(est)
    est.add_argument("--snr-db", type=float, default=5.0, help="single SNR point in dB")
    est.add_argument("--pilots-per-class", type=int, default=1, help="pilot length T")
    est.add_argument("--block-index", type=int, default=0)
    return parser


def _config_from_args(args, pilots_per_class, snr_db_list, blocks=1, detectors=("SL",)):
    return ExperimentConfig(
        num_users=args.users,
        num_rx_antennas=args.rx_antennas,
        mod_order=args.mod_order,
        snr_db_list=snr_db_list,
        pilots_per_class=pilots_per_class,
        tu_factor=args.tu_factor,
        data_slots=args.data_slots,
        blocks=blocks,
        seed=args.seed,
        detectors=detectors,
        em=EmConfig(stop_tol=args.em_tol, max_iters=args.em_max_iters, eps_min=args.eps_min),
        noise_convention=args.noise_convention,
    )


def run_simulate(args):
    config = _config_from_args(
        args,
        pilots_per_class=args.pilots_per_class[0],
        snr_db_list=args.snr_db,
        blocks=args.blocks,
        detectors=args.detectors,
    )
    records = sweep_pilot_lengths(config, args.pilots_per_class, workers=args.workers)
    meta = dict(asdict(config), pilots_per_class=list(args.pilots_per_class))
    write_results(records, args.out, format=args.format, config=meta)
    return 0


def run_estimate(args):
    config = _config_from_args(
        args, pilots_per_class=args.pilots_per_class, snr_db_list=(args.snr_db,)
    )
    stream = RngStream(config.seed, args.block_index)
    constellation = build_psk_constellation(config.mod_order, 10.0 ** (args.snr_db / 10.0))
    H = realify(draw_rayleigh_channel(config.num_users, config.num_rx_antennas, stream))
    codebook = modulate_all_classes(constellation, config.num_users)
    labels = pilot_labels(config.pilots_per_class, config.num_classes)
    pilot_bits = transmit_block(H, codebook[:, labels], config.noise_std, stream)
    update_msgs = stream.integers(config.num_classes, config.update_slots)
    update_bits = transmit_block(H, codebook[:, update_msgs], config.noise_std, stream)

    labeled = LabeledSet(
        observations=pilot_bits,
        labels=labels,
        pilots_per_class=config.pilots_per_class,
        mod_order=config.mod_order,
        num_users=config.num_users,
    )
    true_params = true_code_and_epsilons(
        H, constellation, config.num_users, config.noise_std, config.class_cap
    )
    sl_params = sl_estimate(labeled, config.em.eps_min)
    ssl_params, _, _ = run_em(ObservedData(labeled, update_bits), config.em)

    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# config: " + json.dumps(asdict(config), sort_keys=True) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["class", "component", "code_true", "eps_true",
                 "code_sl", "eps_sl", "code_ssl", "eps_ssl"]
            )
            for j in range(config.num_classes):
                for n in range(2 * config.num_rx_antennas):
                    writer.writerow(
                        [j, n,
                         int(true_params.codewords[n, j]), true_params.epsilons[n, j],
                         int(sl_params.codewords[n, j]), sl_params.epsilons[n, j],
                         int(ssl_params.codewords[n, j]), ssl_params.epsilons[n, j]]
                    )
    except OSError as exc:
        raise OSError(f"cannot write estimates to {args.out}: {exc}") from exc
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return run_simulate(args)
        return run_estimate(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
