"""Shared helpers for the experiment scripts."""

import argparse
import os

from mimodfe.sim import SimConfig, emit_csv, run_sweep


def parser(description, realizations=100, min_bits=10 ** 6):
    p = argparse.ArgumentParser(description=description)
    p.add_argument('--realizations', type=int, default=realizations)
    p.add_argument('--min-bits', type=int, default=min_bits)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out-dir', default='results')
    return p


def sweep_to_csv(args, name, **kwargs):
    """Run one sweep, write ``<out-dir>/<name>.csv`` and print a summary."""
    cfg = SimConfig(realizations=args.realizations, min_bits=args.min_bits,
                    workers=args.workers, seed=args.seed,
                    allow_dead_streams=True, **kwargs)
    result = run_sweep(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f'{name}.csv')
    emit_csv(result.records, path)
    print(f"{name}: N_k={cfg.streams} -> {path}")
    for rec in sorted(result.records, key=lambda r: (r.receiver, r.info_bits)):
        print(f"  {rec.receiver:<10} I={rec.info_bits:6.1f}  "
              f"BER={rec.ber_aggregate:.3e}  power={rec.power_total:.3e}")
    worst = max(result.verification.values())
    print(f"  worst design residual {worst:.2e}")
    return result
