"""
Monte Carlo BER sweep over the sum mutual information.

Every channel realization is an independent work unit with its own RNG
streams derived from ``(seed, realization)`` for the channels and
``(seed, realization, point)`` for bits and noise. Results are reduced in
realization order, so the output does not depend on the worker count.
"""

import csv
import io
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import Modulation, complex_noise, sample_channel
from .constellation import by_name
from .designer import (ChannelSet, DeadStreamWarning, design_transceivers,
                       verify_design)
from .dfe import build_receiver, detect, linear_mmse_detect
from .errors import ConfigurationError

__all__ = ['SimConfig', 'BerRecord', 'SweepResult', 'run_sweep', 'emit_csv',
           'format_csv', 'read_csv', 'sample_channel_set', 'CSV_HEADER', 'RECEIVERS']

log = logging.getLogger(__name__)

RECEIVERS = ('dfe', 'dfe_genie', 'linear')
CSV_HEADER = ['info_bits', 'user', 'ber', 'ber_aggregate', 'mse_predicted',
              'mse_measured', 'power_total', 'receiver', 'realizations',
              'bits']


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one BER-versus-information sweep.

    ``channel_length`` counts taps, so the channel memory is
    ``channel_length - 1``.
    """
    streams: tuple = (16, 16)
    subcarriers: int = 32
    channel_length: int = 10
    modulation: str = 'dmt'
    info_start: float = 32.0
    info_stop: float = 128.0
    info_step: float = 32.0
    realizations: int = 100
    min_bits: int = 10 ** 6
    constellation: str = 'qpsk'
    receivers: tuple = ('dfe',)
    seed: int = 0
    user_order: tuple = ()
    # Drops the channel noise; the receivers keep their unit-noise filters.
    noiseless: bool = False
    allow_dead_streams: bool = False
    verify_tolerance: float = 1e-7
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'streams', tuple(int(n) for n in self.streams))
        object.__setattr__(self, 'receivers', tuple(self.receivers))
        object.__setattr__(self, 'user_order',
                           tuple(int(i) for i in self.user_order))
        self.validate()

    @property
    def users(self):
        return len(self.streams)

    def validate(self):
        if not self.streams or min(self.streams) < 1:
            raise ConfigurationError("every user needs N_k >= 1 streams")
        if self.realizations < 1:
            raise ConfigurationError("realizations must be >= 1")
        if self.min_bits < 1:
            raise ConfigurationError("min_bits must be >= 1")
        if self.subcarriers < 1 or self.channel_length < 1:
            raise ConfigurationError("subcarriers and channel_length must be "
                                     ">= 1")
        Modulation(self.modulation)
        by_name(self.constellation)
        bad = [r for r in self.receivers if r not in RECEIVERS]
        if bad or not self.receivers:
            raise ConfigurationError(f"receivers must be drawn from "
                                     f"{RECEIVERS}, got {self.receivers}")
        if self.user_order and sorted(self.user_order) != list(
                range(self.users)):
            raise ConfigurationError(f"user_order must permute "
                                     f"0..{self.users - 1}")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if not self.info_points():
            raise ConfigurationError("information sweep is empty")
        if min(self.info_points()) <= 0:
            raise ConfigurationError("sum information must be > 0 bits")

    def info_points(self):
        if self.info_step <= 0:
            return [float(self.info_start)] if (
                self.info_stop == self.info_start) else []
        count = math.floor((self.info_stop - self.info_start)
                           / self.info_step + 1e-9) + 1
        return [float(self.info_start + i * self.info_step)
                for i in range(max(count, 0))]

    def blocks_per_realization(self):
        bits_per_block = sum(self.streams) * by_name(
            self.constellation).bits_per_symbol
        return math.ceil(self.min_bits / (self.realizations * bits_per_block))


@dataclass(frozen=True)
class BerRecord:
    """One (sweep point, receiver) outcome; per-user fields are tuples."""
    info_bits: float
    receiver: str
    ber: tuple
    ber_aggregate: float
    mse_predicted: tuple
    mse_measured: tuple
    power_total: float
    realizations: int
    bits: tuple

    @property
    def bit_errors(self):
        return tuple(int(round(b * n)) for b, n in zip(self.ber, self.bits))

    @property
    def total_bits(self):
        return sum(self.bits)


@dataclass
class SweepResult:
    records: list
    verification: dict = field(default_factory=dict)

    def flagged(self, tolerance):
        return {k: v for k, v in self.verification.items() if v > tolerance}


def sample_channel_set(config, realization):
    """Channels of one realization, in design order."""
    rng = np.random.default_rng([config.seed, realization])
    mod = Modulation(config.modulation)
    chans = [sample_channel(rng, config.channel_length - 1,
                            config.subcarriers, mod).matrix()
             for _ in config.streams]
    cs = ChannelSet(chans)
    if config.user_order:
        cs = cs.permuted(config.user_order)
    return cs


def _streams(config):
    if config.user_order:
        return [config.streams[i] for i in config.user_order]
    return list(config.streams)


def _run_realization(config, realization):
    """Error counts for every (point, receiver, user) of one realization."""
    const = by_name(config.constellation)
    m = const.bits_per_symbol
    cs = sample_channel_set(config, realization)
    counts = _streams(config)
    K = len(counts)
    nblk = config.blocks_per_realization()
    out = []
    for p, info in enumerate(config.info_points()):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always', DeadStreamWarning)
            design = design_transceivers(cs, counts, info)
        dead = [w.message for w in caught
                if issubclass(w.category, DeadStreamWarning)]
        if dead and not config.allow_dead_streams:
            raise ConfigurationError(
                f"sum information {info:g} bits, realization {realization}: "
                f"{dead[0]}; raise the information or lower N_k")
        residuals = {r.name: abs(r.value)
                     for r in verify_design(design, cs,
                                            config.verify_tolerance)}
        rx = build_receiver(design, cs)

        rng = np.random.default_rng([config.seed, realization, p])
        bits = [rng.integers(0, 2, size=(n, nblk, m)) for n in counts]
        x = [const.modulate(b) for b in bits]
        y = sum(H @ T @ xk for H, T, xk in zip(cs.matrices, design.precoders,
                                               x))
        if not config.noiseless:
            y = y + complex_noise(rng, y.shape)

        predicted = np.array([np.sum(v) for v in rx.error_variances])
        point = {'power': design.total_power, 'residuals': residuals}
        for name in config.receivers:
            if name == 'linear':
                res = linear_mmse_detect(design, cs, y, const)
            else:
                res = detect(rx, design, cs, y, const,
                             genie_symbols=x if name == 'dfe_genie' else None)
            errors = np.array([np.sum(const.label_bits(res.labels[k])
                                      != bits[k]) for k in range(K)])
            sq = np.array([np.sum(np.abs(res.soft[k] - x[k]) ** 2)
                           for k in range(K)])
            point[name] = (errors, sq)
        point['predicted'] = predicted
        out.append(point)
    return out


def _unpermute(values, config):
    # Report per-user values by original user index.
    if not config.user_order:
        return list(values)
    out = [None] * len(values)
    for pos, user in enumerate(config.user_order):
        out[user] = values[pos]
    return out


def _chunk_worker(args):
    config, indices = args
    return [_run_realization(config, r) for r in indices]


def run_sweep(config):
    """
    Run the Monte Carlo sweep described by ``config``.

    Returns
    -------
    SweepResult
        ``records`` holds one ``BerRecord`` per (receiver, sweep point);
        ``verification`` maps each design residual name to its worst
        absolute value over all designs.
    """
    indices = list(range(config.realizations))
    if config.workers > 1:
        chunks = [indices[i::config.workers] for i in range(config.workers)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_chunk_worker,
                                  [(config, c) for c in chunks]))
        by_index = {}
        for chunk, part in zip(chunks, parts):
            by_index.update(zip(chunk, part))
        per_real = [by_index[i] for i in indices]
    else:
        per_real = [_run_realization(config, r) for r in indices]

    const = by_name(config.constellation)
    counts = _streams(config)
    nblk = config.blocks_per_realization()
    R = config.realizations
    user_bits = [n * nblk * const.bits_per_symbol * R for n in counts]
    user_syms = [n * nblk * R for n in counts]

    records, worst = [], {}
    for p, info in enumerate(config.info_points()):
        power = 0.0
        predicted = np.zeros(len(counts))
        for r in range(R):
            point = per_real[r][p]
            power += point['power']
            predicted += point['predicted']
            for name, v in point['residuals'].items():
                worst[name] = max(worst.get(name, 0.0), v)
        for name in config.receivers:
            errors = np.zeros(len(counts), dtype=np.int64)
            sq = np.zeros(len(counts))
            for r in range(R):
                e, s = per_real[r][p][name]
                errors += e
                sq += s
            ber = [int(e) / b for e, b in zip(errors, user_bits)]
            records.append(BerRecord(
                info_bits=info, receiver=name,
                ber=tuple(_unpermute(ber, config)),
                ber_aggregate=int(errors.sum()) / sum(user_bits),
                mse_predicted=tuple(_unpermute(
                    [float(v) for v in predicted / (np.array(counts) * R)],
                    config)),
                mse_measured=tuple(_unpermute(
                    [float(v) for v in sq / np.array(user_syms)], config)),
                power_total=power / R,
                realizations=R,
                bits=tuple(_unpermute(user_bits, config))))
        log.info("I=%g bits done", info)
    return SweepResult(records=records, verification=worst)


def _fmt(x):
    return format(float(x), '.16e')


def format_csv(records):
    """CSV text with rows sorted by (receiver, info_bits, user)."""
    if not records:
        raise ConfigurationError("no records to write")
    rows = []
    for rec in records:
        for k in range(len(rec.ber)):
            rows.append(((rec.receiver, rec.info_bits, k + 1), [
                _fmt(rec.info_bits), k + 1, _fmt(rec.ber[k]),
                _fmt(rec.ber_aggregate), _fmt(rec.mse_predicted[k]),
                _fmt(rec.mse_measured[k]), _fmt(rec.power_total),
                rec.receiver, rec.realizations, rec.bits[k]]))
    rows.sort(key=lambda r: r[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    writer.writerows(row for _, row in rows)
    return buf.getvalue()


def emit_csv(records, path):
    """Write :func:`format_csv` output; nothing is created on error."""
    text = format_csv(records)
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise OSError(f"output directory {directory} does not exist")
    with open(path, 'w', newline='') as fh:
        fh.write(text)


def read_csv(path):
    """Parse a file written by :func:`emit_csv` back into records."""
    groups = {}
    with open(path, newline='') as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ConfigurationError(f"unexpected CSV header "
                                     f"{reader.fieldnames}")
        for row in reader:
            key = (row['receiver'], float(row['info_bits']))
            groups.setdefault(key, []).append(row)
    records = []
    for (receiver, info), rows in groups.items():
        rows.sort(key=lambda r: int(r['user']))
        first = rows[0]
        records.append(BerRecord(
            info_bits=info, receiver=receiver,
            ber=tuple(float(r['ber']) for r in rows),
            ber_aggregate=float(first['ber_aggregate']),
            mse_predicted=tuple(float(r['mse_predicted']) for r in rows),
            mse_measured=tuple(float(r['mse_measured']) for r in rows),
            power_total=float(first['power_total']),
            realizations=int(first['realizations']),
            bits=tuple(int(r['bits']) for r in rows)))
    return records
