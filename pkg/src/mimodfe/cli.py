"""Command line entry point: ``mimodfe {design,sweep,verify}``."""

import argparse
import configparser
import dataclasses
import logging
import sys
import warnings

import numpy as np

from .channels import Modulation, dmt_matrix, read_taps_file, toeplitz_matrix
from .designer import (ChannelSet, DeadStreamWarning, DesignResult,
                       design_transceivers, verify_design)
from .errors import ConfigurationError
from .sim import (RECEIVERS, SimConfig, emit_csv, format_csv, run_sweep,
                  sample_channel_set)

log = logging.getLogger('mimodfe')

CONFIG_KEYS = {f.name: f for f in dataclasses.fields(SimConfig)}
# Flag spellings that differ from the SimConfig field names.
ALIASES = {'order': 'user_order'}


def _int_list(text):
    return tuple(int(v) for v in str(text).replace(' ', '').split(',') if v)


def _str_list(text):
    return tuple(v for v in str(text).replace(' ', '').split(',') if v)


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def _coerce(name, value):
    default = CONFIG_KEYS[name].default
    if name in ('streams', 'user_order'):
        return _int_list(value)
    if name == 'receivers':
        return _str_list(value)
    if isinstance(default, bool):
        return _bool(value)
    if isinstance(default, int):
        return int(float(value))
    if isinstance(default, float):
        return float(value)
    return str(value)


def load_config_file(path):
    """Read flat ``key = value`` lines (``#`` comments) into config values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=('#',))
    with open(path) as fh:
        parser.read_string('[config]\n' + fh.read(), source=path)
    out = {}
    for key, value in parser['config'].items():
        name = key.replace('-', '_')
        name = ALIASES.get(name, name)
        if name == 'users':
            out['users'] = int(value)
            continue
        if name not in CONFIG_KEYS:
            raise ConfigurationError(f"{path}: unknown key {key!r}")
        out[name] = _coerce(name, value)
    return out


def _add_system_flags(p):
    p.add_argument('--config', help="flat key = value file; keys are the "
                   "long flag names (dashes or underscores); flags override")
    p.add_argument('--users', type=int, help="number of users K")
    p.add_argument('--streams', type=_int_list,
                   help="comma separated streams per user, e.g. 16,16")
    p.add_argument('--subcarriers', type=int, help="block size M (default 32)")
    p.add_argument('--channel-length', type=int,
                   help="taps per channel (default 10)")
    p.add_argument('--modulation', choices=[m.value for m in Modulation])
    p.add_argument('--order', type=_int_list,
                   help="design order as a permutation of 0-based user "
                   "indices (default natural order)")
    p.add_argument('--seed', type=int, help="master seed (default 0)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog='mimodfe',
        description="Joint MMSE-DFE transceiver design for multiple-access "
                    "ISI channels under a sum mutual information budget.")
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('design', help="one design plus verification report")
    _add_system_flags(p)
    p.add_argument('--info', type=float, required=True,
                   help="sum mutual information in bits")
    p.add_argument('--channel-file',
                   help="taps per user, one 're im' per line, users "
                   "separated by blank lines (default: seeded channels)")
    p.add_argument('--realization', type=int, default=0,
                   help="seeded realization index (default 0)")
    p.add_argument('--tolerance', type=float, default=1e-7)
    p.add_argument('--save', help="write the design to this .npz file")

    p = sub.add_parser('sweep', help="Monte Carlo BER sweep, CSV output")
    _add_system_flags(p)
    p.add_argument('--info-start', type=float)
    p.add_argument('--info-stop', type=float)
    p.add_argument('--info-step', type=float)
    p.add_argument('--realizations', type=int)
    p.add_argument('--min-bits', type=int,
                   help="minimum bits per sweep point (default 1e6)")
    p.add_argument('--constellation', help="qpsk (default) or 16qam, 64qam")
    p.add_argument('--receivers', type=_str_list,
                   help=f"comma separated subset of {','.join(RECEIVERS)}")
    p.add_argument('--workers', type=int, help="worker processes")
    p.add_argument('--noiseless', action='store_const', const=True,
                   help="debug mode without noise")
    p.add_argument('--allow-dead-streams', action='store_const', const=True,
                   help="accept designs with zero-power eigenmodes")
    p.add_argument('--out', required=False, help="CSV output path")

    p = sub.add_parser('verify', help="re-check a design saved by 'design'")
    p.add_argument('path')
    p.add_argument('--tolerance', type=float, default=1e-7)
    return parser


def resolve_config(args, **extra):
    """Merge SimConfig defaults, the ``--config`` file and explicit flags."""
    values = {}
    if getattr(args, 'config', None):
        values.update(load_config_file(args.config))
    for name in list(CONFIG_KEYS) + ['users', 'order']:
        flag = getattr(args, name, None)
        if flag is not None:
            values[ALIASES.get(name, name)] = flag
    values.update(extra)
    users = values.pop('users', None)
    if users and 'streams' not in values:
        M = values.get('subcarriers', CONFIG_KEYS['subcarriers'].default)
        values['streams'] = (M // users,) * users
    if users is not None and len(values['streams']) != users:
        raise ConfigurationError(f"--users {users} does not match "
                                 f"--streams {values['streams']}")
    return SimConfig(**values)


def _channels_from_file(config, path):
    mats = []
    for taps in read_taps_file(path):
        if Modulation(config.modulation) is Modulation.DMT:
            mats.append(dmt_matrix(taps, config.subcarriers))
        else:
            mats.append(toeplitz_matrix(taps, config.subcarriers))
    cs = ChannelSet(mats)
    if config.user_order:
        cs = cs.permuted(config.user_order)
    return cs


def print_report(residuals, out=None):
    out = out or sys.stdout
    width = max(len(r.name) for r in residuals)
    for r in residuals:
        flag = 'ok' if r.ok else 'FAIL'
        print(f"  {r.name:<{width}}  {r.value: .3e}  {flag}", file=out)


def cmd_design(args):
    # Stream counts only need to be consistent here, not the sweep keys.
    config = resolve_config(args, info_start=args.info, info_stop=args.info,
                            info_step=1.0)
    if args.channel_file:
        cs = _channels_from_file(config, args.channel_file)
    else:
        cs = sample_channel_set(config, args.realization)
    if cs.num_users != config.users:
        raise ConfigurationError(f"{cs.num_users} channels for "
                                 f"{config.users} stream counts")
    streams = ([config.streams[i] for i in config.user_order]
               if config.user_order else list(config.streams))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', DeadStreamWarning)
        result = design_transceivers(cs, streams, args.info)
    for w in caught:
        print(f"warning: {w.message}")

    print(f"sum information {args.info:g} bits, N = {result.total_streams}, "
          f"MSE bound {result.mse_bound:.6e}")
    for k, u in enumerate(result.users):
        print(f"user {k + 1}: N_k={u.streams} active={u.active_rank} "
              f"I_k={u.information:.6f} bits power={u.power:.6e}")
    print(f"total power {result.total_power:.6e}")
    residuals = verify_design(result, cs, args.tolerance)
    print("verification:")
    print_report(residuals)
    if args.save:
        save_design(args.save, result, cs)
    return 0 if all(r.ok for r in residuals) else 1


def save_design(path, result, channels):
    arrays = {'sum_information': np.array(result.sum_information),
              'num_users': np.array(channels.num_users)}
    for k, (H, T) in enumerate(zip(channels.matrices, result.precoders)):
        arrays[f'channel_{k}'] = H
        arrays[f'precoder_{k}'] = T
    np.savez(path, **arrays)


def load_design(path):
    with np.load(path) as data:
        K = int(data['num_users'])
        channels = ChannelSet([data[f'channel_{k}'] for k in range(K)])
        result = DesignResult(
            precoders=[data[f'precoder_{k}'] for k in range(K)],
            sum_information=float(data['sum_information']))
    return result, channels


def cmd_verify(args):
    result, channels = load_design(args.path)
    residuals = verify_design(result, channels, args.tolerance)
    print(f"{args.path}: {channels.num_users} users, sum information "
          f"{result.sum_information:g} bits")
    print_report(residuals)
    return 0 if all(r.ok for r in residuals) else 1


def cmd_sweep(args):
    config = resolve_config(args)
    result = run_sweep(config)
    if args.out:
        emit_csv(result.records, args.out)
    else:
        sys.stdout.write(format_csv(result.records))
    bad = result.flagged(config.verify_tolerance)
    for name, value in sorted(result.verification.items()):
        log.info("worst %s residual %.3e", name, value)
    if bad:
        print(f"verification residuals above tolerance: {bad}",
              file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    commands = {'design': cmd_design, 'sweep': cmd_sweep,
                'verify': cmd_verify}
    try:
        return commands[args.command](args)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
