"""Decision feedback against a joint linear MMSE receiver on the same precoders.

The genie-aided DFE (true symbols fed back) isolates error propagation:
the gap between ``dfe`` and ``dfe_genie`` is what wrong decisions cost.
"""

from _common import parser, sweep_to_csv


def main():
    p = parser(__doc__, min_bits=2 * 10 ** 5)
    p.add_argument('--streams', default='16,16')
    args = p.parse_args()
    streams = tuple(int(v) for v in args.streams.split(','))
    sweep_to_csv(args, 'dfe_vs_linear_' + '_'.join(map(str, streams)),
                 streams=streams, info_start=32, info_stop=128, info_step=16,
                 receivers=('dfe', 'dfe_genie', 'linear'))


if __name__ == '__main__':
    main()
