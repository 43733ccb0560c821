"""Two users on a 32-subcarrier DMT channel with 10 taps.

BER of the MMSE-DFE versus sum information for N_k in
{(16,16), (16,17), (17,17)}.
"""

from _common import parser, sweep_to_csv

CASES = [(16, 16), (16, 17), (17, 17)]


def main():
    args = parser(__doc__).parse_args()
    for streams in CASES:
        sweep_to_csv(args, 'two_users_' + '_'.join(map(str, streams)),
                     streams=streams, info_start=32, info_stop=128,
                     info_step=16, receivers=('dfe',))


if __name__ == '__main__':
    main()
