"""Scalar QPSK channel: simulated BER against Q(sqrt(2^I - 1)).

With one stream on a unit channel the biased MMSE estimate has SNR
``2^I - 1``, so the BER has a closed form.
"""

import numpy as np
from scipy.stats import norm

from _common import parser, sweep_to_csv


def main():
    args = parser(__doc__, realizations=20).parse_args()
    result = sweep_to_csv(args, 'scalar_qpsk', streams=(1,), subcarriers=1,
                          channel_length=1, info_start=0.5, info_stop=3.0,
                          info_step=0.5, receivers=('dfe_genie',))
    print("  I      simulated   closed form  z")
    for rec in result.records:
        p = norm.sf(np.sqrt(2.0 ** rec.info_bits - 1.0))
        se = np.sqrt(p * (1 - p) / rec.total_bits)
        print(f"  {rec.info_bits:4.1f}  {rec.ber_aggregate:.4e}  {p:.4e}  "
              f"{(rec.ber_aggregate - p) / se:+.2f}")


if __name__ == '__main__':
    main()
