"""Joint MMSE-DFE transceiver design for multiple-access ISI MIMO channels."""

from .channels import (IsiChannel, Modulation, dmt_matrix, sample_channel,
                       toeplitz_matrix)
from .constellation import QPSK, Constellation, qam
from .designer import (ChannelSet, DesignResult, design_transceivers,
                       verify_design)
from .dfe import build_receiver, detect, linear_mmse_detect
from .matdecomp import (cholesky_upper, hermitian_eig, qrs_equal_diagonal)
from .sim import BerRecord, SimConfig, emit_csv, read_csv, run_sweep
from .waterfill import inverse_waterfill

__version__ = '0.1.0'
