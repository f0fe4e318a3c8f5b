"""Location and AR spectral estimation of weak wave packets in noise."""

__version__ = "0.1.0"

from .armodel import (ARModel, FrobeniusOperator, ModelError, char_roots, estimate_lp,
                      estimate_lp_symmetric)
from .corrmat import (CorrelationPair, DataMatrices, averaged_r0_r1, build_data_matrices,
                      correlations, estimate_correlations)
from .detect import (DetectionTrace, DetectorConfig, Segment, SegmentSet, detect, run_detector,
                     segment, window_stats)
from .order import OrderScan, OrderSelection, scan_orders, select_order
from .signals import (ChirpSpec, PacketSpec, add_noise, gen_chirp, gen_kaymarple_like, gen_packets,
                      measure_snr)
from .spectrum import (FormingFilter, Spectrogram, SpectrumEstimate, amplitude_spectrum,
                       build_forming_filter, localized_analysis, trace_powers, track_peaks)
