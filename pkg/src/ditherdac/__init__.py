"""Low-resolution DAC arrays with non-subtractive digital dither: quantizer
model, equivalent-noise analysis, line-of-sight array simulation and EVM."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .channel import ChannelScene, matched_precode, receive, steering, steering_vector
from .dither import (DitherSpec, EquivalentNoiseStats, TransferCurve, dithered_quantize,
                     draw_dither, equivalent_noise, noise_property_test,
                     transfer_function_closed_form_uniform, transfer_function_numeric)
from .evm import (EvmReport, empirical_evm, predict_conventional_bounds, predict_dithered,
                  predict_dithered_from_resolution, resolution_tradeoff)
from .harness import (ExperimentConfig, SweepRow, angle_sweep, calibrate_step, resolution_sweep,
                      simulate_chain)
from .quantizer import (ClipCounter, QuantizationError, QuantizerConfig, Saturation,
                        neighbor_codes, quantization_error, quantize_complex, quantize_real)
from .rng import generate_user_signal
