"""flexbeam: joint flexible-antenna-array shape and transmit-beamforming
design for secrecy-rate maximization in MISO wiretap channels."""

from .ao_driver import AoOptions, AoTrace, Scenario, Scheme, initialize, \
    run_ao
from .beamformer import HermitianPair, build_pair, dominant_gen_eigvec, \
    optimal_beamformer
from .channel import ChannelRealization, CsiError, PathSet, corrupt_csi, \
    sample_paths, steering_vector, synthesize_channel
from .geometry import ArrayLayout, DeformationModel, ElementIndex, \
    FeasibilityError, boresight_offsets, element_positions, \
    position_derivatives
from .radiation import ElementPattern, element_amplitude, \
    element_power_gain, gain_vector, gain_vector_derivative
from .rng import complex_normal, make_rng
from .secrecy import Beamformer, SecrecyResult, secrecy_rate_colluding, \
    secrecy_rate_single, snr
from .shape_optimizer import PgaOptions, ShapeObjectiveContext, \
    gradient_F, objective_F, pga_maximize

__version__ = "0.1.0"

__all__ = [
    "AoOptions", "AoTrace", "ArrayLayout", "Beamformer",
    "ChannelRealization", "CsiError", "DeformationModel", "ElementIndex",
    "ElementPattern", "FeasibilityError", "HermitianPair", "PathSet",
    "PgaOptions", "Scenario", "Scheme", "SecrecyResult",
    "ShapeObjectiveContext", "boresight_offsets", "build_pair",
    "complex_normal", "corrupt_csi", "dominant_gen_eigvec",
    "element_amplitude", "element_positions", "element_power_gain",
    "gain_vector", "gain_vector_derivative", "gradient_F", "initialize",
    "make_rng", "objective_F", "optimal_beamformer",
    "position_derivatives", "pga_maximize", "run_ao", "sample_paths",
    "secrecy_rate_colluding", "secrecy_rate_single", "snr",
    "steering_vector", "synthesize_channel",
]
