"""Hybrid-beamforming spatial modulation (HBF-SM) for the multi-user mmWave downlink.

Modules, bottom up: :mod:`~hbfsm.numerics` (seeded streams, pseudo-inverse),
:mod:`~hbfsm.channel`, :mod:`~hbfsm.codebook`, :mod:`~hbfsm.txrx` (precoding,
transmission, ML detection), :mod:`~hbfsm.rate`, :mod:`~hbfsm.baseline`
(classical SM), :mod:`~hbfsm.sim` (Monte Carlo drivers) and :mod:`~hbfsm.cli`.
"""

from .channel import generate_channel, generate_scenario, steering_vector
from .codebook import (build_array_response_codebook, build_beamsteering_codebook, chordal_distance_sq,
                       quantization_error_study, select_beamformer)
from .config import ConfigError, ExperimentConfig, load_study, parse_study, preset_path
from .numerics import RandomStream, pseudo_inverse
from .rate import gm_entropy, mutual_information, rate_bounds
from .sim import run_ber_experiment, run_comparison, run_quantization, run_rate_experiment
from .txrx import build_constellation, design_link, estimate_beta, ml_detect, sm_map, sm_unmap, transmit, zf_precoder

__version__ = "0.1.0"

__all__ = [
    "RandomStream", "pseudo_inverse",
    "steering_vector", "generate_channel", "generate_scenario",
    "build_array_response_codebook", "build_beamsteering_codebook", "select_beamformer",
    "chordal_distance_sq", "quantization_error_study",
    "build_constellation", "sm_map", "sm_unmap", "design_link", "zf_precoder", "estimate_beta",
    "transmit", "ml_detect",
    "gm_entropy", "mutual_information", "rate_bounds",
    "ConfigError", "ExperimentConfig", "parse_study", "load_study", "preset_path",
    "run_ber_experiment", "run_comparison", "run_rate_experiment", "run_quantization",
]
