"""Digital zero-noise extrapolation.

Scale the noise of a circuit by unitary folding or parameter-noise injection,
simulate it on a density-matrix back end, and extrapolate the measured
expectation values back to zero noise.
"""

from .adaptive import (ALPHA, AdaptiveConfig, adaptive_exp_extrapolate, generic_adaptive,
                       optimal_allocation, solve_alpha)
from .circuit import Circuit, Gate, Layer, parse_circuit, serialize_circuit, unitary_of
from .densim import DensityMatrix, NoiseModel, Observable, simulate, simulate_expectation
from .extrapolate import (Estimate, EstimationError, NoiseCurve, extrapolate_exp,
                          extrapolate_linear, extrapolate_polyexp, extrapolate_richardson,
                          fit_polynomial)
from .folding import FoldMethod, fold, resolve_fold
from .param_scale import ParamNoiseSpec, scale_parameters

__all__ = [
    "ALPHA", "AdaptiveConfig", "Circuit", "DensityMatrix", "Estimate", "EstimationError",
    "FoldMethod", "Gate", "Layer", "NoiseCurve", "NoiseModel", "Observable", "ParamNoiseSpec",
    "adaptive_exp_extrapolate", "extrapolate_exp", "extrapolate_linear", "extrapolate_polyexp",
    "extrapolate_richardson", "fit_polynomial", "fold", "generic_adaptive", "optimal_allocation",
    "parse_circuit", "resolve_fold", "scale_parameters", "serialize_circuit", "simulate",
    "simulate_expectation", "solve_alpha", "unitary_of",
]
