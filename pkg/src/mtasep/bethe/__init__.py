"""Reduced words, Bethe amplitudes and contour-integral transition kernels."""

from .amplitude import AmplitudeMatrix, all_amplitudes, amplitude, ansatz, boundary_residual, energy
from .kernel import (KernelEvaluator, PoleOnContour, QuadratureNotConverged, TransitionKernel,
                     conservation, kernel, kernels, master_equation_residual, pole_scan)
from .words import ReducedWord, canonical_word, reduced_words

__all__ = [
    "AmplitudeMatrix", "all_amplitudes", "amplitude", "ansatz", "boundary_residual", "energy",
    "KernelEvaluator", "PoleOnContour", "QuadratureNotConverged", "TransitionKernel",
    "conservation", "kernel", "kernels", "master_equation_residual", "pole_scan",
    "ReducedWord", "canonical_word", "reduced_words",
]
