"""Herglotz functions of atomic measures, self-adjoint extension spectra and
half-line Sturm-Liouville (Weyl-Titchmarsh) analysis."""

from .counterexample import (CounterexampleMeasure, CounterexampleSpec, build,
                             build_bounded, build_unbounded,
                             essential_spectrum_accumulation, verify_counterexample)
from .errors import (AtomHit, AtomNearEndpoint, CriterionFails, DiskNotShrinking,
                     Inconclusive, InvalidInterval, InvalidMeasure, NonScalar,
                     NoTailBound, PotentialError, SpectraError, StepUnderflow)
from .extension_model import (ExtensionSpectrum, TruncatedModel, accumulation_sum_check,
                              extension_eigenvalues, nowhere_dense_witness,
                              spectrum_partition)
from .herglotz import (HerglotzFunction, MatrixMeasure, SecondMomentResult,
                       boundary_value, direct_sum, evaluate, imag_quotient_limit,
                       second_moment_at)
from .potential import Potential
from .sturm_liouville import (SLProblem, count_l2_solutions, deficiency_indices,
                              fourier_transform, solve_ivp, spectral_measure_estimate,
                              weyl_m)

__version__ = "0.1.0"
