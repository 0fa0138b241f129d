"""Curvature statistics of random complex plane curves and Bargmann-Fock zero sets."""
__version__ = "0.1.0"

from ._core import BACKEND
from .bargmann_fock import (BallRegion, BFPoly, bf_area_band, bf_truncation_degree, bf_zero_samples,
                            c2_distance_to, f0_poly, prop1_event_probability, sample_bf)
from .bergman import (KernelComparison, bf_kernel_modulus, fs_normalized_kernel, kernel_convergence,
                      rate_fit)
from .curvature import (CurvatureBand, Estimate, PhiParams, curvature_flat, curvature_fs,
                        expected_kappa_jet, jet_mean_V, phi_closed, phi_mc, sample_exact_jet, vitter_V)
from .errors import (BranchFailure, ConvergenceFailure, DegenerateLine, IllConditioned, MalformedInput,
                     NumericalAbort, RandCurvError, SingularPoint, TooManyDiscards)
from .inflections import inflection_count, inflection_points
from .projective import (HomPoly3, Jet2, ProjLine, directional_jet, read_poly, restrict_to_line, roots,
                         sample_kostlan, unitary_frame, write_poly)
from .rng import RngStream, derive_stream
from .sampler import (CurvePointCloud, curvature_histogram, expected_kappa_curves, gauss_bonnet_check,
                      gauss_bonnet_target, kappa_estimate, sample_curve_points, sample_random_line,
                      tail_bound_check)
