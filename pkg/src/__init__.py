# Selberg Lab: Selberg zeta functions and determinants of compact hyperbolic surfaces
from .config import Settings, load_settings
from .degeneration import (BoundRecord, EnvelopeKind, EnvelopeParams, FamilySpec,
                           bound_record_from_spectrum, check_bounds, envelope,
                           make_pinching_family, tau_coordinate, tau_to_ell, wolpert_ratio_band)
from .detlap import (SpectralConstants, c_n_constant, glaisher_log, log_barnes_g_int,
                     log_det_laplacian, spectral_constants, zeta_prime_minus_one)
from .errors import NumericalError, SelbergLabError, ValidationError
from .extended_log import ExtendedLog
from .heat import (assembled_heat_trace, find_t0, heat_kernel_h, heat_trace,
                   heat_trace_lower_bound, periodized_kernel)
from .length_spectrum import LengthSpectrum, count_geodesics, enumerate_spectrum, pgt_log_bound
from .moebius import MoebiusElement, Point, classify, hyperbolic_distance
from .surface_group import (GroupPresentation, Word, build_genus2_from_fn, builtin_octagon,
                            export_group_file, parse_group_file)
from .zeta import (ZetaEvaluation, ZetaPrimeEstimate, estimate_zeta_prime_at_one,
                   ratio_lower_integral, ratio_upper_integral, selberg_zeta_log,
                   zeta_log_derivative_mckean, zeta_log_derivative_product, zeta_ratio_log)

__version__ = "0.1.0"
