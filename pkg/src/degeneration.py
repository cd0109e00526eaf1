"""
Degenerating Families

Pinching families of genus-2 surfaces in Fenchel-Nielsen coordinates, the
boundary coordinate |tau| = exp(-2 pi^2 / l), the asymptotic envelopes that
bound zeta values and determinants near the boundary of moduli space, and
the numerical check of the two-sided bound on log(Z(n)/Z(2)) along a family.

All implied constants of the envelopes are taken to be 1.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .config import Settings, load_settings
from .detlap import spectral_constants
from .errors import DomainError, NumericalError, ParameterMismatchError, ValidationError
from .extended_log import ExtendedLog
from .length_spectrum import LengthSpectrum, enumerate_spectrum
from .surface_group import GroupPresentation, build_genus2_from_fn
from .zeta import DEFAULT_K_MAX, selberg_zeta_log

logger = logging.getLogger(__name__)


class EnvelopeKind(Enum):
    RATIO_UPPER = "ratio_upper"
    TAU_RATIO_LOWER = "tau_ratio_lower"
    TAU_RATIO_UPPER = "tau_ratio_upper"
    Z2_SHAPE = "z2_shape"
    ZPRIME1_SHAPE = "zprime1_shape"
    MUMFORD_POLE = "mumford_pole"
    DET_QUOTIENT_LOWER = "det_quotient_lower"
    DET_QUOTIENT_UPPER = "det_quotient_upper"
    DET_QUOTIENT_TAU_UPPER = "det_quotient_tau_upper"
    DET_QUOTIENT_GROWTH = "det_quotient_growth"
    DET_COMPACT_GROWTH = "det_compact_growth"


WEIGHT_FREE_KINDS = (EnvelopeKind.Z2_SHAPE, EnvelopeKind.ZPRIME1_SHAPE,
                     EnvelopeKind.TAU_RATIO_LOWER)


@dataclass(frozen=True)
class EnvelopeParams:
    """
    Inputs of an envelope evaluation.

    Give the pinched curves either by length (ells) or by |tau| (taus).
    """

    g: int = 2
    n: int = 2
    ells: Tuple[float, ...] = ()
    taus: Tuple[float, ...] = ()


@dataclass(frozen=True)
class FamilySpec:
    """
    A one-parameter pinching family.

    Attributes:
        base_fn (Tuple[float]): (l1, l2, l3, theta1, theta2, theta3)
        pinch_indices (Tuple[int]): Curves (1-based) whose length follows the grid
        ell_grid (Tuple[float]): Strictly decreasing pinching lengths
        n_values (Tuple[int]): Weights n >= 2 to check
    """

    base_fn: Tuple[float, ...]
    pinch_indices: Tuple[int, ...]
    ell_grid: Tuple[float, ...]
    n_values: Tuple[int, ...] = (2, 3, 4, 5, 6)

    def __post_init__(self):
        if len(self.base_fn) != 6:
            raise DomainError(f"base_fn needs six values, got {len(self.base_fn)}")
        if not self.pinch_indices or not set(self.pinch_indices) <= {1, 2, 3}:
            raise DomainError(f"pinch_indices must be a non-empty subset of {{1, 2, 3}}, "
                              f"got {self.pinch_indices}")
        if any(not ell > 0 for ell in self.ell_grid):
            raise DomainError(f"pinching lengths must be positive, got {self.ell_grid}")
        if any(b >= a for a, b in zip(self.ell_grid, self.ell_grid[1:])):
            raise DomainError(f"ell_grid must be strictly decreasing, got {self.ell_grid}")
        if any(n < 2 for n in self.n_values):
            raise DomainError(f"n_values must all be at least 2, got {self.n_values}")


@dataclass(frozen=True)
class BoundRecord:
    """
    Zeta values, envelopes and bound checks for one family member.

    Attributes:
        label (str): Member provenance
        ell (Tuple[float]): Pinched lengths
        tau_abs (Tuple[float]): |tau| per pinched curve
        log_Z2 (float): log Z(2); NaN for invalid members
        log_Zn (Dict[int, float]): log Z(n) per n
        envelope_logs (Dict[int, Dict[EnvelopeKind, ExtendedLog]]): Envelopes per n
        lower_ok (Dict[int, bool]): log Z(n) >= log Z(2)
        upper_ok (Dict[int, bool]): log Z(n) - log Z(2) <= RATIO_UPPER
        valid (bool): False when the member could not be evaluated
        reason (str): Why the member is invalid
    """

    label: str
    ell: Tuple[float, ...]
    tau_abs: Tuple[float, ...]
    log_Z2: float
    log_Zn: Dict[int, float] = field(default_factory=dict)
    envelope_logs: Dict[int, Dict[EnvelopeKind, ExtendedLog]] = field(default_factory=dict)
    lower_ok: Dict[int, bool] = field(default_factory=dict)
    upper_ok: Dict[int, bool] = field(default_factory=dict)
    valid: bool = True
    reason: str = ""


def tau_coordinate(ell: float) -> float:
    """|tau| = exp(-2 pi^2 / ell) for a curve of length ell."""
    if not ell > 0:
        raise DomainError(f"ell must be positive, got {ell}")
    return math.exp(-2.0 * math.pi ** 2 / ell)


def tau_to_ell(tau: float) -> float:
    if not 0.0 < tau < 1.0:
        raise DomainError(f"|tau| must lie in (0, 1), got {tau}")
    return -2.0 * math.pi ** 2 / math.log(tau)


def make_pinching_family(spec: FamilySpec) -> List[GroupPresentation]:
    """
    Build one genus-2 presentation per grid value.

    Args:
        spec (FamilySpec): Base coordinates and pinching grid

    Returns:
        List[GroupPresentation]: Members in grid order
    """
    family = []
    for ell in spec.ell_grid:
        params = list(spec.base_fn)
        for i in spec.pinch_indices:
            params[i - 1] = ell
        member = build_genus2_from_fn(params)
        family.append(replace(member,
                              pinched_lengths=(float(ell),) * len(spec.pinch_indices),
                              label=f"{member.label} pinch{list(spec.pinch_indices)}={ell:g}"))
    logger.info("built pinching family of %d members", len(family))
    return family


def _pinched_lengths(params: EnvelopeParams) -> Tuple[float, ...]:
    if params.ells and params.taus:
        raise ParameterMismatchError("give pinched curves by ells or by taus, not both")
    if params.taus:
        return tuple(tau_to_ell(tau) for tau in params.taus)
    if any(not ell > 0 for ell in params.ells):
        raise DomainError(f"pinched lengths must be positive, got {params.ells}")
    return tuple(float(ell) for ell in params.ells)


def _weight_factor(n: int) -> float:
    return math.log(4 * n * n - 4 * n - 3)


def envelope(kind: Union[EnvelopeKind, str], params: EnvelopeParams) -> ExtendedLog:
    """
    Natural log of an asymptotic envelope.

    With lam = |log|tau|| = 2 pi^2 / l and b = 160 pi (g - 1) / l (so that
    c(g, l) = e^b and c~(g, tau) = e^b):

        RATIO_UPPER             log(4n^2-4n-3) + sum e^b / l^2
        TAU_RATIO_LOWER         sum (3 log lam - lam/6)
        TAU_RATIO_UPPER         log(4n^2-4n-3) + sum (3 log lam + (e^b - 1/6) lam)
        Z2_SHAPE                sum (-pi^2/3l - 3 log l)
        ZPRIME1_SHAPE           sum (-pi^2/3l - log l)
        MUMFORD_POLE            sum n(n-1)/2 * lam
        DET_QUOTIENT_LOWER      g n^2 + log C_{g,n} - (6n^2-6n+1) log C_{g,1}
                                + sum (2n(n-1) lam - (6n^2-6n-2) log lam)
        DET_QUOTIENT_UPPER      DET_QUOTIENT_LOWER + log(4n^2-4n-3) + sum e^b lam
        DET_QUOTIENT_TAU_UPPER  log(4n^2-4n-3) + g n^2
                                + sum ((e^b + 2n(n-1) + 1/6) lam - (6n^2-6n+1) log lam)
        DET_QUOTIENT_GROWTH     log n^2 + g n^2
        DET_COMPACT_GROWTH      log n^2

    Args:
        kind (EnvelopeKind | str): Envelope to evaluate
        params (EnvelopeParams): Genus, weight and pinched curves

    Returns:
        ExtendedLog: Finite log, or saturated when e^b overflows
    """
    try:
        kind = EnvelopeKind(kind)
    except ValueError:
        raise DomainError(f"unknown envelope kind {kind!r}") from None
    g, n = params.g, params.n
    if g < 2:
        raise DomainError(f"genus must be at least 2, got {g}")
    if n < 2 and kind not in WEIGHT_FREE_KINDS:
        raise ParameterMismatchError(f"{kind.value} needs n >= 2, got {n}")

    ells = _pinched_lengths(params)
    lams = [2.0 * math.pi ** 2 / ell for ell in ells]
    exps = [160.0 * math.pi * (g - 1) / ell for ell in ells]
    threshold = load_settings().saturation_exponent

    if kind is EnvelopeKind.RATIO_UPPER:
        return ExtendedLog.from_exp_sum(_weight_factor(n),
                                        [(b, 1.0 / ell ** 2) for b, ell in zip(exps, ells)],
                                        threshold)
    if kind is EnvelopeKind.TAU_RATIO_LOWER:
        return ExtendedLog.finite(math.fsum(3.0 * math.log(lam) - lam / 6.0 for lam in lams))
    if kind is EnvelopeKind.TAU_RATIO_UPPER:
        offset = _weight_factor(n) + math.fsum(3.0 * math.log(lam) - lam / 6.0 for lam in lams)
        return ExtendedLog.from_exp_sum(offset, list(zip(exps, lams)), threshold)
    if kind is EnvelopeKind.Z2_SHAPE:
        return ExtendedLog.finite(math.fsum(-math.pi ** 2 / (3.0 * ell) - 3.0 * math.log(ell)
                                            for ell in ells))
    if kind is EnvelopeKind.ZPRIME1_SHAPE:
        return ExtendedLog.finite(math.fsum(-math.pi ** 2 / (3.0 * ell) - math.log(ell)
                                            for ell in ells))
    if kind is EnvelopeKind.MUMFORD_POLE:
        return ExtendedLog.finite(math.fsum(n * (n - 1) / 2.0 * lam for lam in lams))
    if kind is EnvelopeKind.DET_QUOTIENT_GROWTH:
        return ExtendedLog.finite(2.0 * math.log(n) + g * n * n)
    if kind is EnvelopeKind.DET_COMPACT_GROWTH:
        return ExtendedLog.finite(2.0 * math.log(n))

    quad_n = 6 * n * n - 6 * n
    if kind is EnvelopeKind.DET_QUOTIENT_TAU_UPPER:
        offset = _weight_factor(n) + g * n * n + math.fsum(
            (2 * n * (n - 1) + 1.0 / 6.0) * lam - (quad_n + 1) * math.log(lam) for lam in lams)
        return ExtendedLog.from_exp_sum(offset, list(zip(exps, lams)), threshold)

    constants = (g * n * n + spectral_constants(g, n).log_C_gn
                 - (quad_n + 1) * spectral_constants(g, 1).log_C_gn)
    offset = constants + math.fsum(2 * n * (n - 1) * lam - (quad_n - 2) * math.log(lam)
                                   for lam in lams)
    if kind is EnvelopeKind.DET_QUOTIENT_LOWER:
        return ExtendedLog.finite(offset)
    return ExtendedLog.from_exp_sum(offset + _weight_factor(n), list(zip(exps, lams)), threshold)


def bound_record_from_spectrum(spectrum: LengthSpectrum, ells: Sequence[float], g: int,
                               n_values: Sequence[int], label: str = "",
                               k_max: int = DEFAULT_K_MAX) -> BoundRecord:
    """
    Evaluate log Z(2), log Z(n), the envelopes and both bound checks for one surface.

    Args:
        spectrum (LengthSpectrum): Stabilized length spectrum of the member
        ells (Sequence[float]): Pinched curve lengths (may be empty)
        g (int): Genus
        n_values (Sequence[int]): Weights n >= 2
        label (str): Provenance written into the record

    Returns:
        BoundRecord: Valid record
    """
    ells = tuple(float(ell) for ell in ells)
    log_z2 = selberg_zeta_log(spectrum, 2.0, k_max).log_value
    log_zn, envelopes, lower_ok, upper_ok = {}, {}, {}, {}
    for n in n_values:
        if n < 2:
            raise DomainError(f"n must be at least 2, got {n}")
        log_zn[n] = log_z2 if n == 2 else selberg_zeta_log(spectrum, float(n), k_max).log_value
        params = EnvelopeParams(g=g, n=n, ells=ells)
        envelopes[n] = {kind: envelope(kind, params) for kind in EnvelopeKind}
        upper = envelopes[n][EnvelopeKind.RATIO_UPPER]
        lower_ok[n] = log_zn[n] >= log_z2
        upper_ok[n] = upper.bounds(log_zn[n] - log_z2)
        if upper.is_saturated:
            logger.info("%s n=%d: upper envelope saturated at exponent %.6g, check is trivial",
                        label, n, upper.inner_exponent)
    taus = tuple(tau_coordinate(ell) for ell in ells)
    return BoundRecord(label, ells, taus, log_z2, log_zn, envelopes, lower_ok, upper_ok)


def _invalid_record(member: GroupPresentation, reason: str) -> BoundRecord:
    ells = member.pinched_lengths
    return BoundRecord(member.label, ells, tuple(tau_coordinate(ell) for ell in ells),
                       math.nan, valid=False, reason=reason)


def check_bounds(family: Sequence[GroupPresentation], n_values: Sequence[int],
                 cutoffs: Union[float, Sequence[float]], max_depth: Union[int, Sequence[int]],
                 threads: int = 1, k_max: int = DEFAULT_K_MAX,
                 settings: Optional[Settings] = None) -> List[BoundRecord]:
    """
    Check log Z(2) <= log Z(n) <= log Z(2) + RATIO_UPPER along a family.

    Members whose spectrum cannot be enumerated to stabilization are kept as
    invalid records instead of aborting the sweep.

    Args:
        family (Sequence[GroupPresentation]): Members in grid order
        n_values (Sequence[int]): Weights n >= 2
        cutoffs (float | Sequence[float]): Spectrum cutoff, shared or per member
        max_depth (int | Sequence[int]): Enumeration depth, shared or per member
        threads (int): Members evaluated in parallel; records keep grid order

    Returns:
        List[BoundRecord]: One record per member
    """
    settings = settings or load_settings()
    count = len(family)
    cutoffs = [float(cutoffs)] * count if isinstance(cutoffs, (int, float)) else list(cutoffs)
    depths = [int(max_depth)] * count if isinstance(max_depth, int) else list(max_depth)
    if len(cutoffs) != count or len(depths) != count:
        raise ParameterMismatchError(
            f"{count} members but {len(cutoffs)} cutoffs and {len(depths)} depths")
    if any(n < 2 for n in n_values):
        raise DomainError(f"n_values must all be at least 2, got {tuple(n_values)}")

    def evaluate(index: int) -> BoundRecord:
        member = family[index]
        try:
            spectrum = enumerate_spectrum(member, cutoffs[index], depths[index],
                                          settings=settings)
            spectrum.require_usable()
            return bound_record_from_spectrum(spectrum, member.pinched_lengths, member.genus,
                                              n_values, member.label, k_max)
        except (NumericalError, ValidationError) as exc:
            # Sweep arguments are checked above, so a validation failure here
            # comes from this member's own matrices.
            logger.warning("%s: marked invalid (%s)", member.label, exc)
            return _invalid_record(member, str(exc))

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        return list(pool.map(evaluate, range(count)))


def wolpert_ratio_band(records: Sequence[BoundRecord]) -> float:
    """max - min over valid records of log Z(2) minus the Z2_SHAPE envelope."""
    ratios = [r.log_Z2 - envelope(EnvelopeKind.Z2_SHAPE, EnvelopeParams(ells=r.ell)).log_value
              for r in records if r.valid]
    if not ratios:
        raise DomainError("no valid records to form the ratio band")
    return max(ratios) - min(ratios)
