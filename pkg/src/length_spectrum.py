"""
Primitive Length Spectrum

Enumerates freely reduced words of a surface group, collects the
hyperbolic elements below a length cutoff, identifies conjugacy classes and
returns the oriented primitive length spectrum together with a
depth-stabilization certificate. Also hosts the geodesic counting function
and its prime-geodesic envelope.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .config import Settings, load_settings
from .errors import (DomainError, EmptySpectrumError, PrecisionLossError, RangeError,
                     UnstabilizedSpectrumError, WordBudgetExceeded)
from .extended_log import ExtendedLog
from .moebius import MoebiusElement
from .surface_group import GroupPresentation, Word, index_letter

logger = logging.getLogger(__name__)

UNIT_ROUNDOFF = 2.0 ** -53
KEY_TOL = 1e-7
IDENTITY_TOL = 1e-6
MP_DPS = 40

_MP = mpmath.MPContext()
_MP.dps = MP_DPS

MpMatrix = Tuple[mpmath.mpf, mpmath.mpf, mpmath.mpf, mpmath.mpf]


@dataclass(frozen=True)
class SpectrumEntry:
    length: float
    multiplicity: int


@dataclass(frozen=True)
class ConjugacyClass:
    """
    A conjugacy class found by the enumeration.

    Attributes:
        canonical (Word): Least rotation of the shortest word found
        representative (MoebiusElement): Matrix of the canonical word
        length (float): Translation length
        primitive (bool): Not a proper power
        power_index (int): Power over the primitive root (1 when primitive)
        depth (int): Word depth at which the class first appeared
    """

    canonical: Word
    representative: MoebiusElement
    length: float
    primitive: bool
    power_index: int
    depth: int


@dataclass(frozen=True)
class LengthSpectrum:
    """
    Oriented primitive length spectrum below a cutoff.

    Attributes:
        entries (Tuple[SpectrumEntry]): Strictly increasing lengths with multiplicities
        cutoff (float): Largest length searched
        word_depth (int): Enumeration depth
        stabilized (bool): Depths word_depth-1 and word_depth agree
        genus (int): Genus of the surface
        classes (Tuple[ConjugacyClass]): Primitive classes behind the entries
        label (str): Provenance of the surface
    """

    entries: Tuple[SpectrumEntry, ...]
    cutoff: float
    word_depth: int
    stabilized: bool
    genus: int = 2
    classes: Tuple[ConjugacyClass, ...] = ()
    label: str = ""

    def __post_init__(self):
        if not self.cutoff > 0:
            raise DomainError(f"cutoff must be positive, got {self.cutoff}")
        previous = 0.0
        for e in self.entries:
            if not previous < e.length <= self.cutoff + 1e-9:
                raise DomainError(
                    f"spectrum lengths must increase inside (0, {self.cutoff}], got {e.length}")
            if e.multiplicity < 1:
                raise DomainError(f"multiplicity must be positive, got {e.multiplicity}")
            previous = e.length

    @classmethod
    def from_entries(cls, pairs: Sequence[Tuple[float, int]], cutoff: float, genus: int = 2,
                     stabilized: bool = True, word_depth: int = 0,
                     label: str = "synthetic") -> "LengthSpectrum":
        """Spectrum from (length, multiplicity) pairs, e.g. known data or test fixtures."""
        entries = tuple(SpectrumEntry(float(l), int(m)) for l, m in sorted(pairs))
        return cls(entries, float(cutoff), word_depth, stabilized, genus, (), label)

    @property
    def is_empty(self) -> bool:
        return not self.entries

    @property
    def systole(self) -> float:
        if self.is_empty:
            raise EmptySpectrumError(f"no closed geodesics below cutoff {self.cutoff}")
        return self.entries[0].length

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.entries], dtype=float)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([e.multiplicity for e in self.entries], dtype=float)

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def require_usable(self) -> "LengthSpectrum":
        """Raise unless the spectrum is stabilized and non-empty."""
        if not self.stabilized:
            raise UnstabilizedSpectrumError(
                f"spectrum of '{self.label}' changed at depth {self.word_depth}; "
                "increase max_depth")
        if self.is_empty:
            raise EmptySpectrumError(
                f"spectrum of '{self.label}' is empty below cutoff {self.cutoff}")
        return self

    def same_entries(self, other: "LengthSpectrum", tol: float = 1e-9) -> bool:
        if len(self.entries) != len(other.entries):
            return False
        return all(abs(a.length - b.length) <= tol and a.multiplicity == b.multiplicity
                   for a, b in zip(self.entries, other.entries))


def free_word_count(rank: int, depth: int) -> int:
    """Number of nonempty freely reduced words of length <= depth."""
    k = 2 * rank
    return sum(k * (k - 1) ** (d - 1) for d in range(1, depth + 1))


def _trace_error(spread: np.ndarray, depth: int) -> np.ndarray:
    """Rounding bound on float traces of depth-letter products with entrywise spread |g1|...|gk|."""
    n = 2 * depth
    gamma = n * UNIT_ROUNDOFF / (1.0 - n * UNIT_ROUNDOFF)
    return 2.0 * gamma * (spread[:, 0, 0] + spread[:, 1, 1])


def key_radii(spread: np.ndarray) -> np.ndarray:
    """Matching radius per matrix: KEY_TOL plus the rounding carried by its product."""
    flat = np.asarray(spread, dtype=float).reshape(-1, 4)
    return KEY_TOL + 64.0 * UNIT_ROUNDOFF * flat.max(axis=1)


def word_levels(letters: np.ndarray, max_depth: int, first: Optional[int] = None
                ) -> Iterator[Tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
    """
    Breadth-first walk of the freely reduced word tree.

    Products are not rescaled by their computed determinant. Alongside each
    product the walk carries |g1||g2|...|gk|, an entrywise bound on its
    rounding error.

    Args:
        letters (np.ndarray): Letter matrices in the order 1, -1, 2, -2, ...
        max_depth (int): Deepest level
        first (int): Restrict to words starting with this letter index

    Yields:
        Tuple: (depth, letter indices (N, depth), matrices (N, 2, 2), spreads (N, 2, 2))

    Raises:
        PrecisionLossError: A product overflowed
    """
    k = letters.shape[0]
    magnitudes = np.abs(letters)
    start = np.arange(k) if first is None else np.array([first])
    words = start[:, None].astype(np.int16)
    mats = letters[start].copy()
    spread = magnitudes[start].copy()
    depth = 1
    while True:
        if not np.all(np.isfinite(mats)):
            raise PrecisionLossError(f"word products overflowed at depth {depth}")
        yield depth, words, mats, spread
        if depth >= max_depth or len(words) == 0:
            return
        last = words[:, -1]
        allowed = (last[:, None] != (np.arange(k)[None, :] ^ 1)).ravel()
        nxt = np.tile(np.arange(k, dtype=np.int16), len(words))
        words = np.concatenate([np.repeat(words, k, axis=0), nxt[:, None]], axis=1)[allowed]
        mats = np.einsum("nij,kjl->nkil", mats, letters).reshape(-1, 2, 2)[allowed]
        spread = np.einsum("nij,kjl->nkil", spread, magnitudes).reshape(-1, 2, 2)[allowed]
        depth += 1


def _lengths_from_traces(traces: np.ndarray) -> np.ndarray:
    t = np.abs(traces)
    with np.errstate(invalid="ignore"):
        return 2.0 * np.log((t + np.sqrt((t - 2.0) * (t + 2.0))) / 2.0)


def _collect_subtree(letters: np.ndarray, first: int, max_depth: int, cutoff: float,
                     settings: Settings) -> List[Tuple[Tuple[int, ...], int]]:
    # Float traces only screen: a word is kept unless its rounding bound
    # rules it out. Lengths are settled in extended precision afterwards.
    found = []
    for depth, words, mats, spread in word_levels(letters, max_depth, first):
        traces = np.abs(mats[:, 0, 0] + mats[:, 1, 1])
        err = _trace_error(spread, depth)
        maybe_hyperbolic = traces + err > 2.0 + settings.trace_tol
        shortest = _lengths_from_traces(np.maximum(traces - err, 2.0))
        keep = maybe_hyperbolic & (shortest <= cutoff + settings.length_tol)
        if depth >= 2:
            keep &= words[:, 0] != (words[:, -1] ^ 1)
        for row in words[keep]:
            found.append((tuple(index_letter(int(i)) for i in row), depth))
    return found


class ExactWords:
    """
    Word matrices of a presentation evaluated in extended precision.

    The float generators are taken as exact; products, traces and lengths
    are carried at MP_DPS digits in a private mpmath context, so threads
    enumerating different surfaces never share a precision setting.
    """

    def __init__(self, G: GroupPresentation):
        self._mp = _MP
        mpf = self._mp.mpf
        self._letters = {}
        for i, m in enumerate(G.letter_matrices()):
            self._letters[index_letter(i)] = tuple(mpf(float(v)) for v in m.ravel())
        self._cache: Dict[Tuple[int, ...], MpMatrix] = {}

    @staticmethod
    def multiply(x: MpMatrix, y: MpMatrix) -> MpMatrix:
        return (x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3])

    def letter(self, x: int) -> MpMatrix:
        return self._letters[x]

    def evaluate(self, letters: Sequence[int]) -> MpMatrix:
        key = tuple(letters)
        cached = self._cache.get(key)
        if cached is None:
            one, zero = self._mp.mpf(1), self._mp.mpf(0)
            cached = (one, zero, zero, one)
            for x in key:
                cached = self.multiply(cached, self._letters[x])
            self._cache[key] = cached
        return cached

    def power(self, m: MpMatrix, n: int) -> MpMatrix:
        result = m
        for _ in range(n - 1):
            result = self.multiply(result, m)
        return result

    def rotations(self, m: MpMatrix, letters: Sequence[int]) -> List[MpMatrix]:
        """Matrices of every cyclic rotation, each a conjugate of the previous by one letter."""
        out = [m]
        for x in letters[:-1]:
            m = self.multiply(self.multiply(self._letters[-x], m), self._letters[x])
            out.append(m)
        return out

    def is_identity(self, m: MpMatrix) -> bool:
        a, b, c, d = m
        s = 1 if a > 0 else -1
        return max(abs(s * a - 1), abs(b), abs(c), abs(s * d - 1)) <= IDENTITY_TOL

    def length(self, m: MpMatrix, trace_tol: float) -> Optional[float]:
        """Translation length, or None for elements that are not hyperbolic."""
        if self.is_identity(m):
            return None
        t = abs(m[0] + m[3])
        if t <= 2 + trace_tol:
            return None
        return float(2 * self._mp.acosh(t / 2))

    @staticmethod
    def to_array(m: MpMatrix) -> np.ndarray:
        return np.array([[float(m[0]), float(m[1])], [float(m[2]), float(m[3])]])


class ElementIndex:
    """
    Tolerant lookup of PSL(2,R) elements among stored float matrices.

    Every matrix is stored with both signs. A query matrix names the same
    element as a stored one when all entries agree within the query radius.
    """

    def __init__(self, mats: np.ndarray, radii: np.ndarray, owners: np.ndarray):
        self._points = np.asarray(mats, dtype=float).reshape(-1, 4)
        self._radii = np.asarray(radii, dtype=float)
        self._owners = np.asarray(owners, dtype=np.intp)
        self._tree = cKDTree(np.concatenate([self._points, -self._points]))

    def _hits(self, points: np.ndarray, radii: np.ndarray) -> List[np.ndarray]:
        found = self._tree.query_ball_point(points, r=radii, p=np.inf)
        n = len(self._points)
        return [self._owners[np.asarray(h, dtype=np.intp) % n] for h in found]

    def owners_near(self, mats: np.ndarray, radii: np.ndarray) -> np.ndarray:
        """Distinct owners of stored matrices matching any of `mats`."""
        points = np.asarray(mats, dtype=float).reshape(-1, 4)
        hits = self._hits(points, np.asarray(radii, dtype=float))
        return np.unique(np.concatenate(hits)) if hits else np.empty(0, dtype=np.intp)

    def components(self, n_owners: int) -> Tuple[int, np.ndarray]:
        """Connected components of owners linked through matching matrices."""
        hits = self._hits(self._points, self._radii)
        rows = np.repeat(self._owners, [len(h) for h in hits])
        cols = np.concatenate(hits)
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_owners, n_owners))
        return connected_components(graph, directed=False)


def _conjugators(G: GroupPresentation, depth: int) -> Tuple[np.ndarray, np.ndarray]:
    mats = [np.eye(2)[None]]
    for _, _, level, _ in word_levels(G.letter_matrices(), depth):
        mats.append(level)
    h = np.concatenate(mats)
    h_inv = np.stack([h[:, 1, 1], -h[:, 0, 1], -h[:, 1, 0], h[:, 0, 0]], axis=1).reshape(-1, 2, 2)
    return h, h_inv


def _conjugates(m: np.ndarray, h: np.ndarray, h_inv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Float conjugates h m h^-1 with their matching radii."""
    mats = np.einsum("nij,jk,nkl->nil", h, m, h_inv)
    spread = np.einsum("nij,jk,nkl->nil", np.abs(h), np.abs(m), np.abs(h_inv))
    return mats, key_radii(spread)


def _cluster(classes: Sequence[ConjugacyClass], tol: float) -> Tuple[SpectrumEntry, ...]:
    entries: List[SpectrumEntry] = []
    anchor = None
    for c in classes:
        if anchor is not None and c.length - anchor <= tol:
            last = entries[-1]
            entries[-1] = SpectrumEntry(last.length, last.multiplicity + 1)
        else:
            anchor = c.length
            entries.append(SpectrumEntry(c.length, 1))
    return tuple(entries)


def _build_classes(candidates: Dict[Word, int], cutoff: float, settings: Settings,
                   conjugators: Tuple[np.ndarray, np.ndarray],
                   exact: ExactWords) -> List[ConjugacyClass]:
    words: List[Word] = []
    exact_reps: List[MpMatrix] = []
    lengths: List[float] = []
    for w in sorted(candidates, key=lambda w: (candidates[w], w.sort_key())):
        m = exact.evaluate(w.letters)
        length = exact.length(m, settings.trace_tol)
        if length is None or length > cutoff + settings.length_tol:
            continue
        words.append(w)
        exact_reps.append(m)
        lengths.append(length)
    if not words:
        return []
    reps = [ExactWords.to_array(m) for m in exact_reps]
    powers = [w.primitive_root()[1] for w in words]
    h, h_inv = conjugators

    # Words the free-group normal form keeps apart can still be conjugate
    # in the surface group; link them through matching conjugates.
    points, radii, owners = [], [], []
    for i, w in enumerate(words):
        conj, conj_radii = _conjugates(reps[i], h, h_inv)
        rots = np.array([ExactWords.to_array(r)
                         for r in exact.rotations(exact_reps[i], w.letters)])
        points += [conj.reshape(-1, 4), rots.reshape(-1, 4)]
        radii += [conj_radii, key_radii(np.abs(rots))]
        owners.append(np.full(len(conj) + len(rots), i, dtype=np.intp))
    index = ElementIndex(np.concatenate(points), np.concatenate(radii), np.concatenate(owners))
    n_groups, labels = index.components(len(words))

    roots = np.full(n_groups, -1, dtype=np.intp)
    for i in range(len(words) - 1, -1, -1):
        roots[labels[i]] = i
    power_of = np.zeros(n_groups, dtype=int)
    for i, label in enumerate(labels):
        power_of[label] = max(power_of[label], powers[i])

    for label, root in enumerate(roots):
        if power_of[label] != 1:
            continue
        m = 2
        while m * lengths[root] <= cutoff + settings.length_tol:
            power = ExactWords.to_array(exact.power(exact_reps[root], m))
            conj, conj_radii = _conjugates(power, h, h_inv)
            for j in index.owners_near(conj, conj_radii):
                target = labels[j]
                power_of[target] = max(power_of[target], m)
            m += 1

    classes = []
    for label, root in enumerate(roots):
        power = int(power_of[label])
        rep = MoebiusElement.from_array(reps[root])
        classes.append(ConjugacyClass(words[root], rep, lengths[root],
                                      power == 1, power, candidates[words[root]]))
    classes.sort(key=lambda c: (c.length, c.canonical.sort_key()))
    return classes


def _spectrum_from_candidates(candidates: Dict[Word, int], cutoff: float, settings: Settings,
                              conjugators, exact: ExactWords
                              ) -> Tuple[Tuple[SpectrumEntry, ...], Tuple[ConjugacyClass, ...]]:
    classes = [c for c in _build_classes(candidates, cutoff, settings, conjugators, exact)
               if c.primitive]
    return _cluster(classes, settings.length_tol), tuple(classes)


def enumerate_spectrum(G: GroupPresentation, cutoff: float, max_depth: int,
                       threads: int = 1, settings: Optional[Settings] = None) -> LengthSpectrum:
    """
    Primitive oriented length spectrum of G up to `cutoff`.

    Args:
        G (GroupPresentation): Surface group
        cutoff (float): Largest geodesic length kept
        max_depth (int): Deepest word length enumerated
        threads (int): Worker threads; the result does not depend on it
        settings (Settings): Tolerances and word budget

    Returns:
        LengthSpectrum: Spectrum with its stabilization flag
    """
    settings = settings or load_settings()
    if not cutoff > 0:
        raise DomainError(f"cutoff must be positive, got {cutoff}")
    if max_depth < 1:
        raise DomainError(f"max_depth must be at least 1, got {max_depth}")
    required = free_word_count(G.rank, max_depth)
    if required > settings.word_budget:
        raise WordBudgetExceeded(required, settings.word_budget)

    letters = G.letter_matrices()
    workers = max(1, int(threads))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        subtrees = list(pool.map(
            lambda first: _collect_subtree(letters, first, max_depth, cutoff, settings),
            range(letters.shape[0])))

    candidates: Dict[Word, int] = {}
    for found in subtrees:
        for raw, depth in found:
            canonical = Word(raw).canonical_rotation()
            if depth < candidates.get(canonical, max_depth + 1):
                candidates[canonical] = depth
    logger.debug("%s: %d candidate cyclic words below %.6g", G.label, len(candidates), cutoff)

    conjugators = _conjugators(G, settings.conjugator_depth)
    exact = ExactWords(G)
    entries, classes = _spectrum_from_candidates(candidates, cutoff, settings, conjugators, exact)
    shallower = {w: d for w, d in candidates.items() if d < max_depth}
    prev_entries, _ = _spectrum_from_candidates(shallower, cutoff, settings, conjugators, exact)
    previous = LengthSpectrum(prev_entries, cutoff, max_depth - 1, False, G.genus)
    spectrum = LengthSpectrum(entries, cutoff, max_depth, False, G.genus, classes, G.label)
    stabilized = spectrum.same_entries(previous, settings.length_tol)
    if not stabilized:
        logger.warning("%s: spectrum below %.6g still changing at depth %d",
                       G.label, cutoff, max_depth)
    return LengthSpectrum(entries, cutoff, max_depth, stabilized, G.genus, classes, G.label)


def count_geodesics(spec: LengthSpectrum, u: float) -> int:
    """
    Number of oriented primitive geodesics of length <= u.

    Raises:
        RangeError: u lies beyond the spectrum cutoff
    """
    if u > spec.cutoff + 1e-12:
        raise RangeError(f"u={u} exceeds the spectrum cutoff {spec.cutoff}")
    return sum(e.multiplicity for e in spec.entries if e.length <= u + 1e-12)


def pgt_log_bound(g: int, ell_X: float, u: float) -> ExtendedLog:
    """
    Log of the primitive prime-geodesic envelope e^{80 pi (g-1)/ell_X + u}.

    The implied constant is taken to be 1, so the bound is one-sided and loose.
    """
    if g < 2:
        raise DomainError(f"genus must be at least 2, got {g}")
    if not ell_X > 0:
        raise DomainError(f"systole must be positive, got {ell_X}")
    if u < 0:
        raise DomainError(f"u must be non-negative, got {u}")
    return ExtendedLog.finite(80.0 * math.pi * (g - 1) / ell_X + u)
