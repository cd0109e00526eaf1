"""
Surface Group Presentations

Words in a finitely generated group, Fuchsian group presentations of
compact surfaces, the regular-octagon (Bolza) surface, genus-2 surfaces
from Fenchel-Nielsen coordinates, and the JSON group-file format.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (ConstructionError, DomainError, NotHyperbolicError,
                     RelatorViolationError, SchemaError)
from .moebius import IsometryKind, MoebiusElement, classify

logger = logging.getLogger(__name__)

RELATOR_TOL = 1e-9


def letter_key(letter: int) -> int:
    """Sort key giving the letter order 1, -1, 2, -2, ..."""
    return 2 * abs(letter) - (1 if letter > 0 else 0)


def letter_index(letter: int) -> int:
    """Position of a letter in the order 1, -1, 2, -2, ... (0-based)."""
    return letter_key(letter) - 1


def index_letter(index: int) -> int:
    return (index // 2 + 1) * (1 if index % 2 == 0 else -1)


def free_reduce(letters: Iterable[int]) -> Tuple[int, ...]:
    """Cancel adjacent inverse pairs."""
    stack: List[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """A freely reduced word; letter k > 0 is generator k, -k its inverse."""

    letters: Tuple[int, ...]

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in letters):
            raise DomainError("word letters must be nonzero")
        if free_reduce(letters) != letters:
            raise DomainError(f"word {letters} is not freely reduced")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def reduce(cls, letters: Iterable[int]) -> "Word":
        return cls(free_reduce(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def sort_key(self) -> Tuple[int, ...]:
        return tuple(letter_key(x) for x in self.letters)

    @property
    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]

    def cyclic_reduction(self) -> "Word":
        letters = self.letters
        while len(letters) >= 2 and letters[0] == -letters[-1]:
            letters = letters[1:-1]
        return Word(letters)

    def rotations(self) -> List["Word"]:
        n = len(self.letters)
        return [Word(self.letters[k:] + self.letters[:k]) for k in range(max(n, 1))]

    def canonical_rotation(self) -> "Word":
        """Lexicographically least rotation of the cyclic reduction."""
        reduced = self.cyclic_reduction()
        return min(reduced.rotations(), key=Word.sort_key)

    def primitive_root(self) -> Tuple["Word", int]:
        """
        Split a cyclically reduced word as root**power with power maximal.

        Returns:
            Tuple[Word, int]: (root, power); power is 1 for primitive words
        """
        n = len(self.letters)
        for p in range(1, n):
            if n % p == 0 and all(self.letters[i] == self.letters[i % p] for i in range(n)):
                return Word(self.letters[:p]), n // p
        return self, 1

    def __str__(self) -> str:
        return " ".join(str(x) for x in self.letters)


@dataclass(frozen=True)
class GroupPresentation:
    """
    Generators and relators of a surface group.

    Attributes:
        generators (Tuple[MoebiusElement]): Generator matrices
        relators (Tuple[Word]): Relator words, each equal to the identity
        genus (int): Genus of the quotient surface
        label (str): Human-readable provenance
        pinched_lengths (Tuple[float]): Lengths of pinched curves in a family
        fn_coordinates (Optional[Tuple[float]]): Fenchel-Nielsen data if built from it
    """

    generators: Tuple[MoebiusElement, ...]
    relators: Tuple[Word, ...]
    genus: int
    label: str
    pinched_lengths: Tuple[float, ...] = ()
    fn_coordinates: Optional[Tuple[float, ...]] = None
    _letters: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.genus < 2:
            raise DomainError(f"genus must be at least 2, got {self.genus}")
        if not self.generators:
            raise DomainError("presentation needs at least one generator")
        rank = len(self.generators)
        for i, w in enumerate(self.relators):
            if any(abs(x) > rank for x in w.letters):
                raise SchemaError(f"relator {i} uses a letter outside 1..{rank}")
        mats = []
        for g in self.generators:
            m = g.as_array()
            mats.append(m)
            mats.append(g.inverse().as_array())
        object.__setattr__(self, "_letters", np.array(mats))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def letter_matrices(self) -> np.ndarray:
        """Matrices of the letters 1, -1, 2, -2, ... stacked as (2*rank, 2, 2)."""
        return self._letters

    def evaluate(self, word: Union[Word, Sequence[int]]) -> MoebiusElement:
        letters = word.letters if isinstance(word, Word) else tuple(word)
        result = MoebiusElement.identity()
        for x in letters:
            g = self.generators[abs(x) - 1]
            result = result @ (g if x > 0 else g.inverse())
        return result

    def relator_residual(self, index: int) -> float:
        """Entrywise distance of relator `index` from the identity in PSL(2,R)."""
        r = self.evaluate(self.relators[index])
        return max(abs(r.a - 1.0), abs(r.b), abs(r.c), abs(r.d - 1.0))

    def validate(self, tol: float = RELATOR_TOL) -> "GroupPresentation":
        """
        Check that generators are hyperbolic and relators trivial.

        Raises:
            NotHyperbolicError: A generator is not hyperbolic
            RelatorViolationError: A relator misses the identity by more than tol
        """
        for i, g in enumerate(self.generators):
            kind = classify(g).kind
            if kind is not IsometryKind.HYPERBOLIC:
                raise NotHyperbolicError(f"generator {i} of '{self.label}' is {kind.value}")
        for i in range(len(self.relators)):
            residual = self.relator_residual(i)
            if residual > tol:
                raise RelatorViolationError(i, residual, self.label)
        return self


# Regular octagon with angles pi/4, opposite sides paired.
def builtin_octagon() -> GroupPresentation:
    """
    Bolza surface group from the regular octagon side pairings.

    Generator k translates along the geodesic through i at angle k*pi/4
    (seen in the disk model) by 2*arccosh(1 + sqrt(2)).

    Returns:
        GroupPresentation: Genus-2 presentation with 4 generators
    """
    c = 1.0 + math.sqrt(2.0)
    s = math.sqrt(c * c - 1.0)
    generators = []
    for k in range(4):
        phi = k * math.pi / 4.0
        generators.append(MoebiusElement.normalized(
            c + s * math.cos(phi), -s * math.sin(phi),
            -s * math.sin(phi), c - s * math.cos(phi)))
    relator = Word((1, -2, 3, -4, -1, 2, -3, 4))
    return GroupPresentation(tuple(generators), (relator,), 2, "octagon").validate()


def _translation(x: float) -> np.ndarray:
    return np.diag([math.exp(x / 2.0), math.exp(-x / 2.0)])


def _rotation(theta: float) -> np.ndarray:
    ch, sh = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[ch, sh], [-sh, ch]])


_MIRROR = np.diag([-1.0, 1.0])


def _reflection(frame: np.ndarray) -> np.ndarray:
    """Reflection in the image of the imaginary axis under `frame` (det -1)."""
    return frame @ _MIRROR @ np.linalg.inv(frame)


def _axis_translation(frame: np.ndarray, x: float) -> np.ndarray:
    return frame @ _translation(x) @ np.linalg.inv(frame)


def _seam_length(a: float, b: float, c: float) -> float:
    """Side of a right-angled hexagon opposite the side of half-length c."""
    value = (math.cosh(c) + math.cosh(a) * math.cosh(b)) / (math.sinh(a) * math.sinh(b))
    if not value >= 1.0:
        raise ConstructionError(f"hexagon side has cosh {value!r} < 1")
    return math.acosh(value)


def build_genus2_from_fn(fn_params: Sequence[float]) -> GroupPresentation:
    """
    Genus-2 surface from Fenchel-Nielsen coordinates.

    Two congruent pairs of pants with boundary lengths l1, l2, l3 are glued
    along all three boundaries. Each pair of pants is two right-angled
    hexagons; the pants group is generated by products of reflections in
    the hexagon seams. The twist angles theta_i (radians) displace the
    gluing along curve i by theta_i * l_i / (2 pi).

    Args:
        fn_params (Sequence[float]): (l1, l2, l3, theta1, theta2, theta3)

    Returns:
        GroupPresentation: Generators (A1, A2, B2, B3); A1, A2 and
        (A1 A2)^-1 represent the three pants curves
    """
    params = tuple(float(x) for x in fn_params)
    if len(params) != 6:
        raise DomainError(f"expected six Fenchel-Nielsen parameters, got {len(params)}")
    lengths, twists = params[:3], params[3:]
    if any(not (x > 0 and math.isfinite(x)) for x in lengths):
        raise DomainError(f"pants curve lengths must be positive, got {lengths}")
    if any(not math.isfinite(x) for x in twists):
        raise DomainError(f"twists must be finite, got {twists}")

    h1, h2, h3 = (x / 2.0 for x in lengths)
    sides = [h1, _seam_length(h1, h2, h3), h2, _seam_length(h2, h3, h1),
             h3, _seam_length(h3, h1, h2)]

    # Walk the hexagon: frame k sits at the start of side k, facing along it.
    frames = [np.eye(2)]
    for length in sides[:-1]:
        frames.append(frames[-1] @ _translation(length) @ _rotation(math.pi / 2.0))

    seam12, seam23, seam31 = (_reflection(frames[k]) for k in (1, 3, 5))
    a1 = seam31 @ seam12
    a2 = seam12 @ seam23

    shifts = [theta * length / (2.0 * math.pi) for theta, length in zip(twists, lengths)]
    mirrors = [_reflection(frames[k]) @ _axis_translation(frames[k], t)
               for k, t in zip((0, 2, 4), shifts)]
    b2 = mirrors[0] @ mirrors[1]
    b3 = mirrors[0] @ mirrors[2]

    generators = tuple(MoebiusElement.from_array(m) for m in (a1, a2, b2, b3))
    relator = Word((1, 3, 2, -3, 4, -2, -1, -4))
    label = "fn({})".format(",".join(f"{x:.17g}" for x in params))
    presentation = GroupPresentation(generators, (relator,), 2, label, fn_coordinates=params)
    presentation.validate()

    for i, g in enumerate((generators[0], generators[1],
                           (generators[0] @ generators[1]).inverse())):
        expected = 2.0 * math.cosh(lengths[i] / 2.0)
        if abs(abs(g.trace) - expected) > RELATOR_TOL * max(1.0, expected):
            raise ConstructionError(
                f"pants curve {i + 1} has trace {g.trace!r}, expected {expected!r}")
    logger.debug("built %s", label)
    return presentation


def _generator_from_json(index: int, raw) -> MoebiusElement:
    if not (isinstance(raw, list) and len(raw) == 4
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
        raise SchemaError(f"generator {index} must be a list of four numbers")
    a, b, c, d = (float(v) for v in raw)
    det = a * d - b * c
    if abs(det - 1.0) > RELATOR_TOL:
        raise SchemaError(f"generator {index} has determinant {det!r}, expected 1")
    return MoebiusElement.normalized(a, b, c, d)


def presentation_from_dict(doc: dict) -> GroupPresentation:
    """Build and validate a presentation from a parsed group-file document."""
    if not isinstance(doc, dict):
        raise SchemaError("group file must hold a JSON object")
    missing = [k for k in ("label", "genus", "generators", "relators") if k not in doc]
    if missing:
        raise SchemaError(f"group file is missing {', '.join(missing)}")
    if not isinstance(doc["genus"], int) or isinstance(doc["genus"], bool):
        raise SchemaError("genus must be an integer")
    if not isinstance(doc["generators"], list) or not isinstance(doc["relators"], list):
        raise SchemaError("generators and relators must be lists")

    generators = tuple(_generator_from_json(i, g) for i, g in enumerate(doc["generators"]))
    relators = []
    for i, raw in enumerate(doc["relators"]):
        if not (isinstance(raw, list) and all(isinstance(x, int) for x in raw)):
            raise SchemaError(f"relator {i} must be a list of signed integers")
        try:
            relators.append(Word(tuple(raw)))
        except DomainError as exc:
            raise SchemaError(f"relator {i}: {exc}") from None
    presentation = GroupPresentation(generators, tuple(relators), doc["genus"], str(doc["label"]))
    return presentation.validate()


def parse_group_file(path: Union[str, Path]) -> GroupPresentation:
    """
    Load a group file.

    Args:
        path (str | Path): JSON document with label, genus, generators, relators

    Returns:
        GroupPresentation: Validated presentation
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return presentation_from_dict(doc)


def presentation_to_dict(presentation: GroupPresentation) -> dict:
    return {
        "label": presentation.label,
        "genus": presentation.genus,
        "generators": [list(g.as_tuple()) for g in presentation.generators],
        "relators": [list(w.letters) for w in presentation.relators],
    }


def export_group_file(presentation: GroupPresentation, path: Union[str, Path]) -> Path:
    """Write a presentation in the group-file format."""
    path = Path(path)
    path.write_text(json.dumps(presentation_to_dict(presentation), indent=2) + "\n",
                    encoding="utf-8")
    return path
