"""The renormalization dynamics on length vectors.

A point is a positive length vector on the unit simplex together with an
irreducible permutation.  One elementary step subtracts the smaller of the
two comparison lengths (the last one, and the one occupying the last image
slot) from the larger and renormalizes; the branch is always the one whose
inverse matrix action keeps all lengths positive, which forces move 'a' on
plus-type points and 'b' on minus-type points.  The accelerated step
iterates until the comparison type flips.

Two numeric backends share the code path: exact rationals (ground truth on
short horizons) and floats with per-step renormalization (long Monte-Carlo
horizons).  A point is exact iff its entries are ``fractions.Fraction``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .errors import (
    CapExceededError,
    DenominatorOverflowError,
    IncompatibleWordError,
    NonGenericError,
)
from .matrices import mat_vec, word_matrix
from .permutations import Permutation, apply_a, apply_b, is_irreducible
from .words import Letter, Word

__all__ = [
    "PLUS",
    "MINUS",
    "BOUNDARY",
    "DEFAULT_CAP",
    "PRECISION_FLOOR",
    "IetPoint",
    "StepRecord",
    "classify",
    "rauzy_step",
    "zorich_step",
    "OrbitResult",
    "orbit",
    "hilbert_metric",
    "inverse_branch",
    "encode_prefix",
    "cylinder_contains",
    "is_compatible_point",
]

PLUS = "plus"
MINUS = "minus"
BOUNDARY = "boundary"

DEFAULT_CAP = 1 << 20
PRECISION_FLOOR = 1e-13
DEFAULT_DENOMINATOR_BITS = 1 << 18

Number = Union[float, Fraction]


@dataclass(frozen=True)
class IetPoint:
    """A normalized length vector paired with its permutation."""

    lam: tuple[Number, ...]
    pi: Permutation

    def __post_init__(self):
        lam = tuple(self.lam)
        if len(lam) != self.pi.m:
            raise ValueError("length vector and permutation dimensions differ")
        if any(v <= 0 for v in lam):
            raise ValueError("lengths must be strictly positive")
        if not is_irreducible(self.pi):
            raise ValueError(f"permutation {self.pi} is reducible")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_floats(cls, lam: Sequence[float], pi: Permutation) -> "IetPoint":
        s = math.fsum(lam)
        return cls(tuple(float(v) / s for v in lam), pi)

    @classmethod
    def from_rationals(cls, lam: Sequence, pi: Permutation) -> "IetPoint":
        fracs = [Fraction(v) for v in lam]
        s = sum(fracs)
        return cls(tuple(v / s for v in fracs), pi)

    @property
    def exact(self) -> bool:
        return isinstance(self.lam[0], Fraction)

    @property
    def m(self) -> int:
        return self.pi.m


@dataclass(frozen=True)
class StepRecord:
    """One accelerated step: which move fired, how often, from where, and
    the flow time spent (the accumulated -log of the kept mass)."""

    op: str
    count: int
    start: Permutation
    flow_time: float

    def to_letter(self) -> Letter:
        return Letter(self.op, self.count, self.start)


def classify(x: IetPoint):
    """plus / minus / boundary by comparing the two pivot lengths."""
    last = x.lam[-1]
    pivot = x.lam[x.pi.inverse_of(x.m) - 1]
    if pivot > last:
        return PLUS
    if last > pivot:
        return MINUS
    return BOUNDARY


def _neg_log(s: Number) -> float:
    """-log(s) for a float or an (arbitrarily long) rational in (0, 1]."""
    if isinstance(s, Fraction):
        return math.log(s.denominator) - math.log(s.numerator)
    return -math.log(s)


def rauzy_step(x: IetPoint) -> tuple[IetPoint, str]:
    """One elementary step; returns the new point and the branch label.

    Raises NonGenericError on a tie of the pivot lengths.
    """
    side = classify(x)
    if side == BOUNDARY:
        raise NonGenericError("pivot lengths tie; elementary step undefined")
    lam = x.lam
    m = x.m
    k = x.pi.inverse_of(m)  # 1-based slot of the last image
    if side == PLUS:
        cut = lam[-1]
        new = lam[: k - 1] + (lam[k - 1] - cut, cut) + lam[k:-1]
        pi = apply_a(x.pi)
        op = "a"
    else:
        cut = lam[k - 1]
        new = lam[:-1] + (lam[-1] - cut,)
        pi = apply_b(x.pi)
        op = "b"
    s = sum(new)
    return IetPoint(tuple(v / s for v in new), pi), op


def zorich_step(x: IetPoint, cap: int = DEFAULT_CAP) -> tuple[IetPoint, StepRecord]:
    """Elementary steps until the comparison type flips.

    The record's (op, count, start) triple is the point's first itinerary
    letter; the output type is always opposite to the input type.

    Normalization is deferred to the end of the run (the branch choices only
    compare entries, so they are scale-free); with exact entries the result
    is identical to composing :func:`rauzy_step`, and in floats it matches
    the array kernel bit for bit.
    """
    side = classify(x)
    if side == BOUNDARY:
        raise NonGenericError("boundary point; accelerated step undefined")
    start = x.pi
    plus = side == PLUS
    op = "a" if plus else "b"
    lam = list(x.lam)
    pi = x.pi
    m = x.m
    count = 0
    while True:
        k = pi.inverse_of(m)  # 1-based slot of the last image
        if plus:
            tmp = lam[-1]
            lam[k - 1] -= tmp
            lam.pop()
            lam.insert(k, tmp)
            pi = apply_a(pi)
        else:
            lam[-1] -= lam[k - 1]
            pi = apply_b(pi)
        count += 1
        pivot = lam[pi.inverse_of(m) - 1]
        last = lam[-1]
        if pivot == last:
            raise NonGenericError("orbit hit a boundary point", step=count)
        if (pivot > last) != plus:
            break
        if count >= cap:
            raise CapExceededError(f"accelerated step exceeded cap {cap}")
    s = sum(lam)
    point = IetPoint(tuple(v / s for v in lam), pi)
    return point, StepRecord(op, count, start, _neg_log(s))


class OrbitResult(Sequence):
    """Sequence of (point, record) pairs plus float-precision bookkeeping."""

    def __init__(self, pairs, precision_events):
        self._pairs = pairs
        self.precision_events = precision_events

    def __len__(self) -> int:
        return len(self._pairs)

    def __getitem__(self, i):
        return self._pairs[i]

    def __iter__(self) -> Iterator:
        return iter(self._pairs)

    def records(self) -> list[StepRecord]:
        return [rec for _, rec in self._pairs]

    def word(self) -> Word:
        return Word(tuple(rec.to_letter() for _, rec in self._pairs))


def orbit(
    x0: IetPoint,
    steps: int,
    cap: int = DEFAULT_CAP,
    max_denominator_bits: int = DEFAULT_DENOMINATOR_BITS,
) -> OrbitResult:
    """``steps`` successive accelerated steps from ``x0``.

    Float backend: records a precision event at every step whose smallest
    length drops below 1e-13.  Exact backend: raises DenominatorOverflowError
    once denominators outgrow ``max_denominator_bits``.  NonGeneric and cap
    errors carry the failing step index.
    """
    pairs = []
    events = []
    x = x0
    exact = x0.exact
    for k in range(steps):
        try:
            x, rec = zorich_step(x, cap)
        except NonGenericError as e:
            raise NonGenericError(str(e), step=k) from None
        except CapExceededError as e:
            raise CapExceededError(str(e), step=k) from None
        pairs.append((x, rec))
        if exact:
            bits = max(v.denominator.bit_length() for v in x.lam)
            if bits > max_denominator_bits:
                raise DenominatorOverflowError(
                    f"denominators reached {bits} bits", step=k
                )
        elif min(x.lam) < PRECISION_FLOOR:
            events.append(k)
    return OrbitResult(pairs, events)


def hilbert_metric(x: IetPoint, y: IetPoint) -> float:
    """Projective distance log(max_i lam_i/mu_i * max_j mu_j/lam_j);
    +inf across different permutations by convention."""
    if x.pi != y.pi:
        return math.inf
    if x.exact and y.exact:
        from .matrices import log_ratio

        best_p, best_q = 1, 1
        worst_p, worst_q = 1, 1
        for u, v in zip(x.lam, y.lam):
            p, q = u.numerator * v.denominator, v.numerator * u.denominator
            if p * best_q > q * best_p:
                best_p, best_q = p, q
            if p * worst_q < q * worst_p:
                worst_p, worst_q = p, q
        return log_ratio(best_p * worst_q, best_q * worst_p)
    hi = -math.inf
    lo = math.inf
    for u, v in zip(x.lam, y.lam):
        t = math.log(float(u) / float(v))
        hi = max(hi, t)
        lo = min(lo, t)
    return hi - lo


def inverse_branch(w: Word, x: IetPoint) -> IetPoint:
    """Map ``x`` into the cylinder of ``w`` by the word's matrix action.

    The word's chain must end at the point's permutation; the image starts
    at the word's first letter.  The empty word is the identity.
    """
    if len(w) == 0:
        return x
    if w.end_permutation() != x.pi:
        raise IncompatibleWordError(
            f"word ends at {w.end_permutation()}, point sits at {x.pi}"
        )
    A = word_matrix(w)
    image = mat_vec(A, x.lam)
    s = sum(image)
    return IetPoint(tuple(v / s for v in image), w.start_permutation())


def encode_prefix(x: IetPoint, n_letters: int, cap: int = DEFAULT_CAP) -> Word:
    """First ``n_letters`` itinerary letters of ``x``."""
    letters = []
    current = x
    for k in range(n_letters):
        try:
            current, rec = zorich_step(current, cap)
        except NonGenericError as e:
            raise NonGenericError(str(e), step=k) from None
        except CapExceededError as e:
            raise CapExceededError(str(e), step=k) from None
        letters.append(rec.to_letter())
    return Word(tuple(letters))


def cylinder_contains(w: Word, x: IetPoint, cap: int = DEFAULT_CAP) -> bool:
    """Whether the point's itinerary starts with ``w`` letter-for-letter."""
    return encode_prefix(x, len(w), cap) == w


def is_compatible_point(w: Word, x: IetPoint) -> bool:
    """Whether the word's last letter matches the point's data: the chain
    must land on the point's permutation and the letter type must match the
    point's comparison type ('a' with plus, 'b' with minus)."""
    if len(w) == 0:
        raise ValueError("empty word has no last letter")
    last = w.letters[-1]
    side = classify(x)
    if side == BOUNDARY:
        return False
    if last.end_permutation() != x.pi:
        return False
    return (last.c == "a") == (side == PLUS)
