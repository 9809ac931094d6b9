"""The symbolic alphabet, compatible words, and word-level searches.

A letter (c, n, pi) records one accelerated step: the move type, how many
times it fired, and the permutation it started from.  Adjacent letters must
chain (the first letter's moves must land on the next letter's permutation)
and alternate type; that is the compatibility function.

Text format: ``c:n@images`` tokens joined by ``;``, e.g. ``a:1@2 1;b:1@2 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import IncompatibleWordError, NotFoundError
from .matrices import IntMatrix, is_positive, letter_matrix, log_ratio, mat_mul
from .permutations import Permutation, RauzyClassGraph, apply_op, is_irreducible

__all__ = [
    "Letter",
    "Word",
    "letter_compat",
    "concat",
    "word_action",
    "parse_word",
    "find_positive_word",
    "cylinder_geometry",
]


@dataclass(frozen=True, order=True)
class Letter:
    c: str
    n: int
    pi: Permutation

    def __post_init__(self):
        if self.c not in ("a", "b"):
            raise ValueError(f"letter type must be 'a' or 'b', got {self.c!r}")
        if self.n < 1:
            raise ValueError(f"letter count must be >= 1, got {self.n}")
        if not is_irreducible(self.pi):
            raise ValueError(f"letter permutation {self.pi} is reducible")

    def end_permutation(self) -> Permutation:
        """Where the letter's moves land: c^n applied to pi."""
        pi = self.pi
        for _ in range(self.n):
            pi = apply_op(self.c, pi)
        return pi

    def __str__(self) -> str:
        return f"{self.c}:{self.n}@{self.pi}"


def letter_compat(w1: Letter, w2: Letter) -> int:
    """1 iff w1 chains onto w2 (c1^n1 pi1 = pi2) with a type change."""
    if w1.c == w2.c:
        return 0
    return 1 if w1.end_permutation() == w2.pi else 0


@dataclass(frozen=True)
class Word:
    """A finite compatible string of letters; validated eagerly."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        for u, v in zip(letters, letters[1:]):
            if not letter_compat(u, v):
                raise IncompatibleWordError(f"letters do not chain: {u} ; {v}")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __add__(self, other: "Word") -> "Word":
        return concat(self, other)

    def start_permutation(self) -> Permutation:
        if not self.letters:
            raise ValueError("empty word has no start permutation")
        return self.letters[0].pi

    def end_permutation(self) -> Permutation:
        if not self.letters:
            raise ValueError("empty word has no end permutation")
        return self.letters[-1].end_permutation()

    def matrix(self, m: int | None = None) -> IntMatrix:
        from .matrices import word_matrix

        return word_matrix(self, m)

    def __str__(self) -> str:
        return ";".join(str(letter) for letter in self.letters)


def concat(u: Word, v: Word) -> Word:
    """Concatenation; raises unless the junction letters are compatible."""
    if not u.letters:
        return v
    if not v.letters:
        return u
    if not letter_compat(u.letters[-1], v.letters[0]):
        raise IncompatibleWordError(
            f"junction letters do not chain: {u.letters[-1]} ; {v.letters[0]}"
        )
    return Word(u.letters + v.letters)


def word_action(w: Word, pi: Permutation) -> Optional[Permutation]:
    """Apply the word's letters in order, or None when undefined.

    The first letter must start exactly at ``pi``; each later letter at the
    chain value.  A mismatch anywhere gives None rather than an error.
    """
    current = pi
    for letter in w:
        if letter.pi != current:
            return None
        current = letter.end_permutation()
    return current


def parse_word(text: str) -> Word:
    """Inverse of str(word); empty string parses to the empty word."""
    text = text.strip()
    if not text:
        return Word(())
    letters = []
    for token in text.split(";"):
        head, pi_text = token.split("@")
        c, n_text = head.split(":")
        letters.append(Letter(c.strip(), int(n_text), Permutation.parse(pi_text)))
    return Word(tuple(letters))


def find_positive_word(
    graph: RauzyClassGraph, max_len: int, count_bound: int = 3
) -> Word:
    """Shortest compatible word whose matrix has all entries positive.

    Ties break lexicographically on the letter sequence ('a' < 'b', then the
    count, then the permutation), so the result is deterministic.  Letter
    counts are capped at ``count_bound``: positivity is reached by short
    alternating words, so the cap is a search bound, not a restriction of
    the alphabet.
    """
    if max_len >= 1:
        first = sorted(
            Letter(c, n, pi)
            for c in ("a", "b")
            for n in range(1, count_bound + 1)
            for pi in graph.nodes
        )
        for length in range(1, max_len + 1):
            found = _search_level(first, length, count_bound)
            if found is not None:
                return Word(found)
    raise NotFoundError(
        f"no positive word of length <= {max_len} with counts <= {count_bound}"
    )


def _search_level(first, length, count_bound):
    """Depth-first lexicographic scan of words of exactly ``length`` letters."""

    def extend(prefix, matrix):
        if len(prefix) == length:
            return prefix if is_positive(matrix) else None
        last = prefix[-1]
        c = "b" if last.c == "a" else "a"
        pi = last.end_permutation()
        for n in range(1, count_bound + 1):
            letter = Letter(c, n, pi)
            hit = extend(prefix + (letter,), mat_mul(matrix, letter_matrix(letter)))
            if hit is not None:
                return hit
        return None

    for letter in first:
        hit = extend((letter,), letter_matrix(letter))
        if hit is not None:
            return hit
    return None


def cylinder_geometry(w: Word, m: int | None = None):
    """Vertices and projective size of the set of points whose itinerary
    starts with ``w``.

    Returns (vertices, diameter): the normalized matrix columns (exact
    rationals) and the largest pairwise projective distance between them,
    +inf when a vertex degenerates onto the simplex boundary.  The empty
    word gives the full simplex corners and +inf.
    """
    from .matrices import normalized_columns, word_matrix

    A = word_matrix(w, m)
    vertices = normalized_columns(A)
    diameter = 0.0
    for i in range(len(vertices)):
        for j in range(i + 1, len(vertices)):
            diameter = max(diameter, _hilbert_pair(vertices[i], vertices[j]))
            if math.isinf(diameter):
                return vertices, math.inf
    return vertices, diameter


def _hilbert_pair(u, v) -> float:
    # exact cross-ratio selection keeps tiny diameters accurate even when
    # the underlying integers are huge
    best_p, best_q = 1, 1
    worst_p, worst_q = 1, 1
    for x, y in zip(u, v):
        if x == 0 and y == 0:
            continue
        if y == 0 or x == 0:
            return math.inf
        p, q = x.numerator * y.denominator, y.numerator * x.denominator
        if p * best_q > q * best_p:
            best_p, best_q = p, q
        if p * worst_q < q * worst_p:
            worst_p, worst_q = p, q
    return log_ratio(best_p * worst_q, best_q * worst_p)
