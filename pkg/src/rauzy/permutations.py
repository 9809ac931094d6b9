"""Irreducible permutations, the two elementary moves on them, and their
closure graphs.

Permutations are stored in one-line notation as the image tuple
(pi(1), ..., pi(m)) with values in 1..m, and printed space-separated,
so "3 2 1" means pi(1)=3, pi(2)=2, pi(3)=1.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

__all__ = [
    "Permutation",
    "is_irreducible",
    "apply_a",
    "apply_b",
    "apply_op",
    "RauzyClassGraph",
    "rauzy_class",
]


@dataclass(frozen=True, order=True)
class Permutation:
    """A permutation of {1..m} in one-line notation.

    >>> p = Permutation.parse("3 2 1")
    >>> p(1), p.inverse_of(3), p.m
    (3, 1, 3)
    >>> str(p)
    '3 2 1'
    """

    images: tuple[int, ...]
    _inv: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        images = tuple(self.images)
        m = len(images)
        if m < 2 or sorted(images) != list(range(1, m + 1)):
            raise ValueError(f"not a permutation of 1..m with m >= 2: {images!r}")
        inv = [0] * m
        for j, v in enumerate(images):
            inv[v - 1] = j + 1
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "_inv", tuple(inv))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        return cls(tuple(int(tok) for tok in text.split()))

    @property
    def m(self) -> int:
        return len(self.images)

    def __call__(self, j: int) -> int:
        return self.images[j - 1]

    def inverse_of(self, v: int) -> int:
        """The position j with pi(j) = v."""
        return self._inv[v - 1]

    def __str__(self) -> str:
        return " ".join(str(v) for v in self.images)


def is_irreducible(pi: Permutation) -> bool:
    """True iff no proper prefix {1..k}, k < m, is invariant.

    >>> is_irreducible(Permutation.parse("2 1"))
    True
    >>> is_irreducible(Permutation.parse("1 2"))
    False
    >>> is_irreducible(Permutation.parse("2 1 3"))
    False
    """
    running_max = 0
    for k, v in enumerate(pi.images[:-1], start=1):
        running_max = max(running_max, v)
        if running_max == k:
            return False
    return True


def _require_irreducible(pi: Permutation) -> None:
    if not is_irreducible(pi):
        raise ValueError(f"permutation {pi} is reducible")


def apply_a(pi: Permutation) -> Permutation:
    """The first elementary move.

    Positions up to pi^{-1}(m) keep their images, the image of m is inserted
    right after, and the remaining images shift one slot right.

    >>> str(apply_a(Permutation.parse("3 2 1")))
    '3 1 2'
    """
    _require_irreducible(pi)
    m = pi.m
    k = pi.inverse_of(m)
    images = pi.images[:k] + (pi(m),) + pi.images[k:-1]
    return Permutation(images)


def apply_b(pi: Permutation) -> Permutation:
    """The second elementary move.

    Images at most pi(m) stay, images strictly between pi(m) and m move up
    by one, and the image m becomes pi(m) + 1.

    >>> str(apply_b(Permutation.parse("3 2 1")))
    '2 3 1'
    """
    _require_irreducible(pi)
    m = pi.m
    last = pi(m)
    images = []
    for v in pi.images:
        if v <= last:
            images.append(v)
        elif v < m:
            images.append(v + 1)
        else:
            images.append(last + 1)
    return Permutation(tuple(images))


def apply_op(op: str, pi: Permutation) -> Permutation:
    if op == "a":
        return apply_a(pi)
    if op == "b":
        return apply_b(pi)
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class RauzyClassGraph:
    """Closure of a permutation under both moves, with one edge per move.

    Nodes are ordered by breadth-first discovery with lexicographic
    tie-breaking inside each layer, so the order is deterministic.
    """

    nodes: tuple[Permutation, ...]
    a_edge: tuple[int, ...]
    b_edge: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    def index(self, pi: Permutation) -> int:
        return self.nodes.index(pi)

    def edge(self, i: int, op: str) -> int:
        return self.a_edge[i] if op == "a" else self.b_edge[i]

    def edges(self) -> Iterator[tuple[Permutation, str, Permutation]]:
        for i, src in enumerate(self.nodes):
            yield src, "a", self.nodes[self.a_edge[i]]
            yield src, "b", self.nodes[self.b_edge[i]]

    def edge_csv(self) -> str:
        """Edge list as CSV lines `src,op,dst` (text-form permutations)."""
        lines = ["src,op,dst"]
        for src, op, dst in self.edges():
            lines.append(f"{src},{op},{dst}")
        return "\n".join(lines) + "\n"


def rauzy_class(pi: Permutation) -> RauzyClassGraph:
    """Breadth-first closure of ``pi`` under both moves.

    >>> len(rauzy_class(Permutation.parse("2 1")))
    1
    >>> len(rauzy_class(Permutation.parse("3 2 1")))
    3
    """
    _require_irreducible(pi)
    seen: dict[Permutation, None] = {pi: None}
    order: list[Permutation] = [pi]
    frontier = deque([pi])
    while frontier:
        layer_new: list[Permutation] = []
        for _ in range(len(frontier)):
            node = frontier.popleft()
            for op in ("a", "b"):
                image = apply_op(op, node)
                if image not in seen:
                    seen[image] = None
                    layer_new.append(image)
        for image in sorted(layer_new):
            order.append(image)
            frontier.append(image)
    index = {node: i for i, node in enumerate(order)}
    a_edge = tuple(index[apply_a(node)] for node in order)
    b_edge = tuple(index[apply_b(node)] for node in order)
    return RauzyClassGraph(tuple(order), a_edge, b_edge)


def all_irreducible(m: int) -> list[Permutation]:
    """All irreducible permutations of {1..m}, lexicographically ordered."""
    from itertools import permutations as iter_perms

    out = []
    for images in iter_perms(range(1, m + 1)):
        p = Permutation(images)
        if is_irreducible(p):
            out.append(p)
    return out
