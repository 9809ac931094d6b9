"""Suspension data over the length dynamics: rectangles, the area-preserving
step, the scaling flow, and the first-return map that lifts the accelerated
induction.

A rectangle is (lam, h, a, pi) with widths lam, heights h and zipper
offsets a subject to a linear system and sign constraints; the auxiliary
boundary values a_0 = h_0 = a_{m+1} = h_{m+1} = 0 are implicit, with
pi(0) = 0 and pi^{-1}(m+1) = m+1.  Unit-area representatives with |lam| = 1
form the transversal the flow returns to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import CapExceededError, NonGenericError, RejectionBudgetError
from .induction import (
    BOUNDARY,
    DEFAULT_CAP,
    MINUS,
    PLUS,
    IetPoint,
    StepRecord,
    classify,
)
from .permutations import Permutation, apply_a, apply_b

__all__ = [
    "ZipperedRectangle",
    "Violation",
    "validate",
    "area",
    "flow",
    "zip_step",
    "tau",
    "elementary_return",
    "first_return",
    "y_component",
    "random_rectangle",
    "rectangle_json",
]


@dataclass(frozen=True)
class ZipperedRectangle:
    lam: tuple
    h: tuple
    a: tuple
    pi: Permutation

    def __post_init__(self):
        m = self.pi.m
        if not (len(self.lam) == len(self.h) == len(self.a) == m):
            raise ValueError("lam, h, a must all have the permutation's size")
        object.__setattr__(self, "lam", tuple(self.lam))
        object.__setattr__(self, "h", tuple(self.h))
        object.__setattr__(self, "a", tuple(self.a))

    @property
    def m(self) -> int:
        return self.pi.m

    def base(self) -> IetPoint:
        s = sum(self.lam)
        return IetPoint(tuple(v / s for v in self.lam), self.pi)

    def h_at(self, i: int):
        """Height with boundary convention h_0 = h_{m+1} = 0."""
        return self.h[i - 1] if 1 <= i <= self.m else 0

    def a_at(self, i: int):
        """Offset with boundary convention a_0 = a_{m+1} = 0."""
        return self.a[i - 1] if 1 <= i <= self.m else 0


class Violation(NamedTuple):
    name: str
    residual: float


def _sigma(pi: Permutation, i: int) -> int:
    """pi^{-1}(pi(i) + 1) with pi(0) = 0 and pi^{-1}(m+1) = m+1."""
    v = 0 if i == 0 else pi(i)
    return pi.m + 1 if v + 1 == pi.m + 1 else pi.inverse_of(v + 1)


def validate(
    x: ZipperedRectangle, tol: float = 1e-9, require_unit_area: bool = True
) -> list[Violation]:
    """All constraint violations beyond ``tol``; empty means valid.

    Checks the linear equations, the sign constraints, the offset caps, and
    (by default) unit area.
    """
    pi = x.pi
    m = x.m
    k = pi.inverse_of(m)
    out = []
    for i in range(m + 1):
        s = _sigma(pi, i)
        lhs = x.h_at(i) - x.a_at(i)
        rhs = x.h_at(s) - x.a_at(s - 1)
        r = abs(lhs - rhs)
        if r > tol:
            out.append(Violation(f"eq[{i}]", float(r)))
    for i in range(1, m + 1):
        if x.h[i - 1] < -tol:
            out.append(Violation(f"h[{i}]>=0", float(-x.h[i - 1])))
    for i in range(1, m):
        if x.a[i - 1] < -tol:
            out.append(Violation(f"a[{i}]>=0", float(-x.a[i - 1])))
    for i in range(1, m):
        if i == k:
            continue
        cap = min(x.h_at(i), x.h_at(i + 1))
        if x.a[i - 1] - cap > tol:
            out.append(Violation(f"a[{i}]<=min(h)", float(x.a[i - 1] - cap)))
    if x.a[m - 1] - x.h[m - 1] > tol:
        out.append(Violation("a[m]<=h[m]", float(x.a[m - 1] - x.h[m - 1])))
    if -(x.a[m - 1] + x.h_at(k)) > tol:
        out.append(Violation("a[m]>=-h[k]", float(-(x.a[m - 1] + x.h_at(k)))))
    if x.a_at(k) - x.h_at(k + 1) > tol:
        out.append(Violation("a[k]<=h[k+1]", float(x.a_at(k) - x.h_at(k + 1))))
    if require_unit_area:
        r = abs(area(x) - 1)
        if r > tol:
            out.append(Violation("area=1", float(r)))
    return out


def area(x: ZipperedRectangle):
    return sum(l * h for l, h in zip(x.lam, x.h))


def flow(x: ZipperedRectangle, t: float) -> ZipperedRectangle:
    """Scale widths by e^t and heights/offsets by e^{-t}; area-preserving."""
    up = math.exp(t)
    down = math.exp(-t)
    return ZipperedRectangle(
        tuple(v * up for v in x.lam),
        tuple(v * down for v in x.h),
        tuple(v * down for v in x.a),
        x.pi,
    )


def zip_step(x: ZipperedRectangle) -> ZipperedRectangle:
    """One area-preserving renormalization step.

    The branch follows the positivity rule of the base dynamics; widths
    transform by the inverse matrix, heights by the transpose, and the
    offsets by the branch's own update.
    """
    side = classify(x.base())
    if side == BOUNDARY:
        raise NonGenericError("base point on the boundary; step undefined")
    lam, h, a = list(x.lam), list(x.h), list(x.a)
    pi = x.pi
    m = x.m
    k = pi.inverse_of(m)
    if side == PLUS:
        # widths: pivot loses the last width, which is reinserted after it
        cut = lam[-1]
        lam[k - 1] -= cut
        lam.pop()
        lam.insert(k, cut)
        # heights: transpose action spreads the pivot height onto the slot
        # right after it and shifts the tail back
        hk = h[k - 1]
        hm = h.pop()
        h.insert(k, hk + hm)
        new_a = a[: k - 1] + [x.h_at(k) + x.a_at(m - 1)] + a[k - 1 : m - 1]
        new_pi = apply_a(pi)
    else:
        lam[-1] -= lam[k - 1]
        h[k - 1] += h[-1]
        new_a = a[: m - 1] + [-x.h_at(k) + x.a_at(k - 1)]
        new_pi = apply_b(pi)
    return ZipperedRectangle(tuple(lam), tuple(h), tuple(new_a), new_pi)


def tau(x: ZipperedRectangle) -> float:
    """Flow time to the next crossing of the |lam| = 1 transversal."""
    s = sum(x.lam)
    if abs(float(s) - 1.0) > 1e-9:
        raise ValueError("tau needs a unit-total width vector")
    m = x.m
    cut = min(x.lam[-1], x.lam[x.pi.inverse_of(m) - 1])
    return -math.log(1 - float(cut) / float(s))


def elementary_return(x: ZipperedRectangle) -> ZipperedRectangle:
    """One step followed by the flow back to |lam| = 1.

    The flow time is tau(x), i.e. -log of the width mass kept by the step.
    """
    y = zip_step(x)
    s = sum(y.lam)
    return ZipperedRectangle(
        tuple(v / s for v in y.lam),
        tuple(v * s for v in y.h),
        tuple(v * s for v in y.a),
        y.pi,
    )


def first_return(
    x: ZipperedRectangle, cap: int = DEFAULT_CAP
) -> tuple[ZipperedRectangle, StepRecord]:
    """Elementary returns until the base type flips.

    The base-point projection of the result is exactly the accelerated step
    of the base, and the record's flow_time is the accumulated crossing
    time.  Starting from a letter-boundary point (see :func:`y_component`),
    the image lies in the opposite component.
    """
    side = classify(x.base())
    if side == BOUNDARY:
        raise NonGenericError("boundary base point; first return undefined")
    op = "a" if side == PLUS else "b"
    start = x.pi
    count = 0
    time_total = 0.0
    current = x
    while True:
        time_total += tau(current)
        current = zip_step(current)
        s = sum(current.lam)
        current = ZipperedRectangle(
            tuple(v / s for v in current.lam),
            tuple(v * s for v in current.h),
            tuple(v * s for v in current.a),
            current.pi,
        )
        count += 1
        new_side = classify(current.base())
        if new_side == BOUNDARY:
            raise NonGenericError("orbit hit a boundary point", step=count)
        if new_side != side:
            break
        if count >= cap:
            raise CapExceededError(f"first return exceeded cap {cap}")
    return current, StepRecord(op, count, start, time_total)


def y_component(x: ZipperedRectangle) -> Optional[str]:
    """Which letter-boundary component the rectangle sits in, if any.

    The transversal splits by the base type together with the sign of the
    last offset, which records the type of the move that produced the
    point: every 'a' sub-step leaves a_m >= 0 and every 'b' sub-step leaves
    a_m <= 0.  A point about to start an 'a' letter therefore carries
    a_m <= 0 (it just finished a 'b' letter), and vice versa; rectangles
    strictly inside a letter satisfy neither pairing.  a_m = 0 belongs to
    both sign classes, so membership is then decided by the type alone.
    """
    side = classify(x.base())
    am = x.a[-1]
    if side == PLUS and am <= 0:
        return PLUS
    if side == MINUS and am >= 0:
        return MINUS
    return None


def random_rectangle(
    pi: Permutation,
    rng: np.random.Generator,
    budget: int = 1000,
    tol: float = 1e-9,
) -> ZipperedRectangle:
    """Sample a valid unit-area rectangle over ``pi``.

    Heights are drawn uniformly and projected onto the linear consistency
    conditions; offsets follow from the equations walked along the index
    cycles, with one uniform free constant per cycle not containing 0;
    widths are uniform on the simplex and the whole (h, a) pair is scaled
    to unit area.  Rejects and retries until every inequality holds.
    """
    m = pi.m
    k = pi.inverse_of(m)
    sigma = [_sigma(pi, i) for i in range(m + 1)]
    nxt = [s - 1 for s in sigma]  # index cycle map on 0..m
    cycles = _cycles(nxt)

    # one height condition per cycle: the walked equations must close up
    cond = np.zeros((len(cycles), m))
    for c_idx, cycle in enumerate(cycles):
        for i in cycle:
            s = sigma[i]
            if 1 <= s <= m:
                cond[c_idx, s - 1] += 1.0
            if 1 <= i <= m:
                cond[c_idx, i - 1] -= 1.0
    proj = _projector(cond, m)

    for _ in range(budget):
        h = proj @ rng.uniform(0.2, 1.2, size=m)
        if np.any(h < 1e-3):
            continue
        a = _solve_offsets(h, cycles, sigma, pi, k, rng)
        if a is None:
            continue
        lam = rng.exponential(1.0, size=m)
        lam /= lam.sum()
        scale = 1.0 / float(np.dot(lam, h))
        rect = ZipperedRectangle(
            tuple(float(v) for v in lam),
            tuple(float(v * scale) for v in h),
            tuple(float(v * scale) for v in a),
            pi,
        )
        if classify(rect.base()) == BOUNDARY:
            continue
        if not validate(rect, tol):
            return rect
    raise RejectionBudgetError(f"no valid rectangle over {pi} in {budget} draws")


def _cycles(nxt: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(nxt)
    cycles = []
    for start in range(len(nxt)):
        if seen[start]:
            continue
        cycle = []
        i = start
        while not seen[i]:
            seen[i] = True
            cycle.append(i)
            i = nxt[i]
        cycles.append(cycle)
    return cycles


def _projector(cond: np.ndarray, m: int) -> np.ndarray:
    gram = cond @ cond.T
    return np.eye(m) - cond.T @ np.linalg.pinv(gram) @ cond


def _solve_offsets(h, cycles, sigma, pi, k, rng):
    """Walk the equations along each cycle; returns a_1..a_m or None."""
    m = pi.m

    def h_at(i):
        return h[i - 1] if 1 <= i <= m else 0.0

    a = np.zeros(m + 1)
    for cycle in cycles:
        offsets = {}
        anchored = 0 in cycle
        val = 0.0
        # order the walk so it starts at the anchor when there is one
        start = cycle.index(0) if anchored else 0
        order = cycle[start:] + cycle[:start]
        for i in order:
            offsets[i] = val
            val += h_at(sigma[i]) - h_at(i)
        if anchored:
            if abs(val) > 1e-9:  # closure residual; heights off the subspace
                return None
            shift = 0.0
        else:
            lo, hi = -math.inf, math.inf
            for i in order:
                blo, bhi = _offset_bounds(i, m, k, h_at)
                lo = max(lo, blo - offsets[i])
                hi = min(hi, bhi - offsets[i])
            if lo > hi:
                return None
            shift = rng.uniform(lo, hi)
        for i in order:
            if i > 0:
                a[i] = offsets[i] + shift
    # final feasibility check for the anchored cycle values
    for i in range(1, m + 1):
        blo, bhi = _offset_bounds(i, m, k, h_at)
        if not (blo - 1e-12 <= a[i] <= bhi + 1e-12):
            return None
    return a[1:]


def _offset_bounds(i, m, k, h_at):
    if i == m:
        return -h_at(k), h_at(m)
    if i == k:
        return 0.0, h_at(k + 1)
    return 0.0, min(h_at(i), h_at(i + 1))


def rectangle_json(x: ZipperedRectangle, tol: float = 1e-9) -> dict:
    """JSON-ready dump: lambda[], h[], a[], pi[], area, violations[]."""
    return {
        "lambda": [float(v) for v in x.lam],
        "h": [float(v) for v in x.h],
        "a": [float(v) for v in x.a],
        "pi": list(x.pi.images),
        "area": float(area(x)),
        "violations": [list(v) for v in validate(x, tol)],
    }
