"""Array-based float orbit runner for long Monte-Carlo horizons.

The object-level stepper in :mod:`rauzy.induction` is the reference; this
module reproduces it on flat numpy state so millions of accelerated steps
are affordable, compiling the inner loop with numba when available.

Long constant-type runs are the hot spot: their counts are heavy-tailed
(no finite mean), so a naive loop spends almost all its time inside a few
huge letters.  During such a run the class node cycles with some period p,
and once per period exactly one slot loses a fixed amount while every
other slot returns bit-identically.  The kernel detects that structure at
runtime (it never assumes it) and then binary-searches how many whole
periods survive, advancing them in one multiply.  Letters below the
detection threshold run plainly, so short-horizon behaviour matches the
reference stepper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapExceededError, NonGenericError
from .induction import DEFAULT_CAP, IetPoint
from .permutations import RauzyClassGraph, rauzy_class
from .words import Letter, Word

__all__ = ["OrbitData", "run_orbit", "class_tables"]

try:
    from numba import njit as _njit

    def _jit(fn):
        return _njit(cache=True)(fn)

except ImportError:  # pragma: no cover - numba is expected in production
    def _jit(fn):
        return fn


STATUS_OK = 0
STATUS_NONGENERIC = 1
STATUS_CAP = 2
STATUS_STUCK = 3

_COLLAPSE_AFTER = 64


def _sub_a(lam, pim, m1):
    # pivot loses the last length, which is reinserted right after the pivot
    tmp = lam[m1]
    lam[pim] -= tmp
    for j in range(m1, pim + 1, -1):
        lam[j] = lam[j - 1]
    lam[pim + 1] = tmp


def _sub_b(lam, pim, m1):
    lam[m1] -= lam[pim]


def _probe(lam, j0, shift, node0, plus, period, pim0, aed, bed, buf):
    # Does the run survive one more whole period after advancing `shift`
    # off slot j0?  Strict comparisons only; ties read as "no".
    m1 = lam.shape[0] - 1
    for i in range(lam.shape[0]):
        buf[i] = lam[i]
    buf[j0] -= shift
    if buf[j0] <= 0.0:
        return False
    node = node0
    for _ in range(period):
        pim = pim0[node]
        lp = buf[pim]
        lm = buf[m1]
        if plus:
            if not (lp > lm):
                return False
            _sub_a(buf, pim, m1)
            node = aed[node]
        else:
            if not (lm > lp):
                return False
            _sub_b(buf, pim, m1)
            node = bed[node]
    return True


def _orbit_loop(
    lam,
    node,
    pim0,
    aed,
    bed,
    steps,
    cap,
    collapse_after,
    ops,
    counts,
    node_after,
    flow,
    lam_out,
    store_lam,
    prec_flags,
    snap,
    buf,
):
    m = lam.shape[0]
    m1 = m - 1
    for k in range(steps):
        pim = pim0[node]
        lp = lam[pim]
        lm = lam[m1]
        if lp == lm:
            return k, STATUS_NONGENERIC
        plus = lp > lm
        cnt = 0
        next_arm = collapse_after
        armed = False
        arm_node = -1
        arm_cnt = 0
        while True:
            if plus:
                _sub_a(lam, pim, m1)
                node = aed[node]
            else:
                _sub_b(lam, pim, m1)
                node = bed[node]
            cnt += 1
            pim = pim0[node]
            lp = lam[pim]
            lm = lam[m1]
            if lp == lm:
                return k, STATUS_NONGENERIC
            if (lp > lm) != plus:
                break
            if cnt >= cap:
                return k, STATUS_CAP
            if armed and node == arm_node:
                period = cnt - arm_cnt
                j0 = -1
                changed = 0
                for i in range(m):
                    if lam[i] != snap[i]:
                        changed += 1
                        j0 = i
                if changed == 0:
                    return k, STATUS_STUCK
                if changed == 1 and snap[j0] > lam[j0]:
                    d = snap[j0] - lam[j0]
                    q_hi = (cap - cnt) // period
                    if q_hi > 0 and _probe(
                        lam, j0, d, node, plus, period, pim0, aed, bed, buf
                    ):
                        lo = 1
                        hi = q_hi
                        while lo < hi:
                            mid = (lo + hi + 1) // 2
                            if _probe(
                                lam,
                                j0,
                                mid * d,
                                node,
                                plus,
                                period,
                                pim0,
                                aed,
                                bed,
                                buf,
                            ):
                                lo = mid
                            else:
                                hi = mid - 1
                        lam[j0] -= lo * d
                        cnt += lo * period
                        lp = lam[pim]
                        lm = lam[m1]
                armed = False
                next_arm = cnt + collapse_after
            elif not armed and cnt >= next_arm:
                armed = True
                arm_node = node
                arm_cnt = cnt
                for i in range(m):
                    snap[i] = lam[i]
        s = 0.0
        for j in range(m):
            s += lam[j]
        flow[k] = -math.log(s)
        small = False
        for j in range(m):
            lam[j] /= s
            if lam[j] < 1e-13:
                small = True
            if store_lam:
                lam_out[k, j] = lam[j]
        ops[k] = 0 if plus else 1
        counts[k] = cnt
        node_after[k] = node
        if small:
            prec_flags[k] = 1
    return steps, STATUS_OK


_sub_a = _jit(_sub_a)
_sub_b = _jit(_sub_b)
_probe = _jit(_probe)
_orbit_loop = _jit(_orbit_loop)


def class_tables(graph: RauzyClassGraph):
    """Flat index tables for the kernel: 0-based pivot slot and both edges."""
    pim0 = np.array([pi.inverse_of(pi.m) - 1 for pi in graph.nodes], dtype=np.int64)
    aed = np.array(graph.a_edge, dtype=np.int64)
    bed = np.array(graph.b_edge, dtype=np.int64)
    return pim0, aed, bed


@dataclass
class OrbitData:
    """Columnar record of a float orbit.

    Row ``k`` describes accelerated step ``k`` (0-based): its move type
    (0 = 'a', 1 = 'b'), elementary count, the node index reached, the flow
    time spent, and (optionally) the post-step length vector.  The point
    reached by step ``k`` has plus type iff ``ops[k] == 1``.
    """

    graph: RauzyClassGraph
    node0: int
    lam0: np.ndarray
    ops: np.ndarray
    counts: np.ndarray
    node_after: np.ndarray
    flow: np.ndarray
    lam: Optional[np.ndarray]
    precision_flags: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.ops)

    @property
    def m(self) -> int:
        return len(self.lam0)

    def node_before(self) -> np.ndarray:
        out = np.empty_like(self.node_after)
        if len(out):
            out[0] = self.node0
            out[1:] = self.node_after[:-1]
        return out

    def precision_events(self) -> np.ndarray:
        return np.flatnonzero(self.precision_flags)

    def letter(self, k: int) -> Letter:
        start = self.node0 if k == 0 else int(self.node_after[k - 1])
        return Letter(
            "a" if self.ops[k] == 0 else "b",
            int(self.counts[k]),
            self.graph.nodes[start],
        )

    def word(self, start: int = 0, stop: Optional[int] = None) -> Word:
        stop = self.steps if stop is None else stop
        return Word(tuple(self.letter(k) for k in range(start, stop)))

    def point(self, k: int) -> IetPoint:
        """The point reached by step ``k`` (requires stored lengths)."""
        if self.lam is None:
            raise ValueError("orbit was run without length storage")
        node = int(self.node_after[k])
        return IetPoint(tuple(float(v) for v in self.lam[k]), self.graph.nodes[node])

    def plus_rows(self) -> np.ndarray:
        """Row indices whose post-step point has plus type."""
        return np.flatnonzero(self.ops == 1)


def run_orbit(
    x0: IetPoint,
    steps: int,
    cap: int = DEFAULT_CAP,
    store_lambda: bool = True,
    graph: Optional[RauzyClassGraph] = None,
    collapse_after: int = _COLLAPSE_AFTER,
) -> OrbitData:
    """Run ``steps`` accelerated steps from a float point, returning arrays.

    Raises NonGenericError / CapExceededError with the failing step index;
    float precision loss that stalls the subtraction entirely is reported
    as NonGenericError (the point is numerically on the boundary).
    """
    if x0.exact:
        raise ValueError("array runner is float-only; use induction.orbit")
    graph = graph if graph is not None else rauzy_class(x0.pi)
    pim0, aed, bed = class_tables(graph)
    node0 = graph.index(x0.pi)
    m = x0.m
    lam = np.array(x0.lam, dtype=np.float64)  # IetPoint lengths are normalized
    ops = np.zeros(steps, dtype=np.uint8)
    counts = np.zeros(steps, dtype=np.int64)
    node_after = np.zeros(steps, dtype=np.int32)
    flow = np.zeros(steps, dtype=np.float64)
    lam_out = np.zeros((steps if store_lambda else 1, m), dtype=np.float64)
    prec_flags = np.zeros(steps, dtype=np.uint8)
    snap = np.zeros(m, dtype=np.float64)
    buf = np.zeros(m, dtype=np.float64)
    done, status = _orbit_loop(
        lam,
        node0,
        pim0,
        aed,
        bed,
        steps,
        cap,
        collapse_after,
        ops,
        counts,
        node_after,
        flow,
        lam_out,
        store_lambda,
        prec_flags,
        snap,
        buf,
    )
    if status == STATUS_NONGENERIC:
        raise NonGenericError("orbit hit a boundary point", step=int(done))
    if status == STATUS_CAP:
        raise CapExceededError(f"accelerated step exceeded cap {cap}", step=int(done))
    if status == STATUS_STUCK:
        raise NonGenericError(
            "length below float resolution; point is numerically on the boundary",
            step=int(done),
        )
    return OrbitData(
        graph=graph,
        node0=node0,
        lam0=np.array(x0.lam, dtype=np.float64),
        ops=ops,
        counts=counts,
        node_after=node_after,
        flow=flow,
        lam=lam_out if store_lambda else None,
        precision_flags=prec_flags,
    )
