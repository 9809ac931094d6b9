"""Monte-Carlo estimators for the quantitative behaviour of the induction:
correlation decay under the squared accelerated map, return-time tails into
a positive-matrix cylinder, and the discrete/continuous time comparisons.

All estimators work off the columnar orbit record (:class:`~rauzy.kernel.
OrbitData`).  Matrix quantities entering the records are computed in exact
integer arithmetic; logs are taken only of final integers.  Every function
is deterministic given its rng/seed, and pooled surveys merge per-orbit
results in orbit order, so the output never depends on worker count.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InsufficientDataError
from .induction import IetPoint
from .kernel import OrbitData, run_orbit
from .matrices import (
    birkhoff_diameter,
    elementary_matrix,
    identity,
    mat_mul,
    mat_vec,
    matrix_norm,
)
from .permutations import Permutation, RauzyClassGraph
from .words import Letter, Word

__all__ = [
    "ObservableSpec",
    "CorrelationSeries",
    "ReturnRecord",
    "sample_simplex",
    "birkhoff_mean",
    "correlation_series",
    "ExponentialFit",
    "fit_exponential",
    "return_time_survey",
    "pooled_return_survey",
    "TailFit",
    "tail_fit",
    "ComparisonSummary",
    "comparison_survey",
    "ExpMomentReport",
    "exp_moment",
    "RatioBounds",
    "ratio_bound_check",
    "HolderLowerBound",
    "holder_norm_estimate",
    "cylinder_shrinkage",
]


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class ObservableSpec:
    """An observable to average along orbits.

    kind: 'coordinate' (length number ``index``, 1-based), 'log_min_gap'
    (log of the smallest length), 'cylinder_indicator' (1 inside the word's
    cylinder), or 'user_table' (arbitrary callable on points).  ``alpha`` is
    the smoothness exponent used when estimating the observable's norm.
    """

    kind: str
    index: int = 1
    word: Optional[Word] = None
    func: Optional[Callable[[IetPoint], float]] = None
    alpha: float = 1.0

    def __post_init__(self):
        kinds = ("coordinate", "log_min_gap", "cylinder_indicator", "user_table")
        if self.kind not in kinds:
            raise ValueError(f"kind must be one of {kinds}")
        if self.kind == "cylinder_indicator" and self.word is None:
            raise ValueError("cylinder_indicator needs a word")
        if self.kind == "user_table" and self.func is None:
            raise ValueError("user_table needs a callable")

    def evaluate(self, x: IetPoint) -> float:
        if self.kind == "coordinate":
            return float(x.lam[self.index - 1])
        if self.kind == "log_min_gap":
            return math.log(float(min(x.lam)))
        if self.kind == "user_table":
            return float(self.func(x))
        from .induction import cylinder_contains

        return 1.0 if cylinder_contains(self.word, x) else 0.0

    def evaluate_rows(self, orbit: OrbitData, rows: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at the stored post-step points ``rows``."""
        if self.kind == "coordinate":
            return orbit.lam[rows, self.index - 1]
        if self.kind == "log_min_gap":
            return np.log(orbit.lam[rows].min(axis=1))
        if self.kind == "cylinder_indicator":
            mask = _occurrence_mask(orbit, self.word)
            # row k stores the point reached by step k, whose itinerary
            # starts at letter k+1
            out = np.zeros(len(rows), dtype=np.float64)
            valid = rows + 1 < len(mask)
            out[valid] = mask[rows[valid] + 1]
            return out
        return np.array([self.func(orbit.point(int(k))) for k in rows])


def sample_simplex(pi: Permutation, rng: np.random.Generator) -> IetPoint:
    """Uniform point of the open simplex over ``pi`` (normalized
    exponential draws)."""
    lam = rng.exponential(1.0, size=pi.m)
    return IetPoint.from_floats(lam, pi)


def _plus_rows(orbit: OrbitData, burn_in: int) -> np.ndarray:
    # the point reached by step k has plus type iff the step was a 'b' move
    rows = np.flatnonzero(orbit.ops == 1)
    return rows[rows >= burn_in]


def birkhoff_mean(orbit: OrbitData, phi: ObservableSpec, burn_in: int) -> float:
    """Time average of ``phi`` over post-burn-in plus-type points."""
    if burn_in >= orbit.steps:
        raise InsufficientDataError("burn-in consumes the whole orbit")
    rows = _plus_rows(orbit, burn_in)
    if len(rows) == 0:
        raise InsufficientDataError("no plus-type points after burn-in")
    return float(np.mean(phi.evaluate_rows(orbit, rows)))


# ---------------------------------------------------------------------------
# correlations


@dataclass(frozen=True)
class CorrelationSeries:
    n: int
    corr: float
    stderr: float
    samples: int


def correlation_series(
    orbit: OrbitData,
    phi: ObservableSpec,
    psi: ObservableSpec,
    n_max: int,
    burn_in: int,
) -> list[CorrelationSeries]:
    """Centered covariances of phi, psi along the plus-type subsequence at
    lags 0..n_max (one lag = one double step), with batch-means errors."""
    if (orbit.steps - burn_in) / 2 <= 10 * n_max:
        raise InsufficientDataError(
            f"orbit too short: need (steps - burn_in)/2 > {10 * n_max}"
        )
    rows = _plus_rows(orbit, burn_in)
    f = phi.evaluate_rows(orbit, rows)
    g = psi.evaluate_rows(orbit, rows) if psi is not phi else f
    fc = f - f.mean()
    gc = g - g.mean()
    out = []
    n_points = len(rows)
    for n in range(n_max + 1):
        prod = fc[: n_points - n] * gc[n:] if n else fc * gc
        c = float(prod.mean())
        out.append(CorrelationSeries(n, c, _batch_stderr(prod), len(prod)))
    return out


def _batch_stderr(x: np.ndarray) -> float:
    b = int(math.isqrt(len(x)))
    if b < 2:
        return float("inf")
    length = len(x) // b
    means = x[: b * length].reshape(b, length).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(b))


@dataclass(frozen=True)
class ExponentialFit:
    delta: float
    ci_low: float
    ci_high: float
    r2: float
    window: tuple[int, int]  # inclusive lag range used
    intercept: float


def fit_exponential(
    series: Sequence[CorrelationSeries],
    floor_mult: float = 3.0,
    n_boot: int = 1000,
    seed: int = 0,
) -> ExponentialFit:
    """Least squares on log|c_n| over the initial run of lags clearing the
    noise floor (|c_n| > floor_mult * stderr); the decay rate is minus the
    slope, with a residual-bootstrap 95% interval.

    Raises InsufficientDataError when fewer than 4 lags clear the floor.
    """
    lags = []
    logs = []
    for s in series:
        if abs(s.corr) > floor_mult * s.stderr and s.corr != 0:
            lags.append(s.n)
            logs.append(math.log(abs(s.corr)))
        else:
            break
    if len(lags) < 4:
        raise InsufficientDataError(
            f"only {len(lags)} lags clear the noise floor; need 4"
        )
    x = np.array(lags, dtype=float)
    y = np.array(logs, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    resid = y - fitted
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    rng = np.random.default_rng(seed)
    boot = np.empty(n_boot)
    for b in range(n_boot):
        yb = fitted + rng.choice(resid, size=len(resid), replace=True)
        boot[b] = -np.polyfit(x, yb, 1)[0]
    lo, hi = np.percentile(boot, [2.5, 97.5])
    return ExponentialFit(
        delta=float(-slope),
        ci_low=float(lo),
        ci_high=float(hi),
        r2=r2,
        window=(lags[0], lags[-1]),
        intercept=float(intercept),
    )


# ---------------------------------------------------------------------------
# return times into a cylinder


@dataclass(frozen=True)
class ReturnRecord:
    """One gap of the orbit between consecutive visits to the cylinder."""

    start_index: int
    n_q: int
    eta: float  # log entry-sum norm of the gap word's matrix
    tau: float  # accumulated flow time over the gap
    start_in_cylinder: bool
    word_triples: tuple = field(repr=False, default=())

    def word(self, graph: RauzyClassGraph) -> Word:
        return Word(
            tuple(
                Letter("a" if op == 0 else "b", int(cnt), graph.nodes[node])
                for op, cnt, node in self.word_triples
            )
        )


class _LetterMatrixCache:
    """Exact letter matrices keyed by (op, count, node), with cycle powers
    so huge counts stay cheap (entries grow only polynomially in the
    count)."""

    def __init__(self, graph: RauzyClassGraph):
        self.graph = graph
        self.cache: dict = {}

    def get(self, op: int, count: int, node: int):
        key = (op, count, node)
        hit = self.cache.get(key)
        if hit is None:
            hit = self._build(op, count, node)
            self.cache[key] = hit
        return hit

    def _edges(self, op):
        return self.graph.a_edge if op == 0 else self.graph.b_edge

    def _factor(self, op, node):
        key = ("el", op, node)
        hit = self.cache.get(key)
        if hit is None:
            hit = elementary_matrix("a" if op == 0 else "b", self.graph.nodes[node])
            self.cache[key] = hit
        return hit

    def _build(self, op, count, node):
        edges = self._edges(op)
        m = self.graph.nodes[0].m
        if count <= 64:
            A = identity(m)
            v = node
            for _ in range(count):
                A = mat_mul(A, self._factor(op, v))
                v = edges[v]
            return A
        # find the node cycle, take the per-cycle product to a power
        cycle = [node]
        v = edges[node]
        while v != node:
            cycle.append(v)
            v = edges[v]
        p = len(cycle)
        block = identity(m)
        for u in cycle:
            block = mat_mul(block, self._factor(op, u))
        q, r = divmod(count, p)
        A = _mat_pow(block, q)
        v = node
        for _ in range(r):
            A = mat_mul(A, self._factor(op, v))
            v = edges[v]
        return A


def _mat_pow(A, e: int):
    result = identity(len(A))
    base = A
    while e:
        if e & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base) if e > 1 else base
        e >>= 1
    return result


def _word_to_triples(q: Word, graph: RauzyClassGraph) -> Optional[np.ndarray]:
    try:
        return np.array(
            [
                (0 if letter.c == "a" else 1, letter.n, graph.index(letter.pi))
                for letter in q
            ],
            dtype=np.int64,
        )
    except ValueError:
        return None


def _occurrence_mask(orbit: OrbitData, q: Word) -> np.ndarray:
    """mask[i] == True iff the itinerary read from letter i starts with q."""
    steps = orbit.steps
    if len(q) == 0:
        return np.ones(steps, dtype=bool)  # empty prefix matches everywhere
    triples = _word_to_triples(q, orbit.graph)
    if triples is None:
        return np.zeros(steps, dtype=bool)
    L = len(triples)
    if L > steps:
        return np.zeros(steps, dtype=bool)
    node_before = orbit.node_before()
    n_pos = steps - L + 1
    mask = np.ones(n_pos, dtype=bool)
    for j, (op, cnt, node) in enumerate(triples):
        mask &= orbit.ops[j : j + n_pos] == op
        mask &= orbit.counts[j : j + n_pos] == cnt
        mask &= node_before[j : j + n_pos] == node
    return np.concatenate([mask, np.zeros(L - 1, dtype=bool)])


def return_time_survey(
    orbit: OrbitData, q: Word, light: bool = False
) -> list[ReturnRecord]:
    """Scan the orbit's letter stream for the word and emit one record per
    gap between consecutive occurrences (plus the leading partial gap,
    flagged as not starting in the cylinder).

    The matrix of each gap word is accumulated exactly; the gap's flow time
    is the sum of the per-letter flow times.  With ``light=True`` the gap
    words and their matrices are skipped (eta = nan, no stored word): gap
    lengths and flow times alone support tail statistics at a fraction of
    the cost, which matters for low-frequency cylinders.
    """
    occurrences = np.flatnonzero(_occurrence_mask(orbit, q))
    if len(occurrences) == 0:
        warnings.warn("word never observed on this orbit; empty survey")
        return []
    lead_in = occurrences[0] != 0
    starts = np.concatenate([[0], occurrences]) if lead_in else occurrences
    if light:
        flow_cum = np.concatenate([[0.0], np.cumsum(orbit.flow)])
        return [
            ReturnRecord(
                start_index=int(s),
                n_q=int(e - s),
                eta=float("nan"),
                tau=float(flow_cum[e] - flow_cum[s]),
                start_in_cylinder=not (lead_in and j == 0),
            )
            for j, (s, e) in enumerate(zip(starts[:-1], starts[1:]))
        ]
    cache = _LetterMatrixCache(orbit.graph)
    node_before = orbit.node_before()
    records = []
    for j, (s, e) in enumerate(zip(starts[:-1], starts[1:])):
        in_cyl = not (lead_in and j == 0)
        records.append(_gap_record(orbit, int(s), int(e), in_cyl, cache, node_before))
    return records


def _gap_record(orbit, s, e, in_cyl, cache, node_before):
    ones = (1,) * orbit.m
    v = ones
    triples = []
    for i in range(e - 1, s - 1, -1):
        op = int(orbit.ops[i])
        cnt = int(orbit.counts[i])
        node = int(node_before[i])
        triples.append((op, cnt, node))
        v = mat_vec(cache.get(op, cnt, node), v)
    triples.reverse()
    eta = math.log(sum(v))
    tau = float(orbit.flow[s:e].sum())
    return ReturnRecord(
        start_index=s,
        n_q=e - s,
        eta=eta,
        tau=tau,
        start_in_cylinder=in_cyl,
        word_triples=tuple(triples),
    )


def _survey_task(args):
    pi_images, q_text, steps, cap, seed, light = args
    from .words import parse_word

    pi = Permutation(pi_images)
    x0 = sample_simplex(pi, np.random.default_rng(seed))
    orbit = run_orbit(x0, steps, cap=cap, store_lambda=False)
    return return_time_survey(orbit, parse_word(q_text), light=light)


def pooled_return_survey(
    pi: Permutation,
    q: Word,
    steps: int,
    orbits: int,
    seed: int,
    cap: int,
    workers: int = 1,
    light: bool = False,
) -> list[ReturnRecord]:
    """Pool gap records from independent orbits (one spawned seed each).

    The merge is by orbit index, so the result is identical for any worker
    count.
    """
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(orbits)]
    tasks = [(pi.images, str(q), steps, cap, s, light) for s in seeds]
    if workers <= 1:
        results = [_survey_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_survey_task, tasks))
    merged = []
    for chunk in results:
        merged.extend(chunk)
    return merged


# ---------------------------------------------------------------------------
# tail and comparison statistics


@dataclass(frozen=True)
class TailFit:
    theta: float
    r2: float
    window: tuple[int, int]
    survival: tuple  # rows (N, survivors, total)


def tail_fit(
    records: Sequence[ReturnRecord], n_max: Optional[int] = None, min_survivors: int = 30
) -> TailFit:
    """Log-linear fit of the return-time survival S(N) over the window with
    at least ``min_survivors`` survivors.

    Only records starting inside the cylinder count as returns.
    """
    times = np.sort(
        np.array([r.n_q for r in records if r.start_in_cylinder], dtype=np.int64)
    )
    total = len(times)
    if total < min_survivors:
        raise InsufficientDataError("too few in-cylinder return records")
    # survivors(N) >= min_survivors exactly for N below the min_survivors-th
    # largest return time
    hi = int(times[total - min_survivors]) - 1
    if n_max is not None:
        hi = min(hi, n_max)
    if hi < 1:
        raise InsufficientDataError("survival window too short to fit")
    ns = np.arange(hi + 1)
    survivors = total - np.searchsorted(times, ns, side="right")
    x = ns.astype(float)
    y = np.log(survivors / total)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    rows = tuple((int(n), int(s), total) for n, s in zip(ns, survivors))
    return TailFit(
        theta=float(math.exp(slope)),
        r2=r2,
        window=(int(ns[0]), int(ns[-1])),
        survival=rows,
    )


@dataclass(frozen=True)
class ComparisonSummary:
    max_len_ratio: float
    len_ratio_running: tuple
    len_ratio_plateau: bool
    max_eta_tau: float
    eta_tau_running: tuple
    eta_tau_plateau: bool
    min_eta_minus_tau: float
    samples: int
    in_cylinder_samples: int


def _running_max(values: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(values)


def _plateau(running: np.ndarray, frac: float = 0.05) -> bool:
    """True when the last doubling of samples raised the max by < frac."""
    if len(running) < 2:
        return False
    half = running[len(running) // 2 - 1]
    full = running[-1]
    return bool(full <= half * (1 + frac)) if half > 0 else bool(full == half)


def comparison_survey(records: Sequence[ReturnRecord]) -> ComparisonSummary:
    """Running maxima of the word-length/log-norm ratio over all gap words
    and of eta - tau over in-cylinder gaps, with plateau flags."""
    if not records:
        raise InsufficientDataError("no records to survey")
    ratios = np.array([r.n_q / r.eta for r in records])
    run_ratio = _running_max(ratios)
    gaps = np.array([r.eta - r.tau for r in records if r.start_in_cylinder])
    all_gaps = np.array([r.eta - r.tau for r in records])
    run_gap = _running_max(gaps) if len(gaps) else np.array([])
    return ComparisonSummary(
        max_len_ratio=float(run_ratio[-1]),
        len_ratio_running=tuple(float(v) for v in run_ratio),
        len_ratio_plateau=_plateau(run_ratio),
        max_eta_tau=float(run_gap[-1]) if len(run_gap) else float("nan"),
        eta_tau_running=tuple(float(v) for v in run_gap),
        eta_tau_plateau=_plateau(run_gap) if len(run_gap) else False,
        min_eta_minus_tau=float(all_gaps.min()),
        samples=len(records),
        in_cylinder_samples=int(len(gaps)),
    )


@dataclass(frozen=True)
class ExpMomentReport:
    epsilon: float
    tau_moment: float
    n_moment: float
    tau_hill_index: float
    max_contribution: float
    stable_under_doubling: bool


def exp_moment(
    records: Sequence[ReturnRecord], epsilon: float, stability_tol: float = 0.1
) -> ExpMomentReport:
    """Empirical exp-moments of the gap flow time and the gap length.

    Reports stability across a sample doubling and a Hill index for the
    exponentiated flow times rather than claiming finiteness.
    """
    if not records:
        raise InsufficientDataError("no records")
    taus = np.array([r.tau for r in records])
    ns = np.array([r.n_q for r in records], dtype=float)

    def log_mean_exp(x):
        z = epsilon * x
        zmax = z.max()
        return float(zmax + math.log(np.mean(np.exp(z - zmax))))

    def safe_exp(v):
        return float(math.exp(v)) if v < 700 else math.inf

    if epsilon == 0:
        tau_m = n_m = 1.0
        contrib = 1.0 / len(taus)
        stable = True
    else:
        log_tau_m = log_mean_exp(taus)
        tau_m = safe_exp(log_tau_m)
        n_m = safe_exp(log_mean_exp(ns))
        z = epsilon * taus
        contrib = float(1.0 / np.exp(z - z.max()).sum())
        half = taus[: len(taus) // 2]
        if len(half):
            stable = abs(log_tau_m - log_mean_exp(half)) < stability_tol
        else:
            stable = False
    k = max(10, min(len(taus) // 10, 500))
    srt = np.sort(taus)[::-1]
    if len(srt) > k:
        hill = float(k / np.sum(srt[:k] - srt[k]))
    else:
        hill = float("nan")
    return ExpMomentReport(
        epsilon=epsilon,
        tau_moment=tau_m,
        n_moment=n_m,
        tau_hill_index=hill,
        max_contribution=contrib,
        stable_under_doubling=stable,
    )


@dataclass(frozen=True)
class RatioBounds:
    max_coord_ratio: float
    coord_plateau: bool
    min_norm_ratio: float
    norm_plateau: bool


def ratio_bound_check(points: Sequence, matrices: Sequence) -> RatioBounds:
    """Extremes backing the comparison constants: the largest coordinate
    ratio over the sampled cylinder points, and the smallest |A lam| / |A|
    over (matrix, point) pairs, both with plateau flags."""
    lam_rows = [np.asarray([float(v) for v in lam]) for lam in points]
    if not lam_rows:
        raise InsufficientDataError("no points")
    ratios = np.array([row.max() / row.min() for row in lam_rows])
    run_ratio = _running_max(ratios)
    mins = []
    for A in matrices:
        norm = matrix_norm(A)
        for row in lam_rows:
            image = mat_vec(A, row)
            mins.append(sum(image) / norm)
    run_min = np.minimum.accumulate(np.array(mins))
    half = run_min[len(run_min) // 2 - 1] if len(run_min) >= 2 else float("nan")
    norm_plateau = bool(len(run_min) >= 2 and run_min[-1] >= half * 0.95)
    return RatioBounds(
        max_coord_ratio=float(run_ratio[-1]),
        coord_plateau=_plateau(run_ratio),
        min_norm_ratio=float(run_min[-1]),
        norm_plateau=norm_plateau,
    )


@dataclass(frozen=True)
class HolderLowerBound:
    """Empirical lower bound for sup|phi| + the smoothness quotient; a
    sampled supremum can only under-estimate the true norm."""

    estimate: float
    sup_part: float
    quotient_part: float
    alpha: float
    pairs: int


def holder_norm_estimate(
    phi: ObservableSpec, alpha: float, pairs: Sequence[tuple[IetPoint, IetPoint]]
) -> HolderLowerBound:
    from .induction import hilbert_metric

    if not pairs:
        raise InsufficientDataError("no sample pairs")
    sup_part = 0.0
    quotient = 0.0
    for x, y in pairs:
        fx, fy = phi.evaluate(x), phi.evaluate(y)
        sup_part = max(sup_part, abs(fx), abs(fy))
        d = hilbert_metric(x, y)
        if 0 < d < math.inf:
            quotient = max(quotient, abs(fx - fy) / d**alpha)
    return HolderLowerBound(
        estimate=sup_part + quotient,
        sup_part=sup_part,
        quotient_part=quotient,
        alpha=alpha,
        pairs=len(pairs),
    )


# ---------------------------------------------------------------------------
# cylinder shrinkage along an orbit


def cylinder_shrinkage(
    orbit: OrbitData,
    q: Word,
    max_occurrences: int = 40,
    stop_below: float = 0.0,
) -> list[tuple[int, float]]:
    """Projective diameters of the itinerary-prefix cylinders cut at the
    ends of successive disjoint occurrences of ``q``.

    Returns (prefix_length, diameter) pairs; consecutive diameters contract
    at least by the word matrix's contraction coefficient.
    """
    mask = _occurrence_mask(orbit, q)
    L = len(q)
    cache = _LetterMatrixCache(orbit.graph)
    node_before = orbit.node_before()
    out = []
    A = identity(orbit.m)
    pos = 0
    occ_end = []
    i = 0
    while i < orbit.steps and len(occ_end) < max_occurrences:
        if mask[i]:
            occ_end.append(i + L)
            i += L  # disjoint occurrences
        else:
            i += 1
    for end in occ_end:
        while pos < end:
            A = mat_mul(
                A,
                cache.get(
                    int(orbit.ops[pos]), int(orbit.counts[pos]), int(node_before[pos])
                ),
            )
            pos += 1
        d = birkhoff_diameter(A)
        out.append((end, d))
        if d < stop_below:
            break
    return out
