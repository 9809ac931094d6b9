"""Quantitative statistics: correlation decay under the squared accelerated
map, exponential return-time tails, and discrete/continuous time comparison.

This is a desk-scale version of the acceptance experiments (about half a
minute).  Run with: python demos/05_mixing_statistics.py
"""
import numpy as np

from rauzy import (
    ObservableSpec,
    Permutation,
    birkhoff_mean,
    comparison_survey,
    correlation_series,
    exp_moment,
    find_positive_word,
    fit_exponential,
    pooled_return_survey,
    rauzy_class,
    run_orbit,
    sample_simplex,
    tail_fit,
)

rng = np.random.default_rng(99)

# One long orbit at three symbols; stationary averages use plus-type points
# after burn-in.
pi3 = Permutation.parse("3 2 1")
data = run_orbit(sample_simplex(pi3, rng), 2_000_000, cap=1 << 62)
phi = ObservableSpec("coordinate", index=1)
print(f"stationary mean of the first length: {birkhoff_mean(data, phi, 1000):.5f}")

# Correlations of the first length along the plus-type subsequence (each lag
# is one double step).  They fall below the noise floor within a few lags.
series = correlation_series(data, phi, phi, 12, 1000)
print("\nlag  correlation    stderr")
for s in series[:8]:
    print(f"{s.n:3d}  {s.corr:+.3e}  {s.stderr:.1e}")

fit = fit_exponential(series)
print(f"decay rate {fit.delta:.3f}, 95% CI ({fit.ci_low:.3f}, {fit.ci_high:.3f}), "
      f"window lags {fit.window}, R2 {fit.r2:.4f}")

pi = Permutation.parse("2 1")

# Returns into the positive-matrix cylinder: the gap lengths have an
# exponential tail (the survival plot is log-linear).
q = find_positive_word(rauzy_class(pi), 8)
records = pooled_return_survey(pi, q, 300_000, orbits=4, seed=5, cap=1 << 62)
returns = [r for r in records if r.start_in_cylinder]
tails = tail_fit(records)
print(f"\nword {q}: {len(returns)} returns")
print(f"survival ratio per step {tails.theta:.4f} (R2 {tails.r2:.4f}, window {tails.window})")

# Discrete vs continuous time: word length against log matrix norm, and the
# gap between the norm time and the flow time, both plateau.
summary = comparison_survey(records)
print(f"\nmax |w| / log|A(w)| = {summary.max_len_ratio:.3f} "
      f"(plateau: {summary.len_ratio_plateau})")
print(f"max eta - tau = {summary.max_eta_tau:.3f} (plateau: {summary.eta_tau_plateau})")
print(f"eta > tau everywhere: min gap {summary.min_eta_minus_tau:.3e}")

# Exponential moments of the gap flow time exist for small rates only; the
# report flags instability instead of claiming finiteness.
for eps in (0.005, 0.5):
    rep = exp_moment(records, eps)
    print(f"exp-moment at eps={eps}: tau {rep.tau_moment:.4f}, "
          f"stable {rep.stable_under_doubling}, top-sample share {rep.max_contribution:.2f}")

# Inside the cylinder the coordinate ratios are bounded (the vertices pin
# them), which in turn bounds |A lam| / |A| below for any nonnegative A.
from rauzy import inverse_branch, ratio_bound_check
from rauzy.matrices import elementary_matrix

cyl_rng = np.random.default_rng(17)
points = [inverse_branch(q, sample_simplex(pi, cyl_rng)).lam for _ in range(300)]
mats = [elementary_matrix(op, pi) for op in ("a", "b")] + [((2, 1), (1, 1))]
bounds = ratio_bound_check(points, mats)
print(f"\ncylinder coordinate ratio <= {bounds.max_coord_ratio:.3f} "
      f"(plateau: {bounds.coord_plateau})")
print(f"min |A lam| / |A| = {bounds.min_norm_ratio:.3f} (plateau: {bounds.norm_plateau})")

# Observable norms are estimated from sampled pairs; a lower bound only.
from rauzy import holder_norm_estimate

pair_rng = np.random.default_rng(23)
pairs = [(sample_simplex(pi, pair_rng), sample_simplex(pi, pair_rng)) for _ in range(400)]
est = holder_norm_estimate(phi, 1.0, pairs)
print(f"smoothness-norm lower bound for the first length: {est.estimate:.3f} "
      f"(sup {est.sup_part:.3f} + quotient {est.quotient_part:.3f})")
