"""The renormalization step on length vectors, exact and float backends.

Run with: python demos/02_induction_orbits.py
"""
from fractions import Fraction

import numpy as np

from rauzy import (
    IetPoint,
    NonGenericError,
    Permutation,
    classify,
    orbit,
    rauzy_step,
    run_orbit,
    zorich_step,
)

pi = Permutation.parse("2 1")

# A point is a positive length vector on the unit simplex plus a permutation.
x = IetPoint.from_floats((0.3, 0.7), pi)
print("x =", x.lam, "type:", classify(x))

# One elementary step subtracts the smaller pivot length from the larger and
# renormalizes; the branch keeping the lengths positive is forced.
y, op = rauzy_step(x)
print(f"after one '{op}' step:", y.lam)

# The accelerated step runs the elementary step until the comparison type
# flips, and records (move, count, start, flow time).
z, rec = zorich_step(x)
print(f"accelerated: op={rec.op} count={rec.count} flow={rec.flow_time:.4f} ->", z.lam)

# At two symbols this is the subtractive continued-fraction algorithm: the
# counts along an orbit are the partial quotients.
golden = IetPoint.from_floats((1.0, (5 ** 0.5 - 1) / 2), pi)
counts = [r.count for _, r in orbit(golden, 10)]
print("golden ratio counts:", counts)  # all ones

# Exact rationals are the ground truth on short horizons; rational orbits
# end on the boundary where the two pivots tie.
xe = IetPoint.from_rationals((Fraction(1, 3), Fraction(2, 3)), pi)
try:
    orbit(xe, 10)
except NonGenericError as e:
    print("exact orbit from (1/3, 2/3) ties at accelerated step", e.step)

# The array runner handles millions of steps; the heavy-tailed letter counts
# (their mean diverges) are collapsed arithmetically, so even letters with
# billions of elementary steps cost microseconds.
data = run_orbit(IetPoint.from_floats((1.0, 1e-9), pi), 5, cap=1 << 62)
print("counts from a nearly-degenerate start:", list(data.counts))

rng = np.random.default_rng(1)
lam = rng.dirichlet([1.0, 1.0, 1.0])
data = run_orbit(IetPoint.from_floats(lam, Permutation.parse("3 2 1")), 100_000, cap=1 << 62)
print(f"\n100k accelerated steps at m=3: mean count {data.counts.mean():.2f}, "
      f"max count {data.counts.max()}, mean flow {data.flow.mean():.4f}")
