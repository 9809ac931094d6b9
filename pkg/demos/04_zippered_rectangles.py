"""Suspension rectangles: the area-preserving step, the scaling flow, and
the first-return lift of the accelerated induction.

Run with: python demos/04_zippered_rectangles.py
"""
import json

import numpy as np

from rauzy import (
    Permutation,
    area,
    elementary_return,
    first_return,
    flow,
    random_rectangle,
    rectangle_json,
    tau,
    validate,
    y_component,
    zip_step,
    zorich_step,
)

pi = Permutation.parse("3 2 1")
rng = np.random.default_rng(42)

# A rectangle pairs widths with heights and zipper offsets subject to a
# linear system; sampling solves the system and rejects on the inequalities.
x = random_rectangle(pi, rng)
print(json.dumps(rectangle_json(x), indent=2))

# The step multiplies widths by an inverse integer matrix and heights by its
# transpose, so the area is conserved exactly.
y = zip_step(x)
print("\nstep preserves area:", area(x), "->", area(y))
print("step preserves constraints:", validate(y) == [])

# The scaling flow stretches widths and shrinks heights; it commutes with
# the step.
t = 0.35
u = flow(zip_step(x), t)
v = zip_step(flow(x, t))
residual = max(abs(p - q) for p, q in zip(u.lam + u.h + u.a, v.lam + v.h + v.a))
print(f"flow/step commutation residual: {residual:.2e}")

# Between unit-width crossings the flow runs for time tau.
print(f"tau(x) = {tau(x):.4f}")
back = elementary_return(x)
print("elementary return keeps |lam| = 1:", abs(sum(back.lam) - 1) < 1e-12)

# The first return to the letter-boundary transversal projects exactly onto
# the accelerated step of the base point, alternating components.
fr, rec = first_return(x)
zp, zrec = zorich_step(x.base())
print(f"\nfirst return letter: ({rec.op}, {rec.count}), base step letter: "
      f"({zrec.op}, {zrec.count})")
print("base points agree:", max(abs(p - q) for p, q in zip(fr.base().lam, zp.lam)) < 1e-9)
print("flow time vs base flow time:", rec.flow_time, zrec.flow_time)

component = y_component(fr)
fr2, _ = first_return(fr)
print("component alternation:", component, "->", y_component(fr2))
