import math
from fractions import Fraction

import numpy as np
import pytest

from rauzy.errors import (
    CapExceededError,
    DenominatorOverflowError,
    IncompatibleWordError,
    NonGenericError,
)
from rauzy.induction import (
    BOUNDARY,
    MINUS,
    PLUS,
    IetPoint,
    classify,
    cylinder_contains,
    encode_prefix,
    hilbert_metric,
    inverse_branch,
    is_compatible_point,
    orbit,
    rauzy_step,
    zorich_step,
)
from rauzy.matrices import elementary_matrix, mat_vec
from rauzy.permutations import Permutation, all_irreducible
from rauzy.words import Letter, Word

P = Permutation.parse


def fpt(lam, pi_text):
    return IetPoint.from_floats(lam, P(pi_text))


def ept(lam, pi_text):
    return IetPoint.from_rationals(lam, P(pi_text))


def test_classify_examples():
    assert classify(fpt((0.7, 0.3), "2 1")) == PLUS
    assert classify(fpt((0.3, 0.7), "2 1")) == MINUS
    assert classify(fpt((0.5, 0.5), "2 1")) == BOUNDARY


def test_point_validation():
    with pytest.raises(ValueError):
        IetPoint((0.5, -0.5), P("2 1"))
    with pytest.raises(ValueError):
        IetPoint((0.5, 0.5, 0.5), P("2 1"))


def test_rauzy_step_examples():
    y, op = rauzy_step(fpt((0.3, 0.7), "2 1"))
    assert op == "b" and str(y.pi) == "2 1"
    assert abs(y.lam[0] - 3 / 7) < 1e-15 and abs(y.lam[1] - 4 / 7) < 1e-15

    y, op = rauzy_step(fpt((0.7, 0.3), "2 1"))
    assert op == "a"
    assert abs(y.lam[0] - 4 / 7) < 1e-15 and abs(y.lam[1] - 3 / 7) < 1e-15

    y, op = rauzy_step(ept((Fraction(1, 3), Fraction(2, 3)), "2 1"))
    assert op == "b" and y.lam == (Fraction(1, 2), Fraction(1, 2))


def test_rauzy_step_boundary_error():
    with pytest.raises(NonGenericError):
        rauzy_step(fpt((0.5, 0.5), "2 1"))


def test_branch_chosen_by_positivity(rng):
    # the rejected branch would produce a negative length
    for _ in range(200):
        m = int(rng.integers(2, 6))
        perms = all_irreducible(m)
        pi = perms[int(rng.integers(len(perms)))]
        lam = rng.dirichlet([1.0] * m)
        x = IetPoint.from_floats(lam, pi)
        if classify(x) == BOUNDARY:
            continue
        y, op = rauzy_step(x)
        assert all(v > 0 for v in y.lam)
        other = "b" if op == "a" else "a"
        A = elementary_matrix(other, pi)
        # solve A z = lam for the rejected branch; some entry must be negative
        z = np.linalg.solve(np.array(A, dtype=float), np.array(x.lam))
        assert z.min() < 0


def test_reconstruction_identity(rng):
    for _ in range(500):
        m = int(rng.integers(2, 6))
        perms = all_irreducible(m)
        pi = perms[int(rng.integers(len(perms)))]
        x = IetPoint.from_floats(rng.dirichlet([1.0] * m), pi)
        if classify(x) == BOUNDARY:
            continue
        y, op = rauzy_step(x)
        image = mat_vec(elementary_matrix(op, pi), y.lam)
        s = sum(image)
        assert max(abs(u / s - v) for u, v in zip(image, x.lam)) < 1e-12


def test_reconstruction_exact():
    x = ept((Fraction(3, 10), Fraction(7, 10)), "2 1")
    y, op = rauzy_step(x)
    image = mat_vec(elementary_matrix(op, x.pi), y.lam)
    s = sum(image)
    assert tuple(u / s for u in image) == x.lam


def test_zorich_step_examples():
    z, rec = zorich_step(fpt((0.3, 0.7), "2 1"))
    assert (rec.op, rec.count, rec.start) == ("b", 2, P("2 1"))
    assert abs(z.lam[0] - 0.75) < 1e-12

    z, rec = zorich_step(fpt((0.7, 0.3), "2 1"))
    assert (rec.op, rec.count) == ("a", 2)
    assert abs(z.lam[0] - 0.25) < 1e-12

    z, rec = zorich_step(ept((Fraction(2, 5), Fraction(3, 5)), "2 1"))
    assert (rec.op, rec.count) == ("b", 1)
    assert z.lam == (Fraction(2, 3), Fraction(1, 3))


def test_zorich_step_flow_time_is_log_mass():
    x = fpt((0.3, 0.7), "2 1")
    _, rec = zorich_step(x)
    # two subtractive steps keep mass 0.4 of the unit start
    assert abs(rec.flow_time - (-math.log(0.4))) < 1e-12


def test_zorich_equals_composed_elementary_steps_exact():
    x = ept((Fraction(17, 53), Fraction(36, 53)), "2 1")
    z, rec = zorich_step(x)
    y = x
    for _ in range(rec.count):
        y, _ = rauzy_step(y)
    assert y.lam == z.lam and y.pi == z.pi


def test_zorich_cap():
    with pytest.raises(CapExceededError):
        zorich_step(fpt((0.3, 0.7), "2 1"), cap=1)


def test_type_alternation(rng):
    for pi_text in ("2 1", "3 2 1", "4 3 2 1"):
        x = IetPoint.from_floats(rng.dirichlet([1.0] * P(pi_text).m), P(pi_text))
        for _ in range(50):
            side = classify(x)
            x, rec = zorich_step(x)
            assert classify(x) != side
            assert rec.op == ("a" if side == PLUS else "b")


def test_orbit_examples(rng):
    result = orbit(fpt((0.3, 0.7), "2 1"), 2)
    ops = [(rec.op, rec.count) for _, rec in result]
    assert ops[0] == ("b", 2)
    assert ops[1][0] == "a"
    assert abs(result[0][0].lam[0] - 0.75) < 1e-12

    assert len(orbit(fpt((0.3, 0.7), "2 1"), 0)) == 0


def test_orbit_exact_hits_boundary():
    with pytest.raises(NonGenericError) as info:
        orbit(ept((Fraction(1, 3), Fraction(2, 3)), "2 1"), 10)
    assert info.value.step is not None


def test_orbit_denominator_overflow():
    big = (1 << 80) + 1
    u = (2 * big) // 5
    x = ept((Fraction(u, big), Fraction(big - u, big)), "2 1")
    with pytest.raises(DenominatorOverflowError) as info:
        orbit(x, 5, max_denominator_bits=64)
    assert info.value.step == 0
    # small denominators never trip the same bound
    y = ept((Fraction(17, 53), Fraction(36, 53)), "2 1")
    try:
        orbit(y, 100, max_denominator_bits=64)
    except NonGenericError:
        pass  # rational orbits end on the boundary instead


def test_orbit_precision_events():
    # one two-step letter leaves a relative gap of ~5e-14 < 1e-13
    x = IetPoint.from_floats((1.0, 2.0 + 5e-14), P("2 1"))
    result = orbit(x, 1, cap=1 << 62)
    assert result[0][1].count == 2
    assert result.precision_events == [0]


def test_backend_agreement_until_float_budget(rng):
    # Float records track the exact ones while the accumulated expansion
    # stays within double precision.  The min-length precision event alone
    # does not bound the divergence: the derivative grows like e^(2 flow),
    # so the horizon is also capped by the cumulative flow time (12 keeps
    # the amplified rounding error near 1e-5).
    for pi_text in ("2 1", "3 2 1"):
        pi = P(pi_text)
        for _ in range(5):
            lam = rng.dirichlet([1.0] * pi.m)
            xf = IetPoint.from_floats(lam, pi)
            xe = IetPoint.from_rationals([Fraction(float(v)) for v in xf.lam], pi)
            floats = orbit(xf, 30)
            budget = 0.0
            horizon = 0
            for _, rec in floats:
                budget += rec.flow_time
                if budget > 12.0:
                    break
                horizon += 1
            if floats.precision_events:
                horizon = min(horizon, floats.precision_events[0])
            try:
                exact = orbit(xe, horizon, max_denominator_bits=1 << 62)
            except NonGenericError as e:
                horizon = e.step
                exact = orbit(xe, horizon, max_denominator_bits=1 << 62)
            exact_records = [(r.op, r.count) for _, r in exact][:horizon]
            float_records = [(r.op, r.count) for _, r in floats][:horizon]
            assert float_records == exact_records


def test_hilbert_metric_examples():
    x = fpt((0.5, 0.5), "2 1")
    assert hilbert_metric(x, x) == 0.0
    y = fpt((1 / 3, 2 / 3), "2 1")
    assert abs(hilbert_metric(x, y) - math.log(2)) < 1e-12
    w = fpt((0.4, 0.6), "2 1")
    assert hilbert_metric(w, fpt((0.4, 0.6), "2 1")) == 0.0


def test_hilbert_metric_infinite_across_permutations():
    x = fpt((0.4, 0.35, 0.25), "3 2 1")
    y = fpt((0.4, 0.35, 0.25), "3 1 2")
    assert hilbert_metric(x, y) == math.inf


def test_hilbert_metric_exact_accuracy():
    big = 10**30
    x = ept((Fraction(big, 2 * big + 1), Fraction(big + 1, 2 * big + 1)), "2 1")
    y = ept((Fraction(1, 2), Fraction(1, 2)), "2 1")
    d = hilbert_metric(x, y)
    assert 0 < d < 3e-30


def test_inverse_branch_examples():
    w = Word((Letter("b", 2, P("2 1")),))
    x = fpt((0.75, 0.25), "2 1")
    back = inverse_branch(w, x)
    assert abs(back.lam[0] - 0.3) < 1e-12 and abs(back.lam[1] - 0.7) < 1e-12

    assert inverse_branch(Word(()), x) == x

    w2 = Word((Letter("a", 1, P("2 1")),))
    y = inverse_branch(w2, fpt((0.5, 0.5), "2 1"))
    assert abs(y.lam[0] - 2 / 3) < 1e-12 and abs(y.lam[1] - 1 / 3) < 1e-12


def test_inverse_branch_mismatch():
    w = Word((Letter("a", 1, P("3 2 1")),))  # ends at 3 1 2
    with pytest.raises(IncompatibleWordError):
        inverse_branch(w, fpt((0.2, 0.3, 0.5), "3 2 1"))


def test_inverse_branch_reconstructs_step(rng):
    # hilbert distance between x and the letter's inverse image of G(x)
    for _ in range(10_000):
        m = int(rng.integers(2, 5))
        perms = all_irreducible(m)
        pi = perms[int(rng.integers(len(perms)))]
        x = IetPoint.from_floats(rng.dirichlet([1.0] * m), pi)
        z, rec = zorich_step(x)
        back = inverse_branch(Word((rec.to_letter(),)), z)
        assert hilbert_metric(x, back) < 1e-10


def test_inverse_branch_nonexpanding(rng):
    # projective 1-Lipschitz; strictly contracting for positive matrices
    w = Word((Letter("a", 1, P("2 1")), Letter("b", 1, P("2 1"))))
    from rauzy.matrices import contraction_coefficient, word_matrix

    kappa = contraction_coefficient(word_matrix(w))
    for _ in range(100):
        lam1, lam2 = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
        x, y = fpt(tuple(lam1), "2 1"), fpt(tuple(lam2), "2 1")
        d0 = hilbert_metric(x, y)
        d1 = hilbert_metric(inverse_branch(w, x), inverse_branch(w, y))
        assert d1 <= kappa * d0 + 1e-12


def test_forward_expansion_within_cylinder(rng):
    for _ in range(100):
        x = fpt(tuple(rng.dirichlet([1, 1])), "2 1")
        eps = 1e-6 * (rng.random() - 0.5)
        y = fpt((x.lam[0] + eps, x.lam[1] - eps), "2 1")
        wx = encode_prefix(x, 1)
        if encode_prefix(y, 1) != wx:
            continue
        gx, _ = zorich_step(x)
        gy, _ = zorich_step(y)
        assert hilbert_metric(gx, gy) >= hilbert_metric(x, y) - 1e-12


def test_encode_prefix_examples():
    assert encode_prefix(fpt((0.3, 0.7), "2 1"), 1) == Word((Letter("b", 2, P("2 1")),))
    assert encode_prefix(fpt((0.7, 0.3), "2 1"), 1) == Word((Letter("a", 2, P("2 1")),))
    assert encode_prefix(fpt((0.3, 0.7), "2 1"), 0) == Word(())


def test_shift_compatibility(rng):
    for _ in range(50):
        x = fpt(tuple(rng.dirichlet([1, 1, 1])), "3 2 1")
        g, _ = zorich_step(x)
        assert encode_prefix(x, 5).letters[1:] == encode_prefix(g, 4).letters


def test_cylinder_contains_examples():
    w = Word((Letter("b", 2, P("2 1")),))
    assert cylinder_contains(w, fpt((0.3, 0.7), "2 1"))
    assert not cylinder_contains(w, fpt((0.7, 0.3), "2 1"))
    assert cylinder_contains(Word(()), fpt((0.7, 0.3), "2 1"))


def test_cylinder_nesting(rng):
    for _ in range(50):
        x = fpt(tuple(rng.dirichlet([1, 1])), "2 1")
        w = encode_prefix(x, 3)
        assert cylinder_contains(Word(w.letters[:2]), x)
        assert cylinder_contains(Word(w.letters[:1]), x)


def test_is_compatible_point_examples():
    # matching chain end and matching type
    x = fpt((0.7, 0.3), "2 1")  # plus
    w = Word((Letter("a", 3, P("2 1")),))  # a^3 (2 1) = (2 1)
    assert is_compatible_point(w, x)
    # boundary point is never compatible
    assert not is_compatible_point(w, fpt((0.5, 0.5), "2 1"))
    # permutation mismatch
    w3 = Word((Letter("a", 1, P("3 2 1")),))  # ends at 3 1 2
    assert not is_compatible_point(w3, fpt((0.5, 0.3, 0.2), "3 2 1"))
    # type mismatch: 'b' letter needs a minus point
    wb = Word((Letter("b", 1, P("2 1")),))
    assert not is_compatible_point(wb, x)
    assert is_compatible_point(wb, fpt((0.3, 0.7), "2 1"))


def test_euclid_anchor_small():
    # elementary-step count to the boundary equals subtractive gcd steps
    def subtractive_steps(u, v):
        n = 0
        while u != v:
            if u > v:
                u -= v
            else:
                v -= u
            n += 1
        return n

    for p, q in [(3, 10), (17, 53), (8, 21), (355, 1130), (100, 101)]:
        x = ept((Fraction(p, q), Fraction(q - p, q)), "2 1")
        count = 0
        try:
            while True:
                x, _ = rauzy_step(x)
                count += 1
        except NonGenericError:
            pass
        assert count == subtractive_steps(p, q - p)
