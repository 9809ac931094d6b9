import math
from fractions import Fraction

import numpy as np
import pytest

from rauzy.errors import NonGenericError
from rauzy.induction import zorich_step
from rauzy.permutations import Permutation, rauzy_class
from rauzy.zippered import (
    ZipperedRectangle,
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
)

P = Permutation.parse

VALID_M2 = ZipperedRectangle((0.5, 0.5), (1.0, 1.0), (1.0, 0.0), P("2 1"))


def test_validate_examples():
    assert validate(VALID_M2) == []
    bad = ZipperedRectangle((0.5, 0.5), (1.0, 1.0), (0.0, 0.0), P("2 1"))
    violations = validate(bad)
    assert violations and any(v.name.startswith("eq") for v in violations)
    assert any(abs(v.residual - 1.0) < 1e-12 for v in violations)
    flat = ZipperedRectangle((0.5, 0.5), (0.0, 0.0), (0.0, 0.0), P("2 1"))
    assert any(v.name == "area=1" for v in validate(flat))


def test_area_examples():
    assert area(VALID_M2) == 1.0
    assert abs(area(flow(VALID_M2, 0.7)) - 1.0) < 1e-12
    doubled = ZipperedRectangle(VALID_M2.lam, tuple(2 * h for h in VALID_M2.h),
                                VALID_M2.a, VALID_M2.pi)
    assert area(doubled) == 2.0


def test_flow_examples():
    same = flow(VALID_M2, 0.0)
    assert same.lam == VALID_M2.lam and same.h == VALID_M2.h
    f = flow(VALID_M2, math.log(2))
    assert np.allclose(f.lam, (1.0, 1.0))
    assert np.allclose(f.h, (0.5, 0.5))
    assert np.allclose(f.a, (0.5, 0.0))
    two = flow(flow(VALID_M2, 0.3), 0.4)
    one = flow(VALID_M2, 0.7)
    assert np.allclose(two.lam, one.lam) and np.allclose(two.h, one.h)


def test_zip_step_worked_example():
    x = ZipperedRectangle((1 / 3, 2 / 3), (1.0, 1.0), (1.0, 0.0), P("2 1"))
    y = zip_step(x)
    assert np.allclose(y.lam, (1 / 3, 1 / 3))
    assert np.allclose(y.h, (2.0, 1.0))
    assert np.allclose(y.a, (1.0, -1.0))
    assert str(y.pi) == "2 1"
    assert abs(area(y) - 1.0) < 1e-12
    assert validate(y) == []


def test_zip_step_boundary():
    x = ZipperedRectangle((0.5, 0.5), (1.0, 1.0), (1.0, 0.0), P("2 1"))
    with pytest.raises(NonGenericError):
        zip_step(x)


def test_zip_step_exact_area():
    x = ZipperedRectangle(
        (Fraction(1, 3), Fraction(2, 3)),
        (Fraction(1), Fraction(1)),
        (Fraction(1), Fraction(0)),
        P("2 1"),
    )
    y = zip_step(x)
    assert area(y) == 1
    assert y.lam == (Fraction(1, 3), Fraction(1, 3))


def test_tau_examples():
    x = ZipperedRectangle((1 / 3, 2 / 3), (1.0, 1.0), (1.0, 0.0), P("2 1"))
    assert abs(tau(x) - math.log(1.5)) < 1e-15
    y = ZipperedRectangle((2 / 3, 1 / 3), (1.0, 1.0), (1.0, 0.0), P("2 1"))
    assert abs(tau(y) - math.log(1.5)) < 1e-15
    tiny = ZipperedRectangle((1e-9, 1 - 1e-9), (1.0, 1.0), (1.0, 0.0), P("2 1"))
    assert 0 < tau(tiny) < 2e-9


def test_elementary_return_examples():
    x = ZipperedRectangle((1 / 3, 2 / 3), (1.0, 1.0), (1.0, 0.0), P("2 1"))
    y = elementary_return(x)
    assert np.allclose(y.lam, (0.5, 0.5))
    assert abs(area(y) - 1.0) < 1e-12
    assert abs(sum(y.lam) - 1.0) < 1e-12
    # the return time is tau: scaling restores unit mass
    assert abs(-math.log(sum(zip_step(x).lam)) - tau(x)) < 1e-12


def test_flow_and_step_commute(rng):
    for pi_text in ("2 1", "3 2 1", "2 3 1", "4 3 2 1", "4 1 3 2"):
        pi = P(pi_text)
        for _ in range(60):
            x = random_rectangle(pi, rng)
            for t in (0.1, 1.0):
                u = flow(zip_step(x), t)
                v = zip_step(flow(x, t))
                for p, q in zip(u.lam + u.h + u.a, v.lam + v.h + v.a):
                    assert abs(p - q) < 1e-12


def test_zip_step_preserves_validity_and_area(rng):
    for pi_text in ("2 1", "3 2 1", "2 3 1", "3 1 2", "4 3 2 1"):
        pi = P(pi_text)
        for _ in range(60):
            x = random_rectangle(pi, rng)
            y = zip_step(x)
            assert validate(y) == []
            assert abs(area(y) - 1.0) < 1e-12


def test_first_return_lifts_accelerated_step(rng):
    for pi_text in ("2 1", "3 2 1", "4 3 2 1"):
        pi = P(pi_text)
        for _ in range(60):
            x = random_rectangle(pi, rng)
            fr, rec = first_return(x)
            zp, zrec = zorich_step(x.base())
            assert (rec.op, rec.count, rec.start) == (zrec.op, zrec.count, zrec.start)
            assert max(abs(p - q) for p, q in zip(fr.base().lam, zp.lam)) < 1e-9
            assert abs(rec.flow_time - zrec.flow_time) < 1e-9


def test_first_return_component_alternation(rng):
    for _ in range(40):
        x = random_rectangle(P("3 2 1"), rng)
        fr, _ = first_return(x)
        c1 = y_component(fr)
        assert c1 is not None  # images land on the letter boundary
        fr2, _ = first_return(fr)
        c2 = y_component(fr2)
        assert c2 is not None and c2 != c1


def test_first_return_time_consistency(rng):
    # per-letter flow time equals the log mass of the image under the
    # letter matrix
    from rauzy.matrices import letter_matrix, mat_vec

    for _ in range(40):
        x = random_rectangle(P("3 2 1"), rng)
        fr, rec = first_return(x)
        A = letter_matrix(rec.to_letter())
        image = mat_vec(A, fr.base().lam)
        assert abs(rec.flow_time - math.log(sum(image))) < 1e-9


def test_random_rectangle_m2_structure(rng):
    for _ in range(100):
        x = random_rectangle(P("2 1"), rng)
        h1, h2 = x.h
        a1, a2 = x.a
        assert abs(a1 - h2) < 1e-9
        assert abs(a2 - (h2 - h1)) < 1e-9
        assert validate(x) == []
        assert abs(area(x) - 1.0) < 1e-12


def test_random_rectangle_all_m4_nodes(rng):
    graph = rauzy_class(P("4 3 2 1"))
    for pi in graph.nodes:
        x = random_rectangle(pi, rng)
        assert validate(x) == []


def test_rectangle_json_fields(rng):
    x = random_rectangle(P("2 1"), rng)
    payload = rectangle_json(x)
    assert set(payload) == {"lambda", "h", "a", "pi", "area", "violations"}
    assert payload["violations"] == []
    assert abs(payload["area"] - 1.0) < 1e-12
