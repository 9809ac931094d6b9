import pytest

from rauzy.permutations import (
    Permutation,
    all_irreducible,
    apply_a,
    apply_b,
    apply_op,
    is_irreducible,
    rauzy_class,
)

P = Permutation.parse


def test_parse_and_str_round_trip():
    for text in ("2 1", "3 2 1", "4 1 3 2"):
        assert str(P(text)) == text


def test_malformed_images_rejected():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))
    with pytest.raises(ValueError):
        Permutation((2, 3))
    with pytest.raises(ValueError):
        Permutation((1,))


def test_call_and_inverse():
    p = P("3 1 2")
    assert [p(j) for j in (1, 2, 3)] == [3, 1, 2]
    assert [p.inverse_of(v) for v in (1, 2, 3)] == [2, 3, 1]


def test_is_irreducible_examples():
    assert is_irreducible(P("2 1"))
    assert not is_irreducible(P("1 2"))
    assert not is_irreducible(P("2 1 3"))


def test_apply_a_examples():
    assert str(apply_a(P("2 1"))) == "2 1"
    assert str(apply_a(P("3 2 1"))) == "3 1 2"
    assert str(apply_a(P("2 3 1"))) == "2 3 1"


def test_apply_b_examples():
    assert str(apply_b(P("2 1"))) == "2 1"
    assert str(apply_b(P("3 2 1"))) == "2 3 1"
    assert str(apply_b(P("3 1 2"))) == "3 1 2"


def test_moves_reject_reducible():
    with pytest.raises(ValueError):
        apply_a(P("1 2"))
    with pytest.raises(ValueError):
        apply_b(P("1 3 2"))


def test_moves_preserve_irreducibility_up_to_m6():
    for m in range(2, 7):
        for pi in all_irreducible(m):
            assert is_irreducible(apply_a(pi))
            assert is_irreducible(apply_b(pi))


def test_class_of_two_symbols():
    g = rauzy_class(P("2 1"))
    assert len(g) == 1
    assert g.a_edge == (0,) and g.b_edge == (0,)


def test_class_of_reversal_three():
    g = rauzy_class(P("3 2 1"))
    assert {str(n) for n in g.nodes} == {"3 2 1", "3 1 2", "2 3 1"}
    edges = {(str(s), op, str(d)) for s, op, d in g.edges()}
    assert ("3 2 1", "a", "3 1 2") in edges
    assert ("3 2 1", "b", "2 3 1") in edges
    assert ("3 1 2", "a", "3 2 1") in edges
    assert ("3 1 2", "b", "3 1 2") in edges
    assert ("2 3 1", "a", "2 3 1") in edges
    assert ("2 3 1", "b", "3 2 1") in edges


def test_class_rejects_reducible_seed():
    with pytest.raises(ValueError):
        rauzy_class(P("1 2"))


def test_class_order_deterministic():
    g1 = rauzy_class(P("3 2 1"))
    g2 = rauzy_class(P("3 2 1"))
    assert g1.nodes == g2.nodes


def _classes_up_to(m_max):
    seen = set()
    out = []
    for m in range(2, m_max + 1):
        for pi in all_irreducible(m):
            if pi in seen:
                continue
            g = rauzy_class(pi)
            seen.update(g.nodes)
            out.append(g)
    return out


def test_classes_strongly_connected_up_to_m5():
    for g in _classes_up_to(5):
        n = len(g)
        # forward reachability from node 0
        fwd = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w in (g.a_edge[v], g.b_edge[v]):
                if w not in fwd:
                    fwd.add(w)
                    frontier.append(w)
        assert fwd == set(range(n))
        # backward reachability: edges reversed
        back = {i: set() for i in range(n)}
        for v in range(n):
            back[g.a_edge[v]].add(v)
            back[g.b_edge[v]].add(v)
        rev = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w in back[v]:
                if w not in rev:
                    rev.add(w)
                    frontier.append(w)
        assert rev == set(range(n))


def test_edges_are_bijections_on_each_class():
    for g in _classes_up_to(5):
        assert sorted(g.a_edge) == list(range(len(g)))
        assert sorted(g.b_edge) == list(range(len(g)))


def test_edge_csv_shape():
    g = rauzy_class(P("3 2 1"))
    lines = g.edge_csv().strip().split("\n")
    assert lines[0] == "src,op,dst"
    assert len(lines) == 1 + 2 * len(g)


def test_apply_op_dispatch():
    assert apply_op("a", P("3 2 1")) == apply_a(P("3 2 1"))
    assert apply_op("b", P("3 2 1")) == apply_b(P("3 2 1"))
    with pytest.raises(ValueError):
        apply_op("c", P("2 1"))
