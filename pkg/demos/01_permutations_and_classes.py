"""Permutations, the two elementary moves, and closure graphs.

Run with: python demos/01_permutations_and_classes.py
"""
from rauzy import Permutation, apply_a, apply_b, is_irreducible, rauzy_class

# Permutations are written in one-line notation: "3 2 1" sends 1->3, 2->2, 3->1.
pi = Permutation.parse("3 2 1")
print("pi =", pi, " irreducible:", is_irreducible(pi))

# Reducible permutations split the interval into independent blocks and are
# rejected by the dynamics.
print("1 2 irreducible:", is_irreducible(Permutation.parse("1 2")))

# The two moves reshuffle the one-line notation; iterating them from any
# irreducible permutation sweeps out its closure class.
print("a(3 2 1) =", apply_a(pi))
print("b(3 2 1) =", apply_b(pi))

graph = rauzy_class(pi)
print(f"\nclass of {pi}: {len(graph)} nodes")
for src, op, dst in graph.edges():
    print(f"  {src}  --{op}-->  {dst}")

# Both edge maps are bijections of the class, so the graph is 2-regular in
# and out; the edge list is also available as CSV for export.
print("\nedge CSV:")
print(graph.edge_csv())

# Classes grow quickly with the number of symbols.
for text in ("2 1", "3 2 1", "4 3 2 1", "5 4 3 2 1"):
    g = rauzy_class(Permutation.parse(text))
    print(f"class({text}): {len(g)} nodes")
