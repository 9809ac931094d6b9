"""Itinerary letters, compatible words, cylinders, and the matrix cocycle.

Run with: python demos/03_symbolic_coding.py
"""
import numpy as np

from rauzy import (
    Permutation,
    Word,
    contraction_coefficient,
    cylinder_contains,
    encode_prefix,
    find_positive_word,
    inverse_branch,
    letter_compat,
    matrix_norm,
    parse_word,
    rauzy_class,
    run_orbit,
    sample_simplex,
    word_matrix,
)
from rauzy.stats import cylinder_shrinkage
from rauzy.words import cylinder_geometry

pi = Permutation.parse("2 1")

# Each accelerated step emits a letter (move, count, start permutation);
# consecutive letters must chain and alternate move type.
x = sample_simplex(pi, np.random.default_rng(1))
print("start lengths:", x.lam)
w = encode_prefix(x, 6)
print("itinerary prefix:", w)
print("junction checks:", [letter_compat(u, v) for u, v in zip(w, w[1:])])

# Words carry integer matrices; norms grow exponentially with the length.
print("\nlen  log-norm of the prefix matrix")
for n in range(1, 7):
    A = word_matrix(Word(w.letters[:n]))
    print(f"{n:3d}  {np.log(float(matrix_norm(A))):8.3f}")

# The cylinder of a word is the set of points whose itinerary starts with
# it; its vertices are the normalized matrix columns.
q = find_positive_word(rauzy_class(pi), 8)
print("\nshortest all-positive word:", q)
vertices, diameter = cylinder_geometry(q)
print("cylinder vertices:", [tuple(map(float, v)) for v in vertices])
print(f"cylinder diameter {diameter:.4f}, contraction {contraction_coefficient(word_matrix(q)):.4f}")

# Membership is a prefix match of itineraries.  The end point must open
# with the move type opposite to the word's last letter, otherwise its own
# first letter merges with the word's and the prefix changes.
from rauzy import classify

end_rng = np.random.default_rng(3)
end = sample_simplex(pi, end_rng)
while classify(end) != ("plus" if q.letters[-1].c == "b" else "minus"):
    end = sample_simplex(pi, end_rng)
inside = inverse_branch(q, end)
print("inverse branch image in cylinder:", cylinder_contains(q, inside))

# Along an orbit, every further occurrence of the positive word multiplies
# the prefix-cylinder diameter by at most the contraction coefficient, which
# is how symbolic itineraries pin down points uniquely.
data = run_orbit(sample_simplex(pi, np.random.default_rng(7)), 3000, cap=1 << 62,
                 store_lambda=False)
print("\noccurrence  prefix letters  diameter")
for end, diam in cylinder_shrinkage(data, q, max_occurrences=8):
    print(f"{end:10d}  {diam:26.3e}")

# The word text format round-trips.
assert parse_word(str(q)) == q
print("\nword text form:", str(q))
