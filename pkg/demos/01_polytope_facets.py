"""Tsirelson inequalities as facets of a constrained polytope.

Start from the square of 2x2 conditional probability matrices, forbid the
word (1, 1) and watch the square collapse to a triangle; then repeat for
three settings with one and two forbidden words.
"""

from tsirelson import (
    ConditionalProbabilityMatrix,
    ConstraintSet,
    Scenario,
    derive_inequalities,
    enumerate_constrained_vertices,
    has_constrained_model,
)

# %% two settings, word (1,1) forbidden
scen = Scenario(A=2, X=2)
cons = ConstraintSet(((1, 1),))
print("vertices:", [tuple(int(c) for c in v.reduced()) for v in enumerate_constrained_vertices(scen, cons)])
for f, c in zip((fl := derive_inequalities(scen, cons)).facets, fl.classes):
    print(f"  {c:<10} {f}")

# %% three settings: forbid 111, then 111 and 222
scen = Scenario(2, 3)
for forbidden in [((1, 1, 1),), ((1, 1, 1), (2, 2, 2))]:
    cons = ConstraintSet(forbidden)
    fl = derive_inequalities(scen, cons)
    print(f"\nforbidden {forbidden}: {fl.n_vertices} vertices, dimension {fl.dimension}")
    for f in fl.tsirelson(scen):
        print("  tsirelson:", f)

# %% membership with a certificate either way
cons = ConstraintSet(((1, 1, 1), (2, 2, 2)))
for q in ([0.3, 0.3, 0.4], [0.9, 0.9, 0.9]):
    res = has_constrained_model(ConditionalProbabilityMatrix.from_reduced(q), scen, cons)
    if res.feasible:
        print(q, "-> classical model on", res.model.support())
    else:
        print(q, "-> no model, violated:", res.witness)
