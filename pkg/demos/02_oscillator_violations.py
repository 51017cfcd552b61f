"""Quantum violations for a harmonic oscillator probed at five times.

Derive the facets for X = 5 with the full sign-change constraints, then
maximise each one over states built from the first N energy eigenstates.
The printed table has the layout of the paper's Table 1.
"""

import numpy as np

from tsirelson.oscillator import (
    OscillatorScenario,
    classical_conditional_matrix,
    facet_type,
    halfline_overlap_matrix,
    sweep,
)

scen = OscillatorScenario(X=5, mode="full")

# %% the nontrivial facets, grouped by type
for f in scen.tsirelson_facets():
    print(f"{'/'.join(facet_type(f)):<14} {f}")

# %% the half-line overlap matrix
P = halfline_overlap_matrix(6)
print("\nP[0,1] =", P[0, 1], " 1/sqrt(2 pi) =", 1 / np.sqrt(2 * np.pi))

# %% maximal upper-bound violations against N
rows = {(r.N, r.type): r.value for r in sweep(scen, 15) if r.bound_side == "upper"}
bounds = {"type_t": 3, "type_1": 2, "type_2": 1}
print(f"\n{'N':>3} {'type T':>8} {'type I':>8} {'type II':>8}")
for N in (5, 6, 10, 15):
    cells = []
    for t in ("type_t", "type_1", "type_2"):
        v = rows[N, t]
        cells.append(f"{v:8.3f}" if v > bounds[t] + 1e-9 else " " * 8)
    print(f"{N:>3} " + " ".join(cells))

# %% classical trajectories never violate anything
rng = np.random.default_rng(0)
facets = scen.facets()
ok = all(facets.contains(classical_conditional_matrix(q, p, scen)) for q, p in rng.normal(size=(2000, 2)))
print("\n2000 classical trajectories inside the polytope:", ok)
