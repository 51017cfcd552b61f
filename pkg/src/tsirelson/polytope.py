"""Exact facet enumeration for polytopes with 0/1 vertices.

Points are conditional probability matrices in reduced coordinates. The
main routine is a double description over integers; an independent
exhaustive hyperplane search is kept as an oracle for small dimensions.
Degenerate vertex sets are handled by computing the affine hull first and
describing facets in a coordinate chart of the hull, so that inequalities
are unique once reduced modulo the hull equations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .scenario import (
    ConditionalProbabilityMatrix,
    ConstraintSet,
    Scenario,
    enumerate_constrained_vertices,
)

DIMENSION_CAP = 8
ORACLE_DIMENSION_CAP = 6

SENSES = ("<=", ">=", "==")


class DimensionCapError(ValueError):
    """Affine dimension above what the facet search is allowed to handle."""


def _lcm(a, b):
    return a * b // math.gcd(a, b)


@dataclass(frozen=True, order=False)
class LinearInequality:
    """``coeffs . p  sense  bound`` with primitive integer data.

    Use :meth:`make` to build one from arbitrary rationals; it clears
    denominators, divides out the common gcd, and flips the sense so that
    the first nonzero coefficient is positive.
    """

    coeffs: tuple
    sense: str
    bound: int

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")

    @classmethod
    def make(cls, coeffs: Sequence, sense: str, bound) -> "LinearInequality":
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        vals = [Fraction(c) for c in coeffs] + [Fraction(bound)]
        den = 1
        for v in vals:
            den = _lcm(den, v.denominator)
        ints = [int(v * den) for v in vals]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        c, b = ints[:-1], ints[-1]
        lead = next((v for v in c if v != 0), 0)
        if lead < 0:
            c = [-v for v in c]
            b = -b
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        return cls(tuple(c), sense, b)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def as_upper(self) -> tuple:
        """``(c, b)`` with the inequality written as ``c . p <= b``."""
        if self.sense == ">=":
            return tuple(-v for v in self.coeffs), -self.bound
        return self.coeffs, self.bound

    def negated(self) -> "LinearInequality":
        """The opposite closed half-space ``coeffs . p (reversed sense) bound``."""
        flip = {"<=": ">=", ">=": "<=", "==": "=="}[self.sense]
        return LinearInequality(self.coeffs, flip, self.bound)

    def sort_key(self):
        return (self.coeffs, self.bound, self.sense)

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs), "sense": self.sense, "bound": self.bound}

    @classmethod
    def from_json(cls, doc) -> "LinearInequality":
        return cls.make(doc["coeffs"], doc["sense"], doc["bound"])

    def pretty(self, A: int = 2) -> str:
        """Human-readable form in ``p(a|x)`` notation for ``A`` outcomes."""
        k = A - 1
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            name = f"p({i % k + 1}|{i // k + 1})"
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            terms.append(("- " if c < 0 else "+ ") + mag + name)
        lhs = " ".join(terms) or "0"
        lhs = lhs[2:] if lhs.startswith("+ ") else "-" + lhs[2:] if lhs.startswith("- ") else lhs
        return f"{lhs} {self.sense} {self.bound}"

    def __str__(self):
        return self.pretty(2)


def _reduced(v) -> tuple:
    if isinstance(v, ConditionalProbabilityMatrix):
        v = v.reduced()
    return tuple(Fraction(c) for c in v)


def evaluate(ineq: LinearInequality, cond):
    """Signed slack of ``cond``: nonnegative iff the inequality holds.

    Returns a Fraction for exact input and a float otherwise. For equalities
    the slack is minus the absolute residual.
    """
    if isinstance(cond, ConditionalProbabilityMatrix):
        vec = cond.reduced()
    else:
        vec = tuple(cond)
    if len(vec) != ineq.dim:
        raise ValueError(f"point has dimension {len(vec)}, inequality has {ineq.dim}")
    value = sum((c * v for c, v in zip(ineq.coeffs, vec) if c), Fraction(0))
    if ineq.sense == "<=":
        return ineq.bound - value
    if ineq.sense == ">=":
        return value - ineq.bound
    return -abs(value - ineq.bound)


def _rref(rows):
    """Reduced row echelon form over Fractions; returns (rows, pivot_columns)."""
    M = [list(r) for r in rows]
    if not M:
        return [], []
    ncol = len(M[0])
    pivots = []
    r = 0
    for c in range(ncol):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][c]
        M[r] = [v / pv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


@dataclass(frozen=True)
class Hull:
    """Affine hull data: dimension, hull equations and a coordinate chart.

    ``chart`` lists the coordinates that parametrize the hull; the remaining
    coordinates are affine functions of them given by ``equalities``.
    """

    dimension: int
    equalities: tuple
    chart: tuple


def _hull(points) -> Hull:
    pts = [_reduced(p) for p in points]
    if not pts:
        raise ValueError("affine hull of an empty vertex list")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("vertices of different dimension")
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    R, piv = _rref(diffs)
    dim = len(piv)
    free = [c for c in range(n) if c not in piv]
    # nullspace of the difference matrix: one vector per free column of R
    null = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for row, pc in zip(R, piv):
            vec[pc] = -row[f]
        null.append(vec)
    E, epiv = _rref(null)
    eqs = tuple(
        LinearInequality.make(row, "==", sum(a * b for a, b in zip(row, base)))
        for row in E
    )
    chart = tuple(c for c in range(n) if c not in epiv)
    return Hull(dim, tuple(sorted(eqs, key=LinearInequality.sort_key)), chart)


def affine_hull(vertices) -> tuple:
    """Dimension of the affine span and a complete set of its equations."""
    h = _hull(vertices)
    return h.dimension, list(h.equalities)


@dataclass
class FacetList:
    facets: list
    equalities: list
    dimension: int
    n_vertices: int = 0
    classes: list = field(default=None)

    def all_constraints(self) -> list:
        """Facets plus both halves of every hull equation."""
        out = list(self.facets)
        for e in self.equalities:
            out.append(LinearInequality(e.coeffs, "<=", e.bound))
            out.append(LinearInequality(e.coeffs, ">=", e.bound))
        return out

    def classify(self, scenario: Scenario) -> "FacetList":
        self.classes = [classify_trivial(f, scenario) for f in self.facets]
        return self

    def tsirelson(self, scenario: Scenario) -> list:
        return [f for f in self.facets if classify_trivial(f, scenario) == "tsirelson"]

    def contains(self, cond) -> bool:
        return all(evaluate(f, cond) >= 0 for f in self.all_constraints())

    def to_json(self, scenario: Scenario = None, constraints: ConstraintSet = None) -> dict:
        doc = {}
        if scenario is not None:
            doc["A"] = scenario.A
            doc["X"] = scenario.X
        if constraints is not None:
            doc["forbidden"] = [list(p) for p in constraints.forbidden]
        doc["n_vertices"] = self.n_vertices
        doc["dimension"] = self.dimension
        doc["equalities"] = [e.to_json() for e in self.equalities]
        facets = []
        for f in self.facets:
            d = f.to_json()
            if scenario is not None:
                d["class"] = classify_trivial(f, scenario)
            facets.append(d)
        doc["facets"] = facets
        return doc

    @classmethod
    def from_json(cls, doc) -> "FacetList":
        return cls(
            facets=[LinearInequality.from_json(f) for f in doc["facets"]],
            equalities=[LinearInequality.from_json(e) for e in doc["equalities"]],
            dimension=doc["dimension"],
            n_vertices=doc.get("n_vertices", 0),
        )


def _prepare(vertices, max_dim):
    pts = sorted(set(_reduced(v) for v in vertices))
    if len(pts) < 2:
        raise ValueError("facet enumeration needs at least 2 distinct vertices")
    if any(c not in (0, 1) for p in pts for c in p):
        raise ValueError("facet enumeration expects 0/1-valued vertices")
    hull = _hull(pts)
    if hull.dimension > max_dim:
        raise DimensionCapError(
            f"affine dimension {hull.dimension} exceeds the cap of {max_dim}"
        )
    local = [tuple(int(p[c]) for c in hull.chart) for p in pts]
    return pts, hull, local


def _lift(hull: Hull, n: int, a, b) -> LinearInequality:
    """Local ``a . y + b >= 0`` as a canonical inequality over all coordinates."""
    coeffs = [0] * n
    for c, v in zip(hull.chart, a):
        coeffs[c] = v
    return LinearInequality.make(coeffs, ">=", -b)


def _primitive(vec):
    g = 0
    for v in vec:
        g = math.gcd(g, v)
    return tuple(v // g for v in vec) if g > 1 else tuple(vec)


def _double_description(rows, dim):
    """Extreme rays of ``{h : w . h >= 0 for w in rows}`` (pointed, full rank).

    Integer rays with the combinatorial adjacency test.
    """
    rows = [tuple(r) for r in rows]
    # pick dim+1 linearly independent rows for the initial simplicial cone
    basis_idx = []
    R = []
    for i, w in enumerate(rows):
        trial, piv = _rref(R + [[Fraction(v) for v in w]])
        if len(piv) > len(basis_idx):
            basis_idx.append(i)
            R = [list(r) for r in trial]
        if len(basis_idx) == dim + 1:
            break
    B = [[Fraction(v) for v in rows[i]] for i in basis_idx]
    # rays of the initial cone are the columns of B^{-1}
    aug = [b + [Fraction(int(i == j)) for j in range(dim + 1)] for i, b in enumerate(B)]
    inv, _ = _rref(aug)
    rays = []
    for j in range(dim + 1):
        col = [inv[i][dim + 1 + j] for i in range(dim + 1)]
        den = 1
        for v in col:
            den = _lcm(den, v.denominator)
        rays.append(_primitive([int(v * den) for v in col]))

    def dot(w, r):
        return sum(a * b for a, b in zip(w, r))

    done = list(basis_idx)
    zero_sets = [frozenset(i for i in done if dot(rows[i], r) == 0) for r in rays]
    for k, w in enumerate(rows):
        if k in basis_idx:
            continue
        vals = [dot(w, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        zer = [i for i, v in enumerate(vals) if v == 0]
        new_rays = [rays[i] for i in pos + zer]
        new_zero = [zero_sets[i] for i in pos] + [zero_sets[i] | {k} for i in zer]
        for i in pos:
            for j in neg:
                common = zero_sets[i] & zero_sets[j]
                if len(common) < dim - 1:
                    continue
                if any(
                    t != i and t != j and common <= zero_sets[t]
                    for t in range(len(rays))
                ):
                    continue
                r = _primitive([vals[i] * b - vals[j] * a for a, b in zip(rays[i], rays[j])])
                new_rays.append(r)
                new_zero.append(common | {k})
        rays, zero_sets = new_rays, new_zero
        done.append(k)
    return rays


def facet_enumeration(vertices, max_dim: int = DIMENSION_CAP) -> FacetList:
    """All facets of the convex hull of 0/1 ``vertices``.

    Facets are canonical and sorted by coefficient vector. When the hull is
    not full-dimensional its equations are returned in ``equalities`` and
    facets only use the chart coordinates.

    Raises
    ------
    ValueError
        Fewer than two distinct vertices, or non 0/1 input.
    DimensionCapError
        Affine dimension above ``max_dim``.
    """
    pts, hull, local = _prepare(vertices, max_dim)
    n = len(pts[0])
    d = hull.dimension
    rows = [(1,) + y for y in local]
    rays = _double_description(rows, d)
    facets = {_lift(hull, n, r[1:], r[0]) for r in rays}
    return FacetList(
        sorted(facets, key=LinearInequality.sort_key),
        list(hull.equalities),
        d,
        len(pts),
    )


def _det_int(M):
    """Exact determinants of a batch of small integer matrices (Leibniz)."""
    k = M.shape[-1]
    if k == 0:
        return np.ones(M.shape[:-2], dtype=np.int64)
    total = np.zeros(M.shape[:-2], dtype=np.int64)
    for perm in itertools.permutations(range(k)):
        inv = sum(1 for a in range(k) for b in range(a + 1, k) if perm[a] > perm[b])
        term = np.ones(M.shape[:-2], dtype=np.int64)
        for r, c in enumerate(perm):
            term = term * M[..., r, c]
        total += -term if inv % 2 else term
    return total


def brute_force_facets(vertices, max_dim: int = ORACLE_DIMENSION_CAP, chunk: int = 20000) -> FacetList:
    """Exhaustive hyperplane fitting: same contract as :func:`facet_enumeration`.

    Every ``d``-subset of vertices is tried; its hyperplane normal is the
    vector of signed maximal minors of the ``d x (d+1)`` homogenized matrix,
    computed with integer determinants. A hyperplane is kept if it supports
    the whole vertex set.
    """
    pts, hull, local = _prepare(vertices, max_dim)
    n = len(pts[0])
    d = hull.dimension
    W = np.array([(1,) + y for y in local], dtype=np.int64)
    found = set()
    combos = itertools.combinations(range(len(W)), d)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        S = W[np.array(block)]  # (s, d, d+1)
        normals = np.empty((len(block), d + 1), dtype=np.int64)
        for j in range(d + 1):
            minor = np.delete(S, j, axis=2)
            normals[:, j] = (-1) ** j * _det_int(minor)
        # h . w = 0 for every w in the subset; rank d iff h != 0
        keep = np.any(normals != 0, axis=1)
        normals = normals[keep]
        vals = normals @ W.T
        nonneg = np.all(vals >= 0, axis=1)
        nonpos = np.all(vals <= 0, axis=1)
        normals = np.concatenate([normals[nonneg], -normals[nonpos & ~nonneg]])
        for h in np.unique(normals, axis=0):
            h = _primitive([int(v) for v in h])
            found.add(_lift(hull, n, h[1:], h[0]))
    return FacetList(
        sorted(found, key=LinearInequality.sort_key),
        list(hull.equalities),
        d,
        len(pts),
    )


def classify_trivial(ineq: LinearInequality, scenario: Scenario) -> str:
    """``"trivial"`` if the inequality holds on every conditional probability
    matrix of the scenario, ``"tsirelson"`` otherwise.

    The maximum of ``c . p`` over the unconstrained polytope separates into a
    per-setting maximum over the ``A`` outcomes (the last outcome has
    coefficient 0 in reduced coordinates).
    """
    if ineq.dim != scenario.reduced_dim:
        raise ValueError(
            f"inequality has {ineq.dim} coefficients, scenario needs {scenario.reduced_dim}"
        )
    if ineq.sense == "==":
        return "tsirelson" if any(ineq.coeffs) or ineq.bound != 0 else "trivial"
    c, b = ineq.as_upper()
    k = scenario.A - 1
    worst = sum(max(0, *c[x * k:(x + 1) * k]) for x in range(scenario.X))
    return "trivial" if worst <= b else "tsirelson"


@lru_cache(maxsize=64)
def _derive_cached(A, X, forbidden, max_dim):
    scenario = Scenario(A, X)
    verts = enumerate_constrained_vertices(scenario, ConstraintSet(forbidden))
    return facet_enumeration(verts, max_dim=max_dim)


def derive_inequalities(
    scenario: Scenario, constraints: ConstraintSet, max_dim: int = DIMENSION_CAP
) -> FacetList:
    """Facet list of the constrained polytope, with classes attached."""
    constraints.validate(scenario)
    fl = _derive_cached(scenario.A, scenario.X, tuple(sorted(constraints.forbidden)), max_dim)
    out = FacetList(list(fl.facets), list(fl.equalities), fl.dimension, fl.n_vertices)
    return out.classify(scenario)
