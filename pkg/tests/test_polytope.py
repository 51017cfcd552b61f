import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from tsirelson.polytope import (
    DimensionCapError,
    FacetList,
    LinearInequality,
    affine_hull,
    brute_force_facets,
    classify_trivial,
    derive_inequalities,
    evaluate,
    facet_enumeration,
)
from tsirelson.scenario import (
    ConditionalProbabilityMatrix,
    ConstraintSet,
    Scenario,
    enumerate_constrained_vertices,
    has_constrained_model,
)
from tsirelson.oscillator import generate_oscillator_constraints

L = LinearInequality.make


def box(n):
    out = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        out += [L(e, ">=", 0), L(e, "<=", 1)]
    return out


def _rank(points):
    from tsirelson.polytope import _rref
    base = points[0]
    return len(_rref([[F(a - b) for a, b in zip(p, base)] for p in points[1:]])[1])


class TestCanonicalForm:
    def test_clears_denominators_and_gcd(self):
        assert L([F(1, 2), F(1, 2)], "<=", F(1, 2)) == LinearInequality((1, 1), "<=", 1)
        assert L([2, 4], ">=", 6) == LinearInequality((1, 2), ">=", 3)

    def test_first_nonzero_positive(self):
        assert L([0, -1, 1], "<=", 0) == LinearInequality((0, 1, -1), ">=", 0)
        assert L([-1, -1], ">=", -1) == LinearInequality((1, 1), "<=", 1)

    def test_bad_sense(self):
        with pytest.raises(ValueError):
            L([1], "<", 0)

    def test_pretty(self):
        assert L([1, -1, 2], ">=", 0).pretty() == "p(1|1) - p(1|2) + 2*p(1|3) >= 0"
        assert L([0, 1, 1, 0], "<=", 1).pretty(A=3) == "p(2|1) + p(1|2) <= 1"


class TestAffineHull:
    def test_full_dimensional(self, tsirelson3):
        assert affine_hull(enumerate_constrained_vertices(*tsirelson3)) == (3, [])

    def test_single_point(self):
        dim, eqs = affine_hull([(0, 0, 0)])
        assert dim == 0 and len(eqs) == 3
        assert all(e.bound == 0 for e in eqs)

    def test_segment(self):
        assert affine_hull([(0, 0), (1, 1)]) == (1, [LinearInequality((1, -1), "==", 0)])

    def test_empty(self):
        with pytest.raises(ValueError):
            affine_hull([])


class TestFacets:
    def test_eq3(self, tsirelson3):
        fl = facet_enumeration(enumerate_constrained_vertices(*tsirelson3))
        assert fl.dimension == 3 and fl.equalities == []
        expect = box(3) + [L([1, 1, 1], ">=", 1), L([1, 1, 1], "<=", 2)]
        assert set(fl.facets) == set(expect) and len(fl.facets) == 8

    def test_triangle(self):
        fl = facet_enumeration([(0, 0), (0, 1), (1, 0)])
        assert fl.facets == [L([0, 1], ">=", 0), L([1, 0], ">=", 0), L([1, 1], "<=", 1)]

    def test_cube(self):
        fl = facet_enumeration(enumerate_constrained_vertices(Scenario(2, 3), ConstraintSet()))
        assert set(fl.facets) == set(box(3))

    def test_sorted(self, tsirelson3):
        fl = facet_enumeration(enumerate_constrained_vertices(*tsirelson3))
        keys = [f.sort_key() for f in fl.facets]
        assert keys == sorted(keys)

    def test_lower_dimensional(self):
        # square face of the cube inside p(1|3) = 1
        verts = [(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)]
        fl = facet_enumeration(verts)
        assert fl.dimension == 2
        assert fl.equalities == [LinearInequality((0, 0, 1), "==", 1)]
        assert set(fl.facets) == set(box(2)[0:0] + [L([1, 0, 0], ">=", 0), L([1, 0, 0], "<=", 1),
                                                    L([0, 1, 0], ">=", 0), L([0, 1, 0], "<=", 1)])

    def test_lower_dimensional_triangle(self):
        # triangle in the plane p1 + p2 + p3 = 1
        fl = facet_enumeration([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
        assert fl.dimension == 2
        assert fl.equalities == [LinearInequality((1, 1, 1), "==", 1)]
        for f in fl.facets:
            assert f.coeffs[0] == 0  # reduced out of the pivot coordinate
        assert len(fl.facets) == 3
        assert fl.facets == brute_force_facets([(1, 0, 0), (0, 1, 0), (0, 0, 1)]).facets

    def test_errors(self):
        with pytest.raises(ValueError):
            facet_enumeration([(0, 1)])
        with pytest.raises(ValueError):
            facet_enumeration([(0, 1), (F(1, 2), 0)])
        verts = enumerate_constrained_vertices(Scenario(2, 9), ConstraintSet(((1,) * 9,)))
        with pytest.raises(DimensionCapError):
            facet_enumeration(verts)

    def test_A3(self):
        scen = Scenario(3, 2)
        cons = ConstraintSet(((1, 1), (2, 2), (3, 3)))
        verts = enumerate_constrained_vertices(scen, cons)
        fl = facet_enumeration(verts)
        assert fl.dimension == 4
        assert fl.facets == brute_force_facets(verts).facets
        # p(1|1) + p(1|2) <= 1 must hold because the word (1,1) is banned
        assert L([1, 0, 1, 0], "<=", 1) in fl.facets

    def test_larger_dd_only(self):
        # X=7 oscillator polytopes sit above the oracle cap
        for mode in ("full", "basic"):
            scen = Scenario(2, 7)
            cons = generate_oscillator_constraints(7, mode)
            verts = enumerate_constrained_vertices(scen, cons)
            fl = facet_enumeration(verts)
            for f in fl.facets:
                tight = [v.reduced() for v in verts if evaluate(f, v) == 0]
                assert all(evaluate(f, v) >= 0 for v in verts)
                assert _rank(tight) == fl.dimension - 1


@st.composite
def scenarios(draw):
    A, X = draw(st.sampled_from([(2, 2), (2, 3), (2, 4), (3, 2)]))
    scen = Scenario(A, X)
    pats = list(scen.patterns())
    forb = draw(st.lists(st.sampled_from(pats), unique=True, max_size=len(pats) - 2))
    return scen, ConstraintSet(tuple(sorted(forb)))


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(scenarios())
    def test_dd_matches_oracle(self, sc):
        verts = enumerate_constrained_vertices(*sc)
        fl, bf = facet_enumeration(verts), brute_force_facets(verts)
        assert fl.facets == bf.facets and fl.equalities == bf.equalities

    @settings(max_examples=60, deadline=None)
    @given(scenarios())
    def test_sound_and_tight(self, sc):
        verts = enumerate_constrained_vertices(*sc)
        fl = facet_enumeration(verts)
        for e in fl.equalities:
            assert all(evaluate(e, v) == 0 for v in verts)
        for f in fl.facets:
            assert all(evaluate(f, v) >= 0 for v in verts)
            tight = [v.reduced() for v in verts if evaluate(f, v) == 0]
            assert len(tight) >= fl.dimension
            assert _rank(tight) == fl.dimension - 1

    def test_hypercube_facets_trivial(self):
        for X in (1, 2, 3, 4):
            scen = Scenario(2, X)
            fl = derive_inequalities(scen, ConstraintSet())
            assert all(c == "trivial" for c in fl.classes)


def _random_points(n, count, rng):
    pts = []
    for _ in range(count):
        pts.append(tuple(F(rng.randint(0, 12), 12) for _ in range(n)))
    return pts


ROUND_TRIP = [
    (Scenario(2, 3), ConstraintSet(((1, 1, 1),))),
    (Scenario(2, 3), ConstraintSet(((1, 1, 1), (2, 2, 2)))),
    (Scenario(2, 5), generate_oscillator_constraints(5, "full")),
    (Scenario(2, 5), generate_oscillator_constraints(5, "basic")),
    (Scenario(2, 2), ConstraintSet(((1, 2), (2, 1)))),
]


@pytest.mark.parametrize("scen,cons", ROUND_TRIP)
def test_round_trip_membership(scen, cons):
    """LP membership agrees with the facet description on 1000 rational points."""
    rng = random.Random(1234)
    fl = derive_inequalities(scen, cons)
    inside = 0
    verts = [v.reduced() for v in enumerate_constrained_vertices(scen, cons)]
    pts = _random_points(scen.reduced_dim, 700, rng)
    # convex combinations of vertices so that the interior is sampled too
    for _ in range(300):
        w = [F(rng.randint(0, 5)) for _ in verts]
        if not any(w):
            w[0] = F(1)
        s = sum(w)
        pts.append(tuple(sum(wi * v[i] for wi, v in zip(w, verts)) / s for i in range(scen.reduced_dim)))
    for p in pts:
        cond = ConditionalProbabilityMatrix.from_reduced(p)
        res = has_constrained_model(cond, scen, cons)
        assert res.feasible == fl.contains(cond)
        inside += res.feasible
        if not res.feasible:
            assert evaluate(res.witness, cond) < 0
    assert 300 <= inside < len(pts)


class TestClassify:
    def test_positivity(self):
        assert classify_trivial(L([1, 0, 0], ">=", 0), Scenario(2, 3)) == "trivial"

    def test_eq2(self):
        assert classify_trivial(L([1, 1, 1], "<=", 2), Scenario(2, 3)) == "tsirelson"

    def test_eq8_lower(self):
        assert classify_trivial(L([1] * 5, ">=", 2), Scenario(2, 5)) == "tsirelson"

    def test_matches_vertex_enumeration(self):
        # per-setting extremization versus all A^X unconstrained vertices
        rng = random.Random(5)
        scen = Scenario(3, 3)
        verts = enumerate_constrained_vertices(scen, ConstraintSet())
        for _ in range(200):
            c = [rng.randint(-2, 2) for _ in range(6)]
            ineq = L(c, rng.choice(["<=", ">="]), rng.randint(-3, 3))
            brute = "trivial" if all(evaluate(ineq, v) >= 0 for v in verts) else "tsirelson"
            assert classify_trivial(ineq, scen) == brute

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            classify_trivial(L([1, 1], "<=", 1), Scenario(2, 3))


class TestEvaluate:
    def test_eq2_excluded_vertex(self):
        assert evaluate(L([1, 1, 1], "<=", 2), (1, 1, 1)) == -1

    def test_eq3_lower_center(self):
        assert evaluate(L([1, 1, 1], ">=", 1), (F(1, 3),) * 3) == 0

    def test_type1_half(self):
        assert evaluate(L([1, 0, 1, 0, 1], "<=", 2), (F(1, 2),) * 5) == F(1, 2)

    def test_float(self):
        assert evaluate(L([1, 1], "<=", 1), (0.25, 0.25)) == pytest.approx(0.5)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            evaluate(L([1, 1], "<=", 1), (0, 0, 0))


def test_json_format(tsirelson3):
    scen, cons = tsirelson3
    doc = derive_inequalities(scen, cons).to_json(scen, cons)
    assert doc["dimension"] == 3 and doc["equalities"] == []
    assert {"coeffs": [1, 1, 1], "sense": "<=", "bound": 2, "class": "tsirelson"} in doc["facets"]
    back = FacetList.from_json(json.loads(json.dumps(doc)))
    assert back.facets == derive_inequalities(scen, cons).facets
