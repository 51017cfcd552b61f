"""Scenarios, zero-pattern constraints and constrained classical models.

A scenario fixes ``A`` outcomes for each of ``X`` settings. A global
distribution lives on words ``(a_1, ..., a_X)`` with letters in ``1..A``;
its marginals are the conditional probabilities ``p(a|x)``. Constraints
force chosen words to have zero weight, which removes the matching 0/1
vertices from the polytope of conditional probability matrices.

All patterns are 1-based tuples, matching the JSON file format.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Optional, Sequence

import numpy as np

from ._lp import exact_feasibility

PROB_TOL = 1e-12
LP_TOL = 1e-9

Pattern = tuple


@dataclass(frozen=True)
class Scenario:
    """Number of outcomes ``A`` per setting and number of settings ``X``."""

    A: int
    X: int

    def __post_init__(self):
        if int(self.A) != self.A or self.A < 2:
            raise ValueError(f"A must be an integer >= 2, got {self.A!r}")
        if int(self.X) != self.X or self.X < 1:
            raise ValueError(f"X must be an integer >= 1, got {self.X!r}")

    @property
    def reduced_dim(self) -> int:
        return (self.A - 1) * self.X

    def patterns(self):
        """All ``A**X`` outcome words in lexicographic order."""
        return itertools.product(range(1, self.A + 1), repeat=self.X)

    def check_pattern(self, pattern) -> Pattern:
        pattern = tuple(int(a) for a in pattern)
        if len(pattern) != self.X:
            raise ValueError(f"pattern {pattern} has length {len(pattern)}, expected X={self.X}")
        if any(a < 1 or a > self.A for a in pattern):
            raise ValueError(f"pattern {pattern} has letters outside 1..{self.A}")
        return pattern


@dataclass(frozen=True)
class ConstraintSet:
    """Forbidden outcome words, i.e. words with zero global probability."""

    forbidden: tuple = ()

    def __post_init__(self):
        pats = tuple(tuple(int(a) for a in p) for p in self.forbidden)
        if len(set(pats)) != len(pats):
            raise ValueError("duplicate forbidden patterns")
        object.__setattr__(self, "forbidden", pats)

    def validate(self, scenario: Scenario) -> "ConstraintSet":
        for p in self.forbidden:
            scenario.check_pattern(p)
        return self

    def __len__(self):
        return len(self.forbidden)

    def __contains__(self, pattern):
        return tuple(pattern) in set(self.forbidden)


def parse_forbid(text: str, scenario: Scenario) -> ConstraintSet:
    """Parse ``"111,222"`` style digit strings (only for ``A <= 9``)."""
    if scenario.A > 9:
        raise ValueError("digit-string patterns need A <= 9; use a JSON scenario file")
    pats = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if not tok.isdigit():
            raise ValueError(f"bad pattern {tok!r}")
        pats.append(scenario.check_pattern(int(c) for c in tok))
    return ConstraintSet(tuple(pats))


def scenario_to_json(scenario: Scenario, constraints: ConstraintSet) -> dict:
    return {
        "A": scenario.A,
        "X": scenario.X,
        "forbidden": [list(p) for p in constraints.forbidden],
    }


def scenario_from_json(doc) -> tuple:
    """Build ``(Scenario, ConstraintSet)`` from a dict or JSON string."""
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        scenario = Scenario(doc["A"], doc["X"])
        forbidden = doc.get("forbidden", [])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario document: {exc}") from exc
    constraints = ConstraintSet(tuple(scenario.check_pattern(p) for p in forbidden))
    return scenario, constraints


def _as_number(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Rational):
        return Fraction(v)
    return float(v)


@dataclass(frozen=True)
class ConditionalProbabilityMatrix:
    """The table ``p(a|x)`` stored as ``X`` rows of ``A`` entries.

    Entries are kept as :class:`fractions.Fraction` when every input is
    rational (ints or Fractions) and as floats otherwise.
    """

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(_as_number(v) for v in row) for row in self.entries)
        if not rows or len({len(r) for r in rows}) != 1 or len(rows[0]) < 2:
            raise ValueError("entries must be a non-empty X-by-A table with A >= 2")
        exact = all(isinstance(v, Fraction) for r in rows for v in r)
        if not exact:
            rows = tuple(tuple(float(v) for v in r) for r in rows)
        tol = 0 if exact else PROB_TOL
        for x, r in enumerate(rows, start=1):
            if any(v < -tol or v > 1 + tol for v in r):
                raise ValueError(f"row {x} has entries outside [0, 1]: {r}")
            if abs(sum(r) - 1) > tol:
                raise ValueError(f"row {x} does not sum to 1: {r}")
        object.__setattr__(self, "entries", rows)

    @property
    def X(self) -> int:
        return len(self.entries)

    @property
    def A(self) -> int:
        return len(self.entries[0])

    @property
    def is_exact(self) -> bool:
        return isinstance(self.entries[0][0], Fraction)

    def reduced(self) -> tuple:
        """Canonical coordinates ``(p(1|1), ..., p(A-1|1), ..., p(A-1|X))``."""
        return tuple(v for row in self.entries for v in row[:-1])

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.entries])

    @classmethod
    def from_reduced(cls, vec: Sequence, A: int = 2) -> "ConditionalProbabilityMatrix":
        vec = [_as_number(v) for v in vec]
        if len(vec) % (A - 1):
            raise ValueError(f"reduced vector length {len(vec)} not a multiple of A-1={A - 1}")
        rows = []
        for i in range(0, len(vec), A - 1):
            head = vec[i:i + A - 1]
            rows.append(tuple(head) + (1 - sum(head),))
        return cls(tuple(rows))


@dataclass(frozen=True)
class GlobalDistribution:
    """Weights on outcome words; words absent from ``weights`` have zero weight."""

    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        w = {tuple(int(a) for a in k): _as_number(v) for k, v in self.weights.items()}
        exact = all(isinstance(v, Fraction) for v in w.values())
        tol = 0 if exact else PROB_TOL
        if any(v < -tol for v in w.values()):
            raise ValueError("negative weight in global distribution")
        if abs(sum(w.values()) - 1) > tol:
            raise ValueError(f"weights sum to {sum(w.values())}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def delta(cls, pattern) -> "GlobalDistribution":
        return cls({tuple(pattern): Fraction(1)})

    def support(self):
        return sorted(k for k, v in self.weights.items() if v != 0)


def marginalize(global_dist: GlobalDistribution, scenario: Scenario) -> ConditionalProbabilityMatrix:
    """Marginal table ``p(a|x) = sum of weights of words with letter a at x``."""
    exact = all(isinstance(v, Fraction) for v in global_dist.weights.values())
    zero = Fraction(0) if exact else 0.0
    table = [[zero] * scenario.A for _ in range(scenario.X)]
    for pattern, w in global_dist.weights.items():
        pattern = scenario.check_pattern(pattern)
        for x, a in enumerate(pattern):
            table[x][a - 1] += w
    return ConditionalProbabilityMatrix(tuple(tuple(r) for r in table))


def delta_marginal(pattern, scenario: Scenario) -> ConditionalProbabilityMatrix:
    pattern = scenario.check_pattern(pattern)
    rows = tuple(
        tuple(Fraction(int(a == b)) for b in range(1, scenario.A + 1)) for a in pattern
    )
    return ConditionalProbabilityMatrix(rows)


def allowed_patterns(scenario: Scenario, constraints: ConstraintSet) -> list:
    constraints.validate(scenario)
    banned = set(constraints.forbidden)
    return [p for p in scenario.patterns() if p not in banned]


def enumerate_constrained_vertices(scenario: Scenario, constraints: ConstraintSet) -> list:
    """Marginals of every delta distribution on an allowed word, in word order."""
    return [delta_marginal(p, scenario) for p in allowed_patterns(scenario, constraints)]


def product_model(cond: ConditionalProbabilityMatrix) -> GlobalDistribution:
    """Independent joint ``prod_x p(a_x|x)``; it always has the right marginals."""
    weights = {}
    for pattern in itertools.product(range(1, cond.A + 1), repeat=cond.X):
        w = 1
        for x, a in enumerate(pattern):
            w = w * cond.entries[x][a - 1]
        if w != 0:
            weights[pattern] = w
    return GlobalDistribution(weights)


@dataclass(frozen=True)
class ModelCheck:
    """Outcome of :func:`has_constrained_model`.

    ``model`` is a valid global distribution avoiding the forbidden words when
    ``feasible``; otherwise ``witness`` is a linear inequality valid on the
    constrained polytope but violated by the tested matrix.
    """

    feasible: bool
    model: Optional[GlobalDistribution] = None
    witness: Optional[object] = None

    def __bool__(self):
        return self.feasible


def _check_dims(cond, scenario):
    if cond.A != scenario.A or cond.X != scenario.X:
        raise ValueError(
            f"matrix is {cond.X}x{cond.A}, scenario expects X={scenario.X}, A={scenario.A}"
        )


def has_constrained_model(
    cond: ConditionalProbabilityMatrix,
    scenario: Scenario,
    constraints: ConstraintSet,
) -> ModelCheck:
    """Decide whether ``cond`` is a mixture of the allowed vertices.

    Rational input is decided by an exact simplex; float input goes through
    HiGHS with tolerance ``1e-9`` followed by a residual check on the
    returned weights.
    """
    _check_dims(cond, scenario)
    pats = allowed_patterns(scenario, constraints)
    if not constraints.forbidden:
        return ModelCheck(True, product_model(cond))
    if not pats:
        return ModelCheck(False, None, None)
    verts = [delta_marginal(p, scenario).reduced() for p in pats]
    target = cond.reduced()
    d = len(target)

    if cond.is_exact:
        M = [[v[i] for v in verts] for i in range(d)] + [[Fraction(1)] * len(verts)]
        b = list(target) + [Fraction(1)]
        lam, y = exact_feasibility(M, b)
        if lam is not None:
            weights = {p: w for p, w in zip(pats, lam) if w != 0}
            return ModelCheck(True, GlobalDistribution(weights))
        farkas = y
    else:
        weights, farkas = _float_feasibility(verts, target)
        if weights is not None:
            return ModelCheck(True, GlobalDistribution(dict(zip(pats, weights))))
    return ModelCheck(False, None, _witness(cond, scenario, constraints, farkas))


def _float_feasibility(verts, target):
    from scipy.optimize import linprog

    V = np.array([[float(c) for c in v] for v in verts]).T
    A_eq = np.vstack([V, np.ones(V.shape[1])])
    b_eq = np.append(np.array(target, dtype=float), 1.0)
    res = linprog(
        np.zeros(V.shape[1]), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs",
        options={"primal_feasibility_tolerance": LP_TOL},
    )
    if res.status == 0:
        lam = np.clip(res.x, 0.0, None)
        lam /= lam.sum()
        if np.max(np.abs(A_eq @ lam - b_eq)) <= LP_TOL:
            return [float(w) for w in lam], None
    return None, None


def _witness(cond, scenario, constraints, farkas):
    from . import polytope

    try:
        facets = polytope.derive_inequalities(scenario, constraints)
    except polytope.DimensionCapError:
        facets = None
    if facets is not None:
        candidates = [(polytope.evaluate(f, cond), i, f) for i, f in enumerate(facets.all_constraints())]
        slack, _, worst = min(candidates, key=lambda t: (t[0], t[1]))
        return worst
    if farkas is None:
        return None
    # y @ (v, 1) <= 0 on every vertex: -y[:-1] . p >= y[-1]
    d = scenario.reduced_dim
    return polytope.LinearInequality.make([-c for c in farkas[:d]], ">=", farkas[d])
