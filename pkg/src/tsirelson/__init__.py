"""Tsirelson inequalities from constrained classical models.

The package has four parts:

* :mod:`tsirelson.scenario` -- outcome/setting scenarios, zero-pattern
  constraints, marginalization and constrained-model membership.
* :mod:`tsirelson.polytope` -- exact facet enumeration of the polytope of
  conditional probabilities that admit a constrained classical model.
* :mod:`tsirelson.oscillator` -- sign-of-position constraints for a harmonic
  oscillator and maximal quantum violations in a truncated Fock basis.
* :mod:`tsirelson.shellgame` -- simulation and a finite-sample cheating test
  for the shell game.
"""

from .scenario import (
    ConditionalProbabilityMatrix,
    ConstraintSet,
    GlobalDistribution,
    ModelCheck,
    Scenario,
    enumerate_constrained_vertices,
    has_constrained_model,
    marginalize,
    product_model,
)
from .polytope import (
    DimensionCapError,
    FacetList,
    LinearInequality,
    affine_hull,
    brute_force_facets,
    classify_trivial,
    evaluate,
    facet_enumeration,
    derive_inequalities,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionalProbabilityMatrix",
    "ConstraintSet",
    "DimensionCapError",
    "FacetList",
    "GlobalDistribution",
    "LinearInequality",
    "ModelCheck",
    "Scenario",
    "affine_hull",
    "brute_force_facets",
    "classify_trivial",
    "derive_inequalities",
    "enumerate_constrained_vertices",
    "evaluate",
    "facet_enumeration",
    "has_constrained_model",
    "marginalize",
    "product_model",
]
