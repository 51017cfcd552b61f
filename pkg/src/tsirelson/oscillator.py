"""Sign-of-position inequalities for the harmonic oscillator.

Units are dimensionless (hbar = m = omega = 1), so one period is ``2*pi`` in
internal time and probe ``x`` of ``X`` sits at phase ``2*pi*x/X``. The
operator for ``p(1|x)`` (positive position, with weight 1/2 on exact zeros)
is the half-line overlap matrix ``P`` conjugated by free evolution, which in
the Fock basis only multiplies entry ``(m, n)`` by ``exp(i (m - n) theta)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .polytope import FacetList, LinearInequality, derive_inequalities
from .scenario import ConditionalProbabilityMatrix, ConstraintSet, Scenario

QUAD_TOL = 1e-10
ZERO_TOL = 1e-12
VIOLATION_TOL = 1e-9
MODES = ("basic", "full")


class QuadratureError(RuntimeError):
    pass


def _check_X(X):
    if int(X) != X or X < 3 or X % 2 == 0:
        raise ValueError(f"X must be an odd integer >= 3, got {X!r}")
    return int(X)


def is_cyclic_block(pattern, letter=1) -> bool:
    """True if the positions holding ``letter`` form one cyclic run."""
    X = len(pattern)
    hits = [a == letter for a in pattern]
    k = sum(hits)
    if k in (0, X):
        return False
    # exactly one place where a run of hits starts
    starts = sum(1 for i in range(X) if hits[i] and not hits[i - 1])
    return starts == 1


def generate_oscillator_constraints(X: int, mode: str = "full") -> ConstraintSet:
    """Forbidden sign patterns for ``X`` equally spaced probes over one period.

    ``full`` keeps only patterns whose positive probes form a single cyclic
    block of length ``X // 2`` or ``X // 2 + 1``. ``basic`` only bounds the
    number of positive probes to that same range; for ``X = 5`` this bans
    the constant words and the rotations of ``21111`` and ``22221``.
    Patterns are returned in lexicographic order.
    """
    X = _check_X(X)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    scen = Scenario(2, X)
    lo, hi = X // 2, X // 2 + 1
    forbidden = []
    for p in scen.patterns():
        ones = p.count(1)
        if mode == "basic":
            bad = ones not in (lo, hi)
        else:
            bad = not (ones in (lo, hi) and is_cyclic_block(p))
        if bad:
            forbidden.append(p)
    return ConstraintSet(tuple(forbidden))


@dataclass(frozen=True)
class OscillatorScenario:
    X: int
    mode: str = "full"

    def __post_init__(self):
        _check_X(self.X)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def times(self) -> np.ndarray:
        """Probe times in units of the period."""
        return np.arange(1, self.X + 1) / self.X

    @property
    def phases(self) -> np.ndarray:
        return 2 * np.pi * self.times

    @property
    def scenario(self) -> Scenario:
        return Scenario(2, self.X)

    def constraints(self) -> ConstraintSet:
        return generate_oscillator_constraints(self.X, self.mode)

    def facets(self) -> FacetList:
        return derive_inequalities(self.scenario, self.constraints())

    def tsirelson_facets(self) -> list:
        return self.facets().tsirelson(self.scenario)


def hermite_functions(N: int, q) -> np.ndarray:
    """Normalized oscillator eigenfunctions ``psi_0..psi_{N-1}`` at ``q``.

    Uses the three-term recurrence, which stays stable for large ``n``
    (unlike evaluating ``H_n`` and the normalization separately).
    """
    q = np.asarray(q, dtype=float)
    out = np.empty((N,) + q.shape)
    out[0] = np.pi ** -0.25 * np.exp(-q * q / 2)
    if N > 1:
        out[1] = math.sqrt(2.0) * q * out[0]
    for n in range(1, N - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * q * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _panel_gram(N, q_max, panels, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, q_max, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    q = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    psi = hermite_functions(N, q)
    return (psi * w) @ psi.T


@lru_cache(maxsize=32)
def _halfline_cached(N, quad_tol):
    q_max = math.sqrt(2 * N + 1) + 10.0
    order = 24
    panels = max(4, int(math.ceil(q_max)))
    prev = _panel_gram(N, q_max, panels, order)
    for _ in range(8):
        panels *= 2
        cur = _panel_gram(N, q_max, panels, order)
        if np.max(np.abs(cur - prev)) < quad_tol:
            break
        prev = cur
    else:
        raise QuadratureError(f"half-line quadrature did not reach tol {quad_tol} for N={N}")
    m, n = np.indices((N, N))
    cur[(m + n) % 2 == 0] = 0.0
    cur[m == n] = 0.5
    cur = (cur + cur.T) / 2
    cur.setflags(write=False)
    return cur


def halfline_overlap_matrix(N: int, quad_tol: float = QUAD_TOL) -> np.ndarray:
    """``P[m, n] = int_0^inf psi_m(q) psi_n(q) dq`` for ``m, n < N``.

    Diagonal entries are exactly 1/2 and entries with even ``m + n`` off the
    diagonal are exactly 0 by parity; the rest come from Gauss-Legendre
    panels on ``[0, sqrt(2N+1) + 10]``, refined until two successive panel
    counts agree to ``quad_tol``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if quad_tol <= 0:
        raise ValueError("quad_tol must be positive")
    return np.array(_halfline_cached(int(N), float(quad_tol)))


def evolved_operator(P: np.ndarray, theta: float) -> np.ndarray:
    """Heisenberg-evolved operator: entry ``(m, n)`` gains ``exp(i(m-n)theta)``."""
    k = np.arange(P.shape[0])
    return np.exp(1j * (k[:, None] - k[None, :]) * theta) * P


def inequality_operator(ineq: LinearInequality, scen: OscillatorScenario, N: int, P=None) -> np.ndarray:
    """``sum_x c_x Q(theta_x)`` on the first ``N`` Fock states."""
    if ineq.dim != scen.X:
        raise ValueError(f"inequality has {ineq.dim} coefficients, scenario has X={scen.X}")
    if P is None:
        P = halfline_overlap_matrix(N)
    P = np.asarray(P)[:N, :N]
    op = np.zeros((N, N), dtype=complex)
    for c, theta in zip(ineq.coeffs, scen.phases):
        if c:
            op += c * evolved_operator(P, theta)
    return (op + op.conj().T) / 2


@dataclass(frozen=True)
class ViolationResult:
    inequality: LinearInequality
    N: int
    extremal_value: float
    bound: float
    violated: bool
    optimal_state: np.ndarray

    def to_json(self) -> dict:
        return {
            "inequality": self.inequality.to_json(),
            "N": self.N,
            "value": float(self.extremal_value),
            "bound": float(self.bound),
            "violated": bool(self.violated),
            "state_re": [float(v) for v in self.optimal_state.real],
            "state_im": [float(v) for v in self.optimal_state.imag],
        }


def _fix_phase(v):
    # largest component real and positive, first one on ties
    k = int(np.argmax(np.round(np.abs(v), 12)))
    v = v * np.exp(-1j * np.angle(v[k]))
    return v / np.linalg.norm(v)


def max_violation(ineq: LinearInequality, scen: OscillatorScenario, N: int, P=None) -> ViolationResult:
    """Extremal expectation of the inequality over states spanned by ``|0>..|N-1>``.

    For ``<=`` this is the top eigenvalue of the inequality operator, for
    ``>=`` the bottom one.
    """
    if ineq.sense not in ("<=", ">="):
        raise ValueError("max_violation needs an inequality, not an equation")
    op = inequality_operator(ineq, scen, N, P)
    try:
        vals, vecs = np.linalg.eigh(op)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed for N={N}") from exc
    if ineq.sense == "<=":
        value, state = vals[-1], vecs[:, -1]
        violated = value > ineq.bound + VIOLATION_TOL
    else:
        value, state = vals[0], vecs[:, 0]
        violated = value < ineq.bound - VIOLATION_TOL
    return ViolationResult(ineq, int(N), float(value), float(ineq.bound), bool(violated), _fix_phase(state))


def _rotations(vec):
    return {tuple(vec[i:] + vec[:i]) for i in range(len(vec))}


def _templates(X):
    t = {"type_t": _rotations([1] * X)}
    if X == 5:
        t["type_1"] = _rotations([1, 0, 1, 0, 1])
        t["type_2"] = _rotations([1, -1, 1, 0, 0])
    return t


def facet_type(ineq: LinearInequality) -> tuple:
    """Name and bound side of a facet relative to the textbook orientation.

    Returns ``(type, side)`` with type in ``type_t``, ``type_1``, ``type_2``
    or ``other``, and side ``upper``/``lower``.
    """
    X = ineq.dim
    c = ineq.coeffs
    neg = tuple(-v for v in c)
    for name, rots in _templates(X).items():
        if c in rots:
            return name, "upper" if ineq.sense == "<=" else "lower"
        if neg in rots:
            return name, "lower" if ineq.sense == "<=" else "upper"
    return "other", "upper" if ineq.sense == "<=" else "lower"


def select_facets(scen: OscillatorScenario, selector: str = "all") -> list:
    """Nontrivial facets of the scenario, optionally filtered by type name."""
    facets = scen.tsirelson_facets()
    if selector == "all":
        return facets
    picked = [f for f in facets if facet_type(f)[0] == selector]
    if not picked:
        raise ValueError(f"no facet of type {selector!r} for X={scen.X}, mode={scen.mode}")
    return picked


@dataclass(frozen=True)
class SweepRow:
    N: int
    type: str
    bound_side: str
    value: float
    violated: bool
    result: ViolationResult

    def csv_fields(self):
        return [self.N, self.type, self.bound_side, f"{self.value:.12f}", str(self.violated).lower()]


def default_threads():
    raw = os.environ.get("TSIRELSON_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def sweep(scen: OscillatorScenario, Nmax: int, selector: str = "all", threads: int = None) -> list:
    """Maximal violations for every selected facet and ``N = 1..Nmax``.

    Cyclic variants of a named type share one row per ``(N, side)``: the
    most extreme value among them is reported. Facets of type ``other`` get
    their own rows, labelled by coefficients. Rows are sorted by
    ``(N, type, side)``.
    """
    if Nmax < 1:
        raise ValueError("Nmax must be >= 1")
    facets = select_facets(scen, selector)
    P = halfline_overlap_matrix(Nmax)
    cells = [(f, N) for f in facets for N in range(1, Nmax + 1)]
    threads = threads or default_threads()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda c: max_violation(c[0], scen, c[1], P), cells))
    groups = {}
    for res in results:
        name, side = facet_type(res.inequality)
        if name == "other":
            name = "other[" + ",".join(str(v) for v in res.inequality.coeffs) + f";{res.inequality.bound}]"
        key = (res.N, name, side)
        best = groups.get(key)
        if best is None:
            groups[key] = res
            continue
        # keep the most violating member; ties keep the canonical first
        upper = res.inequality.sense == "<="
        excess = res.extremal_value - res.bound if upper else res.bound - res.extremal_value
        upper_b = best.inequality.sense == "<="
        excess_b = best.extremal_value - best.bound if upper_b else best.bound - best.extremal_value
        if excess > excess_b + 1e-12:
            groups[key] = res
    rows = []
    for (N, name, side), res in sorted(groups.items()):
        rows.append(SweepRow(N, name, side, res.extremal_value, res.violated, res))
    return rows


def classical_conditional_matrix(q0: float, p0: float, scen: OscillatorScenario, zero_tol: float = ZERO_TOL):
    """Sign statistics of the classical trajectory through ``(q0, p0)``.

    ``q(t) = q0 cos(2 pi t) + p0 sin(2 pi t)`` is probed at ``t = x / X``;
    ``p(1|x)`` is 1, 0 or 1/2 for positive, negative or (numerically) zero
    position.
    """
    q = q0 * np.cos(scen.phases) + p0 * np.sin(scen.phases)
    vec = []
    for v in q:
        if abs(v) < zero_tol:
            vec.append(Fraction(1, 2))
        else:
            vec.append(Fraction(int(v > 0)))
    return ConditionalProbabilityMatrix.from_reduced(vec, A=2)
