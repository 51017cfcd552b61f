"""Shell game: three cups, a ball that an honest dealer never removes.

If every round has at least one ball, the probabilities ``p(1|x)`` of
finding cup ``x`` empty satisfy ``p(1|1) + p(1|2) + p(1|3) <= 2``. A dealer
who sometimes removes the ball can break that bound, and finite trial logs
can certify it with a Hoeffding margin per cup.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .polytope import LinearInequality, derive_inequalities, evaluate
from .scenario import ConditionalProbabilityMatrix, ConstraintSet, Scenario

CUPS = 3
STRATEGIES = ("honest_uniform", "honest_fixed_counts", "cheat_remove", "mixed")
CHOOSERS = ("uniform_random", "round_robin")
OUTCOMES = ("found", "empty")


class TrialLogError(ValueError):
    """Malformed trial CSV; ``line`` is the 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class DealerStrategy:
    kind: str
    balls: int = 1
    cheat_prob: float = 0.0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}; choose from {STRATEGIES}")
        if self.kind != "cheat_remove" and not 1 <= self.balls <= CUPS:
            raise ValueError(f"balls must be in 1..{CUPS}, got {self.balls}")
        if not 0.0 <= self.cheat_prob <= 1.0:
            raise ValueError("cheat_prob must be in [0, 1]")


@dataclass(frozen=True)
class TrialRecord:
    round: int
    x: int
    outcome: str

    def __post_init__(self):
        if not 1 <= self.x <= CUPS:
            raise ValueError(f"cup index {self.x} outside 1..{CUPS}")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be 'found' or 'empty', got {self.outcome!r}")


def simulate(strategy: DealerStrategy, rounds: int, seed: int, chooser: str = "round_robin") -> list:
    """Play ``rounds`` rounds with a ``numpy`` generator seeded by ``seed``.

    Each round the dealer picks the set of cups hiding a ball, then the
    player picks a cup without looking at past outcomes.

    * ``honest_uniform``: a uniformly random set of ``balls`` cups.
    * ``honest_fixed_counts``: cycles through all ``balls``-subsets in
      order, so every placement occurs equally often.
    * ``cheat_remove``: no ball at all.
    * ``mixed``: no ball with probability ``cheat_prob``, else as
      ``honest_uniform``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if chooser not in CHOOSERS:
        raise ValueError(f"unknown chooser {chooser!r}; choose from {CHOOSERS}")
    rng = np.random.default_rng(seed)
    subsets = list(itertools.combinations(range(1, CUPS + 1), strategy.balls))
    trials = []
    for r in range(1, rounds + 1):
        kind = strategy.kind
        if kind == "mixed":
            kind = "cheat_remove" if rng.random() < strategy.cheat_prob else "honest_uniform"
        if kind == "cheat_remove":
            placed = ()
        elif kind == "honest_fixed_counts":
            placed = subsets[(r - 1) % len(subsets)]
        else:
            placed = subsets[int(rng.integers(len(subsets)))]
        if chooser == "round_robin":
            x = (r - 1) % CUPS + 1
        else:
            x = int(rng.integers(1, CUPS + 1))
        trials.append(TrialRecord(r, x, "found" if x in placed else "empty"))
    return trials


def simulate_batch(strategy, rounds, seed, batches, chooser="round_robin"):
    """Independent experiments; experiment ``i`` uses seed ``seed + i``."""
    return [simulate(strategy, rounds, seed + i, chooser) for i in range(batches)]


def estimate(trials) -> tuple:
    """Empirical ``p(found | x)`` per cup.

    Returns ``(cond, counts)`` where ``cond`` is the exact-fraction matrix
    with rows ``(p(empty|x), p(found|x))`` and ``counts`` is a list of
    ``(n_x, found_x)``.
    """
    n = [0] * CUPS
    found = [0] * CUPS
    for t in trials:
        n[t.x - 1] += 1
        found[t.x - 1] += t.outcome == "found"
    missing = [x + 1 for x in range(CUPS) if n[x] == 0]
    if missing:
        raise ValueError(f"no trials for cup(s) {missing}")
    rows = tuple((1 - Fraction(f, k), Fraction(f, k)) for f, k in zip(found, n))
    return ConditionalProbabilityMatrix(rows), list(zip(n, found))


@lru_cache(maxsize=1)
def shell_game_inequality() -> LinearInequality:
    """The only nontrivial facet for three cups with the all-empty word banned."""
    scen = Scenario(2, CUPS)
    (ineq,) = derive_inequalities(scen, ConstraintSet(((1,) * CUPS,))).tsirelson(scen)
    return ineq


def hoeffding_epsilon(n: int, confidence: float, k: int = CUPS) -> float:
    """One-sided Hoeffding radius at level ``(1 - confidence) / k``."""
    return math.sqrt(math.log(k / (1 - confidence)) / (2 * n))


@dataclass(frozen=True)
class TestReport:
    counts: list
    p_found: list
    statistic: float
    threshold: int
    confidence: float
    epsilon: list
    verdict: str
    inequality: LinearInequality
    seed: Optional[int] = None

    __test__ = False  # not a pytest class

    @property
    def margin(self) -> float:
        return self.statistic - sum(self.epsilon)

    def certificate(self) -> str:
        eps = ", ".join(f"{e:.6f}" for e in self.epsilon)
        return (
            f"inequality {self.inequality} on q_x = p(empty|x); "
            f"S = {self.statistic:.6f}, sum(eps) = {sum(self.epsilon):.6f} [{eps}], "
            f"S - sum(eps) = {self.margin:.6f} vs {self.threshold} at confidence {self.confidence}"
        )

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "epsilon": self.epsilon,
            "confidence": self.confidence,
            "verdict": self.verdict,
            "seed": self.seed,
            "counts": [{"n": n, "found": f} for n, f in self.counts],
            "p_found": self.p_found,
            "inequality": self.inequality.to_json(),
            "certificate": self.certificate(),
        }


def cheat_test(cond: ConditionalProbabilityMatrix, counts, confidence: float = 0.99, seed=None) -> TestReport:
    """Flag cheating when ``S - sum_x eps_x > 2`` with ``S = sum_x p_hat(empty|x)``.

    Each ``eps_x`` bounds the upward deviation of one cup's estimate with
    probability ``(1 - confidence) / 3``; a union bound keeps the false
    accusation rate of an honest dealer below ``1 - confidence``.
    """
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    if len(counts) != CUPS or any(n < 1 for n, _ in counts):
        raise ValueError("counts needed for all three cups")
    ineq = shell_game_inequality()
    c, bound = ineq.as_upper()
    statistic = float(bound - evaluate(LinearInequality(c, "<=", bound), cond))
    eps = [hoeffding_epsilon(n, confidence) for n, _ in counts]
    verdict = "cheating_detected" if statistic - sum(eps) > bound else "consistent"
    return TestReport(
        counts=[(int(n), int(f)) for n, f in counts],
        p_found=[float(r[1]) for r in cond.entries],
        statistic=statistic,
        threshold=int(bound),
        confidence=float(confidence),
        epsilon=eps,
        verdict=verdict,
        inequality=ineq,
        seed=seed,
    )


def write_trials(trials, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["round", "x", "outcome"])
    for t in trials:
        w.writerow([t.round, t.x, t.outcome])


def trials_to_csv(trials) -> str:
    buf = io.StringIO()
    write_trials(trials, buf)
    return buf.getvalue()


def read_trials(fh) -> list:
    """Parse a ``round,x,outcome`` CSV, raising :class:`TrialLogError` with a line number."""
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise TrialLogError("empty file", 1) from None
    if [h.strip() for h in header] != ["round", "x", "outcome"]:
        raise TrialLogError(f"expected header round,x,outcome, got {','.join(header)}", 1)
    trials = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise TrialLogError(f"expected 3 fields, got {len(row)}", line)
        try:
            trials.append(TrialRecord(int(row[0]), int(row[1]), row[2].strip()))
        except ValueError as exc:
            raise TrialLogError(str(exc), line) from None
    return trials
