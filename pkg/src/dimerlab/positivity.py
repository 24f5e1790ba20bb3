"""Graph positivity and virial positivity decided by exact integer comparisons.

Every quantity here is a signed sum of logarithms of positive rationals,
kept symbolically as :class:`LogRatioTerm` lists.  Signs are settled by a
float estimate with a rigorous error margin, falling back to comparing the
two sides as big-integer products.
"""

from __future__ import annotations

import math
import sys
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from math import comb, factorial

from .errors import IndexOutOfRange
from .matchings import MatchingVector, complete_graph_matchings

GRAPH_POSITIVITY = "graph_positivity"
VIRIAL_POSITIVITY = "virial_positivity"

_EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class LogRatioTerm:
    """``exponent * ln(numerator / denominator)``, never evaluated exactly."""

    numerator: int
    denominator: int
    exponent: int

    def __post_init__(self) -> None:
        if self.numerator < 1 or self.denominator < 1:
            raise ValueError(f"log argument must be a positive rational, got {self.numerator}/{self.denominator}")

    def approx(self) -> float:
        return self.exponent * (math.log(self.numerator) - math.log(self.denominator))


Terms = list[LogRatioTerm]


def _base_exponents(terms: Iterable[LogRatioTerm]) -> dict[int, int]:
    exps: dict[int, int] = {}
    for t in terms:
        if t.exponent == 0:
            continue
        exps[t.numerator] = exps.get(t.numerator, 0) + t.exponent
        exps[t.denominator] = exps.get(t.denominator, 0) - t.exponent
    exps.pop(1, None)
    return {b: e for b, e in exps.items() if e}


def delta_sign(terms: Iterable[LogRatioTerm]) -> int:
    """Exact sign of ``sum(exponent * ln(numerator/denominator))``."""
    exps = _base_exponents(terms)
    if not exps:
        return 0
    parts = [e * math.log(b) for b, e in exps.items()]
    total = math.fsum(parts)
    # math.log is within a couple of ulps; scaling and fsum add at most a few more.
    margin = 8 * _EPS * (len(parts) + 2) * math.fsum(abs(x) for x in parts)
    if abs(total) > margin:
        return 1 if total > 0 else -1

    g = 0
    for e in exps.values():
        g = math.gcd(g, e)
    lhs = rhs = 1
    for b, e in exps.items():
        if e > 0:
            lhs *= b ** (e // g)
        else:
            rhs *= b ** (-e // g)
    return (lhs > rhs) - (lhs < rhs)


def terms_value(terms: Iterable[LogRatioTerm]) -> float:
    """Float approximation, for display and diagnostics only."""
    return math.fsum(t.approx() for t in terms)


def _check_index(m: MatchingVector, i: int) -> None:
    if not 0 <= i <= m.n:
        raise IndexOutOfRange(f"index {i} outside 0..{m.n}")
    if m[i] < 1:
        raise ValueError(f"m_{i} = 0; the logarithm is undefined")


def d_terms(m: MatchingVector, r: int, i: int) -> Terms:
    """d(i) = ln(m_i / r^i) - ln(mbar_i / (v-1)^i), mbar_i counting i-matchings of K_v."""
    _check_index(m, i)
    v = 2 * m.n
    terms = [LogRatioTerm(m[i], complete_graph_matchings(v, i), 1)]
    if i:
        terms.append(LogRatioTerm(1, r, i))
        terms.append(LogRatioTerm(v - 1, 1, i))
    return terms


def u_terms(m: MatchingVector, i: int) -> Terms:
    """u(i) = -ln(i! m_i)."""
    _check_index(m, i)
    return [LogRatioTerm(1, m[i], 1), LogRatioTerm(1, factorial(i), 1)]


def finite_difference(f_terms: Callable[[int], Terms], k: int, i: int) -> Terms:
    """Terms of Delta^k f(i) = sum_j (-1)^(k-j) C(k, j) f(i+j), merged by log argument."""
    if k < 0 or i < 0:
        raise IndexOutOfRange(f"need k >= 0 and i >= 0, got k = {k}, i = {i}")
    merged: dict[tuple[int, int], int] = {}
    for j in range(k + 1):
        scale = (-1) ** (k - j) * comb(k, j)
        for t in f_terms(i + j):
            key = (t.numerator, t.denominator)
            merged[key] = merged.get(key, 0) + scale * t.exponent
    return [LogRatioTerm(a, b, e) for (a, b), e in merged.items() if e]


@dataclass(frozen=True)
class PositivityReport:
    graph_id: str | None
    test: str
    violations: tuple[tuple[int, int], ...]
    k_range: tuple[int, int]
    i_range: tuple[int, int]
    convention: str
    ties: tuple[tuple[int, int], ...] = field(default=())

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "graph_id": self.graph_id,
            "test": self.test,
            "satisfied": self.satisfied,
            "violations": [list(p) for p in self.violations],
            "ties": [list(p) for p in self.ties],
            "k_range": list(self.k_range),
            "i_range": list(self.i_range),
            "convention": self.convention,
        }


def _scan(f_terms: Callable[[int], Terms], n: int, min_k: int):
    violations, ties = [], []
    for k in range(min_k, n + 1):
        for i in range(0, n - k + 1):
            s = delta_sign(finite_difference(f_terms, k, i))
            if s < 0:
                violations.append((k, i))
            elif s == 0:
                ties.append((k, i))
    return tuple(violations), tuple(ties)


def test_graph_positivity(
    m: MatchingVector, r: int, min_k: int = 0, graph_id: str | None = None
) -> PositivityReport:
    """Check Delta^k d(i) >= 0 for all k >= min_k, i >= 0, i + k <= n.

    ``min_k=0`` (default) includes d(i) >= 0 and Delta d(i) >= 0;
    ``min_k=2`` tests only second and higher differences.
    """
    violations, ties = _scan(lambda i: d_terms(m, r, i), m.n, min_k)
    return PositivityReport(
        graph_id, GRAPH_POSITIVITY, violations, (min_k, m.n), (0, m.n), f"k>={min_k}", ties
    )


def test_virial_positivity(m: MatchingVector, graph_id: str | None = None) -> PositivityReport:
    """Check Delta^k u(i) >= 0 for all k >= 2, i >= 0, i + k <= n."""
    violations, ties = _scan(lambda i: u_terms(m, i), m.n, 2)
    return PositivityReport(graph_id, VIRIAL_POSITIVITY, violations, (2, m.n), (0, m.n), "k>=2", ties)


# keep pytest from collecting the two deciders when imported into test modules
test_graph_positivity.__test__ = False  # type: ignore[attr-defined]
test_virial_positivity.__test__ = False  # type: ignore[attr-defined]
