"""Monomer-dimer series for the chain and the square lattice.

Pipeline: exact torus matching polynomials from a profile transfer DP, the
per-site free energy f(z) = ln(Xi(z)) / v accepted where two torus sizes
agree, then the entropy coefficients a_k of the small-density expansion of
the dimer entropy and the virial coefficients of the dimer gas, all in exact
rational arithmetic.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    Infeasible,
    InconsistentLeadingTerm,
    InsufficientData,
    SingularSystem,
    Unstable,
)
from .graph_core import Graph, validate
from .series import RationalSeries, log1p_series

CHAIN, SQUARE = "chain", "square_torus"
COORDINATION = {CHAIN: 2, SQUARE: 4}
MAX_SQUARE_L = 12
CHAIN_DEFAULT_SIZES = (50, 60)


@dataclass(frozen=True)
class LatticeSpec:
    family: str
    L: int

    def __post_init__(self) -> None:
        if self.family not in COORDINATION:
            raise ValueError(f"unknown lattice family {self.family!r}")
        if self.L < 3:
            raise ValueError(f"torus size must be at least 3, got {self.L}")

    @property
    def r(self) -> int:
        return COORDINATION[self.family]

    @property
    def sites(self) -> int:
        return self.L if self.family == CHAIN else self.L * self.L

    @property
    def edges(self) -> int:
        return self.sites * self.r // 2


@dataclass(frozen=True)
class EntropyExpansion:
    """a_k for k = 2..order, stored as ``a[k]`` with ``a[0] = a[1] = 0``."""

    r: int
    a: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.a) - 1

    def coefficients(self) -> list[tuple[int, Fraction]]:
        return [(k, self.a[k]) for k in range(2, len(self.a))]


# ---------------------------------------------------------------------------
# torus partition polynomials


def _rotation_orbits(cols: int, max_bits: int) -> list[tuple[int, int]]:
    """(representative, orbit size) for masks under cyclic column shifts."""
    full = (1 << cols) - 1
    seen = set()
    out = []
    for m in range(1 << cols):
        if m in seen or m.bit_count() > max_bits:
            continue
        orbit = {m}
        x = m
        for _ in range(cols - 1):
            x = ((x << 1) | (x >> (cols - 1))) & full
            orbit.add(x)
        seen |= orbit
        out.append((m, len(orbit)))
    return out


def _profile_dp(rows: int, cols: int, horizontal: bool, vertical: bool, degree: int, dtype) -> list[int]:
    """Matching counts of a rows x cols grid, periodic in each direction that has edges.

    Sites are visited row by row.  Bit c of the profile says the site in
    column c of the current row is already covered (before the visit) or
    sends a dimer to the next row (after it).  A flag records that column 0
    was reserved for the dimer wrapping from the row's last column.  The
    vertical wrap is handled by fixing the profile entering row 0 and
    requiring the profile leaving the last row to equal it.
    """
    nmask = 1 << cols
    masks = np.arange(nmask)
    if vertical:
        if horizontal:
            inits = _rotation_orbits(cols, degree)
        else:
            inits = [(m, 1) for m in range(nmask) if m.bit_count() <= degree]
    else:
        inits = [(0, 1)]

    site_tables = []
    for c in range(cols):
        bit = 1 << c
        covered = masks[(masks & bit) != 0]
        free = masks[(masks & bit) == 0]
        right = None
        if horizontal and c < cols - 1:
            right = masks[(masks & (bit | (bit << 1))) == 0]
        site_tables.append((bit, covered, free, right))

    total = np.zeros(degree + 1, dtype=dtype)
    for init, weight in inits:
        A = np.zeros((nmask, 2, degree + 1), dtype=dtype)
        A[init, 0, 0] = 1
        for _row in range(rows):
            for c, (bit, covered, free, right) in enumerate(site_tables):
                new = np.zeros_like(A)
                last_wrap = horizontal and c == cols - 1
                if last_wrap:
                    new[covered ^ bit, 0] += A[covered, 0]
                    new[free, 0] += A[free, 0]
                    if vertical:
                        new[free | bit, 0, 1:] += A[free, 0, :-1]
                    new[free, 0, 1:] += A[free, 1, :-1]
                else:
                    new[covered ^ bit] += A[covered]
                    new[free] += A[free]
                    if vertical:
                        new[free | bit, :, 1:] += A[free, :, :-1]
                    if right is not None:
                        new[right | (bit << 1), :, 1:] += A[right, :, :-1]
                    if horizontal and c == 0:
                        new[free, 1] += A[free, 0]
                A = new
        total += weight * A[init, 0]
    return [int(x) for x in total]


def torus_partition_polynomial(spec: LatticeSpec, max_degree: int | None = None) -> list[int]:
    """Coefficients m_0..m_D of the matching polynomial of the periodic lattice.

    ``max_degree`` truncates the polynomial (default: the full degree).
    """
    if spec.family == SQUARE and spec.L > MAX_SQUARE_L:
        raise Infeasible(f"square torus limited to L <= {MAX_SQUARE_L}, got {spec.L}")
    full_degree = spec.sites // 2
    D = full_degree if max_degree is None else min(max_degree, full_degree)
    bound = max(math.comb(spec.edges, i) for i in range(D + 1))
    dtype = np.int64 if bound < 2**62 else object
    if spec.family == CHAIN:
        counts = _profile_dp(spec.L, 1, horizontal=False, vertical=True, degree=D, dtype=dtype)
    else:
        counts = _profile_dp(spec.L, spec.L, horizontal=True, vertical=True, degree=D, dtype=dtype)
    return counts


def torus_graph(spec: LatticeSpec) -> Graph:
    """The periodic lattice as a regular bipartite Graph (even L only)."""
    L = spec.L
    if L % 2:
        raise ValueError("odd tori are not bipartite")
    if spec.family == CHAIN:
        coords = [(x,) for x in range(L)]
    else:
        coords = [(x, y) for x in range(L) for y in range(L)]
    even = [p for p in coords if sum(p) % 2 == 0]
    odd = [p for p in coords if sum(p) % 2 == 1]
    odd_index = {p: i for i, p in enumerate(odd)}
    adj = []
    for p in even:
        nbrs = set()
        for axis in range(len(p)):
            for step in (-1, 1):
                q = list(p)
                q[axis] = (q[axis] + step) % L
                nbrs.add(odd_index[tuple(q)])
        adj.append(sorted(nbrs))
    return validate(adj, n_right=len(odd))


# ---------------------------------------------------------------------------
# free energy


def default_sizes(family: str, order: int) -> tuple[int, int]:
    if family == CHAIN:
        L = max(CHAIN_DEFAULT_SIZES[0], order + 2)
        return (L, L + 10)
    L = max(8, order + 1 + (order + 1) % 2)
    return (L, L + 2)


def max_square_order() -> int:
    """Largest order the square pipeline can validate with two even tori."""
    return MAX_SQUARE_L - 3


def torus_free_energy(spec: LatticeSpec, order: int) -> RationalSeries:
    """ln(Xi(z)) / v through ``order`` for one finite torus."""
    poly = torus_partition_polynomial(spec, max_degree=order)
    return RationalSeries(poly, order).log() / spec.sites


def agreeing_order(f: RationalSeries, g: RationalSeries) -> int:
    """Largest K such that f and g agree on all coefficients 0..K."""
    K = -1
    for a, b in zip(f, g):
        if a != b:
            break
        K += 1
    return K


def free_energy_series(family: str, max_order: int, sizes: Sequence[int] | None = None) -> RationalSeries:
    """Infinite-lattice f(z) through ``max_order``, validated by two torus sizes.

    A coefficient is accepted only if the tori of linear sizes ``sizes``
    give exactly the same value; :class:`Unstable` reports the achievable
    order otherwise.
    """
    if family not in COORDINATION:
        raise ValueError(f"unknown lattice family {family!r}")
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    if family == SQUARE and sizes is None and max_order > max_square_order():
        raise Unstable(
            f"square lattice order {max_order} needs tori larger than L = {MAX_SQUARE_L}; "
            f"achievable order is {max_square_order()}",
            achievable=max_square_order(),
        )
    L1, L2 = sizes if sizes is not None else default_sizes(family, max_order)
    f1 = torus_free_energy(LatticeSpec(family, L1), max_order)
    f2 = torus_free_energy(LatticeSpec(family, L2), max_order)
    K = agreeing_order(f1, f2)
    if K < max_order:
        raise Unstable(
            f"tori L = {L1} and L = {L2} agree only through order {K}; achievable order is {K}",
            achievable=K,
        )
    return f1


# ---------------------------------------------------------------------------
# entropy and virial coefficients


def entropy_coefficients(f: RationalSeries, r: int) -> EntropyExpansion:
    """a_k of lambda(p) = (p ln r - p ln p - 2(1-p) ln(1-p) - p)/2 + sum_k a_k p^k.

    With dimer density p = 2 z f'(z) and z = (p/r) g(p), g(0) = 1, the
    Legendre transform lambda = f(z(p)) - (p/2) ln z(p) minus the closed form
    leaves f(z(p)) - (p/2) ln g(p) + (1-p) ln(1-p) + p/2, a pure series.
    """
    K = f.order
    if f[0] != 0 or f[1] != Fraction(r, 2):
        raise InconsistentLeadingTerm(f"expected f = (r/2) z + ..., got f_0 = {f[0]}, f_1 = {f[1]} for r = {r}")
    density = f.x_derivative() * 2
    z_of_p = density.revert()
    g = z_of_p.div_x() * r
    if g[0] != 1:
        raise InconsistentLeadingTerm(f"z(p) should start with p/{r}, got {z_of_p[1]} p")
    p = RationalSeries.variable(K)
    one_minus_p = RationalSeries([1, -1], K)
    rest = (
        f.compose(z_of_p)
        - g.log().mul_x() / 2
        + one_minus_p * log1p_series(K, -1)
        + p / 2
    )
    if rest[0] or rest[1]:
        raise InconsistentLeadingTerm(f"p^0 and p^1 terms must cancel, got {rest[0]} and {rest[1]}")
    return EntropyExpansion(r, tuple(rest.coeffs))


def virial_coefficients(f: RationalSeries) -> list[tuple[int, Fraction]]:
    """B_2..B_K of P = rho + sum_k B_k rho^k, rho = z f'(z) dimers per site, P = f(z)."""
    rho = f.x_derivative()
    if rho[0] != 0 or rho[1] == 0:
        raise InconsistentLeadingTerm("density series must start with a nonzero linear term")
    pressure = f.compose(rho.revert())
    if pressure[0] != 0 or pressure[1] != 1:
        raise InconsistentLeadingTerm(f"P(rho) must start with rho, got {pressure[0]} + {pressure[1]} rho")
    return [(k, pressure[k]) for k in range(2, pressure.order + 1)]


# ---------------------------------------------------------------------------
# inverse-dimension profiles


@dataclass(frozen=True)
class InverseDimensionFit:
    """Exact fit a_s(d) = sum_{j=1}^{s-1} c_j / d^j."""

    s: int
    coefficients: dict[int, Fraction]
    exact: bool
    j_min: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "j_min", -(-self.s // 2))

    @property
    def vanishing(self) -> list[int]:
        return [j for j, c in sorted(self.coefficients.items()) if c == 0]

    @property
    def consistent(self) -> bool:
        """All c_j with j < ceil(s/2) vanish."""
        return all(self.coefficients[j] == 0 for j in range(1, self.j_min))


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if M[i][col] != 0), None)
        if pivot is None:
            raise SingularSystem("normal equations are singular")
        M[col], M[pivot] = M[pivot], M[col]
        for i in range(n):
            if i != col and M[i][col]:
                factor = M[i][col] / M[col][col]
                M[i] = [x - factor * y for x, y in zip(M[i], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def inverse_dimension_fit(s: int, table: Iterable[tuple[int, Fraction]]) -> InverseDimensionFit:
    """Fit c_{s,1}..c_{s,s-1} to exact a_s(d) values.

    With exactly s-1 dimensions the system is solved directly; with more the
    exact least-squares solution is returned and ``exact`` tells whether it
    reproduces every table entry.
    """
    if s < 2:
        raise InsufficientData("order s must be at least 2")
    rows = [(int(d), Fraction(a)) for d, a in table]
    ds = [d for d, _ in rows]
    if any(d <= 0 for d in ds):
        raise ValueError("dimensions must be positive")
    if len(set(ds)) != len(ds):
        raise SingularSystem(f"repeated dimension in table: {sorted(ds)}")
    unknowns = s - 1
    if len(rows) < unknowns:
        raise InsufficientData(f"need at least {unknowns} dimensions for s = {s}, got {len(rows)}")
    A = [[Fraction(1, d**j) for j in range(1, s)] for d in ds]
    b = [a for _, a in rows]
    AtA = [[sum(A[k][i] * A[k][j] for k in range(len(A))) for j in range(unknowns)] for i in range(unknowns)]
    Atb = [sum(A[k][i] * b[k] for k in range(len(A))) for i in range(unknowns)]
    c = _solve_exact(AtA, Atb)
    exact = all(sum(A[k][j] * c[j] for j in range(unknowns)) == b[k] for k in range(len(A)))
    return InverseDimensionFit(s, {j + 1: c[j] for j in range(unknowns)}, exact)


# ---------------------------------------------------------------------------
# CSV / JSON tables


def write_coefficients_csv(path: str | Path, coefficients: Iterable[tuple[int, Fraction]], comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["k", "numerator", "denominator"])
        for k, c in coefficients:
            c = Fraction(c)
            w.writerow([k, c.numerator, c.denominator])


def coefficients_json(coefficients: Iterable[tuple[int, Fraction]]) -> list[dict]:
    return [{"k": k, "numerator": Fraction(c).numerator, "denominator": Fraction(c).denominator} for k, c in coefficients]


def read_dimension_table(path: str | Path) -> list[tuple[int, Fraction]]:
    """Read (d, numerator, denominator) rows; '#' lines and a header row are skipped."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.reader(line for line in fh if not line.lstrip().startswith("#")):
            if not row or row[0].strip() == "d":
                continue
            d, num, den = (x.strip() for x in row[:3])
            out.append((int(d), Fraction(int(num), int(den))))
    return out
