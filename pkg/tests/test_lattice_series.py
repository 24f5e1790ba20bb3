from __future__ import annotations

import csv
from fractions import Fraction
from functools import lru_cache

import pytest
import sympy

from dimerlab.errors import InconsistentLeadingTerm, Infeasible, InsufficientData, SingularSystem, Unstable
from dimerlab.lattice_series import (
    CHAIN,
    SQUARE,
    LatticeSpec,
    agreeing_order,
    entropy_coefficients,
    free_energy_series,
    inverse_dimension_fit,
    read_dimension_table,
    torus_free_energy,
    torus_graph,
    torus_partition_polynomial,
    virial_coefficients,
    write_coefficients_csv,
)
from dimerlab.matchings import brute_force_matchings, count_matchings
from dimerlab.series import RationalSeries, log1p_series

z, p = sympy.symbols("z p")

# square-lattice values accepted by two-size agreement, kept as regression constants
SQUARE_F = [0, 2, -7, Fraction(116, 3), Fraction(-521, 2), Fraction(9812, 5), Fraction(-47644, 3),
            Fraction(945688, 7)]
SQUARE_A = [Fraction(1, 16), Fraction(1, 192), Fraction(7, 1536), Fraction(41, 10240), Fraction(181, 61440),
            Fraction(757, 344064)]
SQUARE_B = [Fraction(7, 4), Fraction(31, 12), Fraction(121, 32), Fraction(471, 80), Fraction(1867, 192),
            Fraction(7435, 448)]


def sympy_coeffs(expr, var, order):
    ser = sympy.series(expr, var, 0, order + 1).removeO()
    return [Fraction(str(sympy.nsimplify(ser.coeff(var, k)))) for k in range(order + 1)]


@lru_cache(maxsize=None)
def chain_closed_form(order: int) -> tuple[Fraction, ...]:
    return tuple(sympy_coeffs(sympy.log((1 + sympy.sqrt(1 + 4 * z)) / 2), z, order))


def _matchings_any_graph(edges):
    """Matching counts of an arbitrary simple graph, by recursion on the first edge."""
    @lru_cache(maxsize=None)
    def rec(es: frozenset) -> tuple[int, ...]:
        if not es:
            return (1,)
        e = min(es)
        without = rec(es - {e})
        rest = frozenset(f for f in es if not set(f) & set(e))
        with_e = (0,) + rec(rest)
        size = max(len(without), len(with_e))
        return tuple((without + (0,) * size)[k] + (with_e + (0,) * size)[k] for k in range(size))

    return list(rec(frozenset(tuple(sorted(e)) for e in edges)))


# -- torus polynomials -------------------------------------------------------------


def test_chain_small():
    assert torus_partition_polynomial(LatticeSpec(CHAIN, 4)) == [1, 4, 2]
    assert torus_partition_polynomial(LatticeSpec(CHAIN, 6)) == [1, 6, 9, 2]
    assert torus_partition_polynomial(LatticeSpec(CHAIN, 3)) == [1, 3]
    assert torus_partition_polynomial(LatticeSpec(CHAIN, 6)) == list(brute_force_matchings(torus_graph(LatticeSpec(CHAIN, 6))).counts)


def test_chain_lucas_total():
    # total matchings of the L-cycle is the Lucas number L_L
    lucas = [2, 1]
    for _ in range(40):
        lucas.append(lucas[-1] + lucas[-2])
    for L in (5, 17, 40):
        assert sum(torus_partition_polynomial(LatticeSpec(CHAIN, L))) == lucas[L]


def test_square_l4_brute_force():
    spec = LatticeSpec(SQUARE, 4)
    poly = torus_partition_polynomial(spec)
    assert poly == list(brute_force_matchings(torus_graph(spec)).counts)
    assert poly == [1, 32, 400, 2496, 8256, 14208, 11648, 3712, 272]


def test_square_odd_torus():
    L = 3
    edges = set()
    for x in range(L):
        for y in range(L):
            s = x * L + y
            edges.add(frozenset((s, ((x + 1) % L) * L + y)))
            edges.add(frozenset((s, x * L + (y + 1) % L)))
    assert torus_partition_polynomial(LatticeSpec(SQUARE, 3)) == _matchings_any_graph([tuple(e) for e in edges])


def test_square_l6_matches_graph_engine():
    spec = LatticeSpec(SQUARE, 6)
    assert torus_partition_polynomial(spec) == list(count_matchings(torus_graph(spec)).counts)
    assert torus_partition_polynomial(spec, max_degree=5) == torus_partition_polynomial(spec)[:6]


def test_square_size_limit():
    with pytest.raises(Infeasible):
        torus_partition_polynomial(LatticeSpec(SQUARE, 14))
    with pytest.raises(ValueError):
        LatticeSpec(SQUARE, 2)


# -- free energy -----------------------------------------------------------------------


def test_chain_free_energy_closed_form():
    f = free_energy_series(CHAIN, 20)
    assert list(f) == list(chain_closed_form(20))
    assert f[1] == 1


def test_chain_sizes_50_60_agree_with_closed_form():
    f50 = torus_free_energy(LatticeSpec(CHAIN, 50), 52)
    f60 = torus_free_energy(LatticeSpec(CHAIN, 60), 52)
    # Xi_L = l+^L + l-^L, so the L-cycle differs from the limit only from z^L on
    assert agreeing_order(f50, f60) == 49
    assert list(f50.truncate(24)) == list(chain_closed_form(24))


def test_square_free_energy_prefix():
    f = free_energy_series(SQUARE, 7)
    assert list(f) == SQUARE_F
    assert f[1] == 2


@pytest.mark.slow
def test_square_sizes_agree_on_accepted_prefix():
    f8 = torus_free_energy(LatticeSpec(SQUARE, 8), 9)
    f10 = torus_free_energy(LatticeSpec(SQUARE, 10), 9)
    f12 = torus_free_energy(LatticeSpec(SQUARE, 12), 9)
    k1 = agreeing_order(f8, f10)
    assert k1 == 7
    assert f8.truncate(k1) == f12.truncate(k1)
    assert agreeing_order(f10, f12) == 9


def test_unstable_orders():
    with pytest.raises(Unstable) as info:
        free_energy_series(SQUARE, 30)
    assert info.value.achievable == 9
    with pytest.raises(Unstable) as info:
        free_energy_series(SQUARE, 6, sizes=(4, 6))
    assert info.value.achievable < 6


# -- entropy coefficients --------------------------------------------------------------


def test_chain_entropy_closed_form():
    a = entropy_coefficients(free_energy_series(CHAIN, 20), 2)
    remainder = (1 - p / 2) * sympy.log(1 - p / 2) + p / 2
    expected = sympy_coeffs(remainder, p, 20)
    assert list(a.a) == expected
    assert a.a[0] == a.a[1] == 0
    assert a.a[2] == Fraction(1, 8)
    assert all(c == Fraction(1, k * (k - 1) * 2**k) for k, c in a.coefficients())
    assert all(c > 0 for _, c in a.coefficients())


def test_chain_entropy_from_symbolic_f():
    f = RationalSeries(chain_closed_form(12))
    assert entropy_coefficients(f, 2) == entropy_coefficients(free_energy_series(CHAIN, 12), 2)


def test_square_entropy_prefix():
    a = entropy_coefficients(free_energy_series(SQUARE, 7), 4)
    assert [c for _, c in a.coefficients()] == SQUARE_A
    assert a.a[0] == a.a[1] == 0


def test_entropy_truncation_commutes():
    f = free_energy_series(CHAIN, 16)
    full = entropy_coefficients(f, 2)
    for K in (4, 9, 15):
        assert entropy_coefficients(f.truncate(K), 2).a == full.a[: K + 1]
    sq = free_energy_series(SQUARE, 7)
    assert entropy_coefficients(sq.truncate(5), 4).a == entropy_coefficients(sq, 4).a[:6]


def test_entropy_wrong_r():
    with pytest.raises(InconsistentLeadingTerm):
        entropy_coefficients(free_energy_series(CHAIN, 6), 4)


# -- virial coefficients ---------------------------------------------------------------


def test_ideal_gas_virial():
    B = virial_coefficients(log1p_series(10))
    assert B[0] == (2, Fraction(1, 2))
    assert all(c == Fraction(1, k) for k, c in B)


def test_chain_virial():
    B = virial_coefficients(free_energy_series(CHAIN, 10))
    rho = sympy.Symbol("rho")
    expected = sympy_coeffs(sympy.log((1 - rho) / (1 - 2 * rho)), rho, 10)
    assert [c for _, c in B] == expected[2:]
    assert all(c == Fraction(2**k - 1, k) for k, c in B)
    assert all(c > 0 for _, c in B)


def test_square_virial_prefix():
    B = virial_coefficients(free_energy_series(SQUARE, 7))
    assert [c for _, c in B] == SQUARE_B
    assert all(c > 0 for _, c in B)


def test_virial_truncation_commutes():
    f = free_energy_series(CHAIN, 14)
    assert virial_coefficients(f.truncate(8)) == virial_coefficients(f)[:7]


def test_virial_bad_leading_term():
    with pytest.raises(InconsistentLeadingTerm):
        virial_coefficients(RationalSeries([0, 0, 1]))


# -- inverse-dimension fit ----------------------------------------------------------------


def test_fit_a2_two_dimensions():
    a1 = entropy_coefficients(free_energy_series(CHAIN, 2), 2).a[2]
    a2 = entropy_coefficients(free_energy_series(SQUARE, 2), 4).a[2]
    fit = inverse_dimension_fit(2, [(1, a1), (2, a2)])
    assert fit.coefficients == {1: Fraction(1, 8)}
    assert fit.exact and fit.consistent and fit.j_min == 1


def test_fit_a3_leading_power_vanishes():
    a1 = entropy_coefficients(free_energy_series(CHAIN, 3), 2).a[3]
    a2 = entropy_coefficients(free_energy_series(SQUARE, 3), 4).a[3]
    fit = inverse_dimension_fit(3, [(1, a1), (2, a2)])
    assert fit.coefficients == {1: 0, 2: Fraction(1, 48)}
    assert fit.vanishing == [1] and fit.consistent and fit.j_min == 2


def test_fit_errors_and_zero_table():
    with pytest.raises(SingularSystem):
        inverse_dimension_fit(3, [(1, Fraction(1)), (1, Fraction(2))])
    with pytest.raises(InsufficientData):
        inverse_dimension_fit(4, [(1, Fraction(1)), (2, Fraction(2))])
    fit = inverse_dimension_fit(4, [(d, Fraction(0)) for d in (1, 2, 3)])
    assert all(c == 0 for c in fit.coefficients.values()) and fit.consistent


def test_fit_inconsistent_and_overdetermined():
    fit = inverse_dimension_fit(4, [(d, Fraction(1, d)) for d in (1, 2, 3, 5)])
    assert fit.exact and not fit.consistent and fit.coefficients[1] == 1
    noisy = inverse_dimension_fit(2, [(1, Fraction(1)), (2, Fraction(1))])
    assert not noisy.exact


# -- tables -----------------------------------------------------------------------------


def test_csv_round_trip(tmp_path):
    a = entropy_coefficients(free_energy_series(CHAIN, 8), 2).coefficients()
    path = tmp_path / "a.csv"
    write_coefficients_csv(path, a, comment="chain entropy")
    lines = path.read_text().splitlines()
    assert lines[0] == "# chain entropy" and lines[1] == "k,numerator,denominator"
    rows = list(csv.reader(lines[2:]))
    assert [(int(k), Fraction(int(n), int(d))) for k, n, d in rows] == a


def test_read_dimension_table(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("# a_2\nd,numerator,denominator\n1,1,8\n2,1,16\n")
    assert read_dimension_table(path) == [(1, Fraction(1, 8)), (2, Fraction(1, 16))]
