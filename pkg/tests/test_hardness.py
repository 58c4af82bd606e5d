"""Tests for dissimilarity graphs, nonregularity, and the DFA cross-check."""

import math
from itertools import combinations

import pytest

from qcfa.hardness import (
    BudgetExceededError,
    LanguageOracle,
    build_dissimilarity_graph,
    communication_bits,
    exhaustive_dfa_crosscheck,
    nonregularity,
    strings_up_to,
)
from qcfa.langs import builtin_oracles

ORACLES = builtin_oracles()
SIGMA_STAR = LanguageOracle("sigma-star", ("a", "b"), lambda w: True)


def brute_force_dissimilar(oracle, x, x2, n):
    """Direct scan over all allowed suffixes, independent of signatures."""
    allowed = n - max(len(x), len(x2))
    return any(oracle(x + y) != oracle(x2 + y) for y in strings_up_to(oracle.alphabet, allowed))


def brute_force_max_clique(oracle, n):
    """Exhaustive subset scan; usable only at tiny horizons."""
    words = strings_up_to(oracle.alphabet, n)
    best = 1
    for size in range(2, len(words) + 1):
        found = False
        for subset in combinations(words, size):
            if all(
                brute_force_dissimilar(oracle, a, b, n) for a, b in combinations(subset, 2)
            ):
                best = size
                found = True
                break
        if not found:
            break
    return best


def test_graph_edges_match_brute_force_parity():
    oracle = ORACLES["parity"]
    graph = build_dissimilarity_graph(oracle, 3)
    for i in range(len(graph.vertices)):
        for j in range(i + 1, len(graph.vertices)):
            expected = brute_force_dissimilar(oracle, graph.vertices[i], graph.vertices[j], 3)
            assert graph.are_dissimilar(i, j) == expected
    # for parity, dissimilarity is exactly "different numbers of a's mod 2"
    for i, j in graph.edges():
        x, x2 = graph.vertices[i], graph.vertices[j]
        assert x.count("a") % 2 != x2.count("a") % 2


def test_graph_sigma_star_has_no_edges():
    graph = build_dissimilarity_graph(SIGMA_STAR, 4)
    assert list(graph.edges()) == []


def test_graph_pal_hand_example():
    oracle = ORACLES["pal"]
    graph = build_dissimilarity_graph(oracle, 4)
    i = graph.vertices.index("aa")
    j = graph.vertices.index("ab")
    # witness y = "aa": "aaaa" is a palindrome, "abaa" is not
    assert oracle("aaaa") and not oracle("abaa")
    assert graph.are_dissimilar(i, j)


def test_budget_error_reports_requirement():
    with pytest.raises(BudgetExceededError) as err:
        build_dissimilarity_graph(ORACLES["parity"], 10, string_budget=100)
    assert err.value.required == 2**11 - 1


def test_parity_nonregularity_exact():
    for n in range(1, 7):
        report = nonregularity(ORACLES["parity"], n)
        assert report.d_exact == 2
        assert report.method == "exact-clique"
        assert report.c_bits == pytest.approx(1.0)
    # independent confirmation at a tiny horizon
    assert brute_force_max_clique(ORACLES["parity"], 2) == 2


def test_eq_nonregularity_matches_brute_force():
    report = nonregularity(ORACLES["eq"], 3)
    assert report.d_exact == brute_force_max_clique(ORACLES["eq"], 3)


def test_sigma_star_single_class():
    report = nonregularity(SIGMA_STAR, 5)
    assert report.d_exact == 1
    assert communication_bits(report) == 0.0


def test_pal_lower_bound_doubles():
    # same-length witnesses of length n at horizon 2n: all 2^n strings of
    # length n are pairwise separated by reversal suffixes
    for n in range(1, 6):
        report = nonregularity(ORACLES["pal"], 2 * n, mode="lower")
        assert report.d_lower >= 2**n
        assert report.method == "same-length-classes"


def test_pal_witness_set_at_horizon_4():
    report = nonregularity(ORACLES["pal"], 4, mode="lower")
    assert report.d_lower >= 4
    assert len(report.witness_set) == report.d_lower
    # the length-2 block construction is itself a valid witness set
    for x, x2 in combinations(("aa", "ab", "ba", "bb"), 2):
        assert brute_force_dissimilar(ORACLES["pal"], x, x2, 4)


def test_witnesses_reverified_against_oracle():
    for name in ("parity", "pal", "eq", "3ap"):
        report = nonregularity(ORACLES[name], 5)
        for x, x2 in combinations(report.witness_set, 2):
            assert brute_force_dissimilar(ORACLES[name], x, x2, 5)


def test_lower_at_most_exact():
    for name in ("parity", "pal", "eq", "primes", "3ap"):
        lower = nonregularity(ORACLES[name], 6, mode="lower")
        exact = nonregularity(ORACLES[name], 6, mode="exact")
        assert lower.d_lower <= exact.d_exact
        assert exact.d_lower <= exact.d_exact


def test_monotone_in_horizon():
    for name in ("parity", "pal", "eq", "primes", "3ap"):
        values = [nonregularity(ORACLES[name], n).d_exact for n in range(1, 7)]
        assert values == sorted(values)


def test_d_bounded_by_string_count():
    for name in ("pal", "3ap"):
        report = nonregularity(ORACLES[name], 5)
        assert report.d_exact <= 2**6 - 1


def test_parity_stabilizes_at_nerode_index():
    values = {nonregularity(ORACLES["parity"], n).d_exact for n in range(2, 8)}
    assert values == {2}


def test_communication_bits_examples():
    assert communication_bits(nonregularity(ORACLES["parity"], 4)) == pytest.approx(1.0)
    report = nonregularity(ORACLES["pal"], 8, mode="lower")
    assert communication_bits(report) >= 4.0  # 2^4 witnesses at horizon 8
    assert communication_bits(nonregularity(SIGMA_STAR, 3)) == 0.0


def test_clique_budget_falls_back_to_lower():
    report = nonregularity(ORACLES["pal"], 8, mode="exact", clique_budget=5)
    assert report.d_exact is None
    assert report.method == "same-length-classes"
    assert report.d_lower >= 16


def test_dfa_crosscheck_examples():
    assert exhaustive_dfa_crosscheck(ORACLES["parity"], 4) == 2
    assert exhaustive_dfa_crosscheck(SIGMA_STAR, 4) == 1
    assert exhaustive_dfa_crosscheck(ORACLES["pal"], 4) is None


def test_dfa_crosscheck_equals_exact_nonregularity():
    for oracle in (ORACLES["parity"], SIGMA_STAR, ORACLES["eq"], ORACLES["pal"]):
        for n in (3, 4):
            size = exhaustive_dfa_crosscheck(oracle, n)
            if size is not None:
                assert size == nonregularity(oracle, n).d_exact
