"""Language hardness measures: dissimilarity, nonregularity, communication.

Two strings x, x' of length at most n are (L, n)-dissimilar when some
suffix y with |y| <= n - max(|x|, |x'|) separates them (xy in L but x'y not,
or vice versa).  The nonregularity D_L(n) is the size of the largest
pairwise-dissimilar subset of strings of length at most n; it equals the
minimum size of a DFA agreeing with L on all strings of length at most n,
and log2 of it is the one-way communication complexity of membership.

Dissimilarity is not transitive (the allowed suffix length depends on the
pair), so D_L(n) over mixed lengths is a maximum-clique problem; we solve it
exactly by branch and bound at small horizons and fall back to counting
distinct same-length membership signatures, which always yields a valid
clique and hence a sound lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterator

__all__ = [
    "LanguageOracle",
    "DissimilarityGraph",
    "HardnessReport",
    "BudgetExceededError",
    "build_dissimilarity_graph",
    "nonregularity",
    "communication_bits",
    "exhaustive_dfa_crosscheck",
    "strings_up_to",
]

DEFAULT_STRING_BUDGET = 8191  # |Sigma^<=n| for binary alphabets up to n = 12
DEFAULT_CLIQUE_BUDGET = 2_000_000  # branch-and-bound node expansions


class BudgetExceededError(RuntimeError):
    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


@dataclass(frozen=True)
class LanguageOracle:
    """A language as a total membership predicate over a finite alphabet."""

    name: str
    alphabet: tuple[str, ...]
    membership: Callable[[str], bool]

    def __post_init__(self):
        if not self.alphabet or len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet must be nonempty and distinct")

    def __call__(self, w: str) -> bool:
        return bool(self.membership(w))


def strings_up_to(alphabet: tuple[str, ...], n: int) -> list[str]:
    """All strings of length <= n in length-then-lexicographic order."""
    out: list[str] = []
    for length in range(n + 1):
        out.extend("".join(t) for t in product(alphabet, repeat=length))
    return out


def count_up_to(sigma: int, n: int) -> int:
    if sigma == 1:
        return n + 1
    return (sigma ** (n + 1) - 1) // (sigma - 1)


@dataclass(frozen=True)
class DissimilarityGraph:
    """Vertices Sigma^<=n with edges between (L, n)-dissimilar pairs.

    ``signatures[i]`` packs the membership bits of vertex i extended by every
    suffix in canonical order, as an int bitset; because the suffix order is
    length-then-lexicographic, the suffixes allowed for a pair form a prefix
    window of the bitset, so the pair test is one masked xor.
    """

    oracle: LanguageOracle
    n: int
    vertices: tuple[str, ...]
    signatures: tuple[int, ...]

    def _window_mask(self, max_suffix_len: int) -> int:
        return (1 << count_up_to(len(self.oracle.alphabet), max_suffix_len)) - 1

    def are_dissimilar(self, i: int, j: int) -> bool:
        allowed = self.n - max(len(self.vertices[i]), len(self.vertices[j]))
        mask = self._window_mask(allowed)
        return bool((self.signatures[i] ^ self.signatures[j]) & mask)

    def edges(self) -> Iterator[tuple[int, int]]:
        for i in range(len(self.vertices)):
            for j in range(i + 1, len(self.vertices)):
                if self.are_dissimilar(i, j):
                    yield (i, j)

    def adjacency_bitsets(self) -> list[int]:
        n_vert = len(self.vertices)
        adj = [0] * n_vert
        for i, j in self.edges():
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return adj


def build_dissimilarity_graph(
    oracle: LanguageOracle, n: int, string_budget: int = DEFAULT_STRING_BUDGET
) -> DissimilarityGraph:
    """Enumerate Sigma^<=n, query the oracle once per string, pack signatures."""
    required = count_up_to(len(oracle.alphabet), n)
    if required > string_budget:
        raise BudgetExceededError(
            f"{oracle.name}: horizon {n} needs {required} strings, budget is {string_budget}",
            required=required,
        )
    vertices = strings_up_to(oracle.alphabet, n)
    member = {w: oracle(w) for w in vertices}
    signatures = []
    for x in vertices:
        sig = 0
        for bit, y in enumerate(strings_up_to(oracle.alphabet, n - len(x))):
            if member[x + y]:
                sig |= 1 << bit
        signatures.append(sig)
    return DissimilarityGraph(
        oracle=oracle, n=n, vertices=tuple(vertices), signatures=tuple(signatures)
    )


@dataclass(frozen=True)
class HardnessReport:
    """Nonregularity of a language at one horizon."""

    language: str
    n: int
    d_exact: int | None
    d_lower: int
    witness_set: tuple[str, ...]
    c_bits: float
    method: str  # "exact-clique" | "same-length-classes"

    @property
    def d_best(self) -> int:
        return self.d_exact if self.d_exact is not None else self.d_lower

    def to_json_dict(self) -> dict:
        return {
            "language": self.language,
            "n": self.n,
            "d_exact": self.d_exact,
            "d_lower": self.d_lower,
            "c_bits": self.c_bits,
            "method": self.method,
            "witness_count": len(self.witness_set),
            "witness_set": list(self.witness_set),
        }


def _verify_witnesses(oracle: LanguageOracle, n: int, witnesses: tuple[str, ...]) -> None:
    """Re-check pairwise dissimilarity against the raw oracle.

    Independent of the signature machinery: scans all allowed suffixes
    directly.
    """
    for a in range(len(witnesses)):
        for b in range(a + 1, len(witnesses)):
            x, xp = witnesses[a], witnesses[b]
            allowed = n - max(len(x), len(xp))
            if not any(
                oracle(x + y) != oracle(xp + y)
                for y in strings_up_to(oracle.alphabet, allowed)
            ):
                raise AssertionError(
                    f"witness pair {x!r}, {xp!r} is not ({oracle.name}, {n})-dissimilar"
                )


def _greedy_coloring_bound(candidates: int, adj: list[int]) -> int:
    """Number of greedy colors needed for the candidate set (clique upper bound)."""
    colors: list[int] = []  # bitset of vertices per color class
    count = 0
    rest = candidates
    while rest:
        v = rest & -rest
        i = v.bit_length() - 1
        rest ^= v
        for ci in range(count):
            if not (adj[i] & colors[ci]):
                colors[ci] |= v
                break
        else:
            colors.append(v)
            count += 1
    return count


def _max_clique(adj: list[int], budget: int) -> tuple[list[int], bool]:
    """Branch-and-bound maximum clique with a greedy-coloring bound.

    Returns (clique vertex indices, completed).  ``completed`` is False when
    the node budget ran out, in which case the clique found so far is still
    a valid (possibly suboptimal) clique.
    """
    n = len(adj)
    order = sorted(range(n), key=lambda i: -bin(adj[i]).count("1"))
    best: list[int] = []
    expansions = 0
    completed = True

    def expand(current: list[int], candidates: int):
        nonlocal best, expansions, completed
        if not completed:
            return
        expansions += 1
        if expansions > budget:
            completed = False
            return
        if not candidates:
            if len(current) > len(best):
                best = list(current)
            return
        if len(current) + _greedy_coloring_bound(candidates, adj) <= len(best):
            return
        for i in order:
            bit = 1 << i
            if not (candidates & bit):
                continue
            if len(current) + bin(candidates).count("1") <= len(best):
                return
            current.append(i)
            expand(current, candidates & adj[i])
            current.pop()
            candidates &= ~bit

    expand([], (1 << n) - 1)
    return best, completed


def _same_length_classes(graph: DissimilarityGraph) -> tuple[str, ...]:
    """Largest set of same-length strings with distinct signature windows.

    Two equal-length strings with different signatures over their common
    suffix window are dissimilar, so each class set is a clique and its size
    a sound lower bound on the nonregularity.
    """
    best: list[str] = []
    by_length: dict[int, list[int]] = {}
    for i, v in enumerate(graph.vertices):
        by_length.setdefault(len(v), []).append(i)
    for length, idxs in by_length.items():
        mask = graph._window_mask(graph.n - length)
        reps: dict[int, int] = {}
        for i in idxs:
            reps.setdefault(graph.signatures[i] & mask, i)
        if len(reps) > len(best):
            best = [graph.vertices[i] for i in reps.values()]
    return tuple(best)


def nonregularity(
    oracle: LanguageOracle,
    n: int,
    mode: str = "exact",
    string_budget: int = DEFAULT_STRING_BUDGET,
    clique_budget: int = DEFAULT_CLIQUE_BUDGET,
) -> HardnessReport:
    """Compute D_L(n), exactly or as a certified lower bound.

    ``mode="exact"`` runs branch-and-bound maximum clique on the
    dissimilarity graph, falling back to the same-length-classes lower bound
    if the clique budget is exhausted; ``mode="lower"`` computes only the
    lower bound.  Witness sets are re-verified against the raw oracle before
    being reported.
    """
    if mode not in ("exact", "lower"):
        raise ValueError(f"unknown mode {mode!r}")
    graph = build_dissimilarity_graph(oracle, n, string_budget)
    lower_witnesses = _same_length_classes(graph)

    d_exact: int | None = None
    witnesses = lower_witnesses
    method = "same-length-classes"
    if mode == "exact":
        clique, completed = _max_clique(graph.adjacency_bitsets(), clique_budget)
        if completed:
            d_exact = max(len(clique), 1)
            if len(clique) >= len(lower_witnesses):
                witnesses = tuple(graph.vertices[i] for i in clique)
            method = "exact-clique"

    if not witnesses:  # the empty string is always a 1-clique
        witnesses = (graph.vertices[0],)
    _verify_witnesses(oracle, n, witnesses)
    d_lower = max(len(lower_witnesses), len(witnesses), 1)
    if d_exact is not None and d_lower > d_exact:
        raise AssertionError("lower bound exceeded exact clique number")
    d_best = d_exact if d_exact is not None else d_lower
    return HardnessReport(
        language=oracle.name,
        n=n,
        d_exact=d_exact,
        d_lower=d_lower,
        witness_set=witnesses,
        c_bits=math.log2(d_best),
        method=method,
    )


def communication_bits(report: HardnessReport) -> float:
    """One-way communication complexity in bits: log2 of the best D value."""
    return math.log2(report.d_best)


def exhaustive_dfa_crosscheck(
    oracle: LanguageOracle, n: int, max_states: int = 3
) -> int | None:
    """Smallest s <= max_states with an s-state DFA agreeing with L on
    Sigma^<=n, or None.

    Enumerates every transition table and accept set with start state 0
    (start relabeling loses no generality).  When this finds a machine, the
    value must coincide with the exact nonregularity at the same horizon.
    """
    if max_states > 3:
        raise ValueError("exhaustive search is only feasible for max_states <= 3")
    sigma = oracle.alphabet
    words = strings_up_to(sigma, n)
    want = [oracle(w) for w in words]
    for s in range(1, max_states + 1):
        tables = product(range(s), repeat=s * len(sigma))
        for table in tables:
            # state of each word, computed incrementally along the prefix tree
            states: dict[str, int] = {"": 0}
            for w in words[1:]:
                prev = states[w[:-1]]
                states[w] = table[prev * len(sigma) + sigma.index(w[-1])]
            reachable = set(states.values())
            for accepts in product((False, True), repeat=s):
                if all(accepts[states[w]] == want[i] for i, w in enumerate(words)):
                    # ignore accept-set choices on unreachable states
                    if s == 1 or len(reachable) == s:
                        return s
    return None
