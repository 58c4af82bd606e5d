"""Built-in language oracles and finitely generated group machinery.

Languages: parity of a's, {a^m b^m}, palindromes, binary primes, strings
containing a length-3 arithmetic progression of 1s, and group word problems.

Groups are given by exact integer normal forms (no floating point, no matrix
representations): Z as ints, Z^2 as pairs, the free group F2 as reduced
words, and the discrete Heisenberg group as triples with the product
(a, b, c)(a', b', c') = (a+a', b+b', c+c'+a*b').  Generator symbols are
lowercase letters with uppercase for inverses, so word-problem alphabets
stay single-character.

The growth table beta(r) counts group elements within Cayley-graph distance
r of the identity; geodesic representatives found during the search yield a
pairwise-dissimilar witness set for the word problem at horizon 2r, which is
how growth lower-bounds nonregularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .hardness import (
    BudgetExceededError,
    HardnessReport,
    LanguageOracle,
    nonregularity,
    strings_up_to,
)

__all__ = [
    "GroupPresentation",
    "GrowthTable",
    "GrowthComparison",
    "builtin_oracles",
    "builtin_groups",
    "word_problem_oracle",
    "growth",
    "growth_vs_nonregularity",
]


# ---------------------------------------------------------------------------
# Plain language oracles
# ---------------------------------------------------------------------------


def _parity_member(w: str) -> bool:
    return w.count("a") % 2 == 0


def _eq_member(w: str) -> bool:
    m = w.count("a")
    return w == "a" * m + "b" * (len(w) - m) and 2 * m == len(w)


def _pal_member(w: str) -> bool:
    return w == w[::-1]


def _is_prime(v: int) -> bool:
    if v < 2:
        return False
    if v % 2 == 0:
        return v == 2
    f = 3
    while f * f <= v:
        if v % f == 0:
            return False
        f += 2
    return True


def _primes_member(w: str) -> bool:
    # Membership means w is *the* binary representation of a prime:
    # no leading zeros, so e.g. "011" is not a member even though 3 is prime.
    if not w or (len(w) > 1 and w[0] == "0"):
        return False
    return _is_prime(int(w, 2))


def _3ap_member(w: str) -> bool:
    ones = [i for i, ch in enumerate(w) if ch == "1"]
    one_set = set(ones)
    for idx, i in enumerate(ones):
        for j in ones[idx + 1 :]:
            if 2 * j - i in one_set:
                return True
    return False


# ---------------------------------------------------------------------------
# Groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupPresentation:
    """A finitely generated group via an exact normal-form element model.

    ``generators`` maps each generator symbol to its element; inverses get
    the uppercase symbol.  Elements must be hashable and support the given
    ``multiply``/``invert`` exactly, with ``identity`` as the neutral
    element.
    """

    name: str
    generators: dict[str, object]
    identity: object
    multiply: Callable[[object, object], object]
    invert: Callable[[object], object]

    @property
    def symbols(self) -> tuple[str, ...]:
        """Generator symbols followed by their formal inverses."""
        gens = tuple(self.generators)
        return gens + tuple(s.upper() for s in gens)

    def symbol_image(self, s: str) -> object:
        if s in self.generators:
            return self.generators[s]
        low = s.lower()
        if s != low and low in self.generators:
            return self.invert(self.generators[low])
        raise ValueError(f"{self.name}: symbol {s!r} is not a generator or inverse")

    def evaluate(self, word: str) -> object:
        g = self.identity
        for s in word:
            g = self.multiply(g, self.symbol_image(s))
        return g

    def invert_word(self, word: str) -> str:
        return word[::-1].swapcase()


def _reduce_free(word: str, extra: str) -> str:
    """Free reduction of the concatenation word + extra (F2 normal form)."""
    out = list(word)
    for s in extra:
        if out and out[-1] == s.swapcase():
            out.pop()
        else:
            out.append(s)
    return "".join(out)


def group_z() -> GroupPresentation:
    return GroupPresentation(
        name="Z",
        generators={"a": 1},
        identity=0,
        multiply=lambda g, h: g + h,
        invert=lambda g: -g,
    )


def group_z2() -> GroupPresentation:
    return GroupPresentation(
        name="Z2",
        generators={"a": (1, 0), "b": (0, 1)},
        identity=(0, 0),
        multiply=lambda g, h: (g[0] + h[0], g[1] + h[1]),
        invert=lambda g: (-g[0], -g[1]),
    )


def group_f2() -> GroupPresentation:
    return GroupPresentation(
        name="F2",
        generators={"a": "a", "b": "b"},
        identity="",
        multiply=_reduce_free,
        invert=lambda g: g[::-1].swapcase(),
    )


def group_heisenberg() -> GroupPresentation:
    def mul(g, h):
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    def inv(g):
        return (-g[0], -g[1], -g[2] + g[0] * g[1])

    return GroupPresentation(
        name="H",
        generators={"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)},
        identity=(0, 0, 0),
        multiply=mul,
        invert=inv,
    )


def builtin_groups() -> dict[str, GroupPresentation]:
    return {g.name: g for g in (group_z(), group_z2(), group_f2(), group_heisenberg())}


def word_problem_oracle(group: GroupPresentation) -> LanguageOracle:
    """The language of generator strings that multiply to the identity."""
    return LanguageOracle(
        name=f"W_{group.name}",
        alphabet=group.symbols,
        membership=lambda w: group.evaluate(w) == group.identity,
    )


def builtin_oracles() -> dict[str, LanguageOracle]:
    oracles = [
        LanguageOracle("parity", ("a", "b"), _parity_member),
        LanguageOracle("eq", ("a", "b"), _eq_member),
        LanguageOracle("pal", ("a", "b"), _pal_member),
        LanguageOracle("primes", ("0", "1"), _primes_member),
        LanguageOracle("3ap", ("0", "1"), _3ap_member),
    ]
    oracles.extend(word_problem_oracle(g) for g in builtin_groups().values())
    return {o.name: o for o in oracles}


# ---------------------------------------------------------------------------
# Growth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthTable:
    """Ball sizes beta(r) of a group's Cayley graph for r = 0..n."""

    group: str
    radii: tuple[int, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.counts[0] != 1:
            raise ValueError("the radius-0 ball is the identity alone")
        if any(b > a for a, b in zip(self.counts[1:], self.counts)):
            raise ValueError("ball sizes must be nondecreasing")

    def beta(self, r: int) -> int:
        return self.counts[r]

    def submultiplicative_pairs(self) -> list[tuple[int, int]]:
        """All (m, n) with m + n tabulated; beta(m+n) <= beta(m) beta(n)."""
        top = self.radii[-1]
        return [(m, n) for m in range(top + 1) for n in range(top + 1 - m)]

    def csv_rows(self) -> list[tuple[str, int, int]]:
        return [(self.group, r, c) for r, c in zip(self.radii, self.counts)]


def growth(
    group: GroupPresentation, n: int, budget: int = 2_000_000
) -> tuple[GrowthTable, dict[object, str]]:
    """Breadth-first ball sizes up to radius n, deduplicated by normal form.

    Also returns one geodesic word per element discovered, used for the
    word-problem witness construction below.
    """
    words: dict[object, str] = {group.identity: ""}
    frontier = [group.identity]
    counts = [1]
    for _ in range(n):
        nxt = []
        for g in frontier:
            base = words[g]
            for s in group.symbols:
                h = group.multiply(g, group.symbol_image(s))
                if h not in words:
                    words[h] = base + s
                    nxt.append(h)
                    if len(words) > budget:
                        raise BudgetExceededError(
                            f"{group.name}: ball exceeded {budget} elements", len(words)
                        )
        frontier = nxt
        counts.append(len(words))
    table = GrowthTable(group=group.name, radii=tuple(range(n + 1)), counts=tuple(counts))
    return table, words


@dataclass(frozen=True)
class GrowthComparison:
    """Growth versus word-problem nonregularity at matched scales.

    ``witnesses`` are geodesic words for the ball of radius n; appending the
    inverse of one's own geodesic lands in the word problem, while appending
    another's does not, so the ball gives beta(n) pairwise-dissimilar strings
    of length <= n at horizon 2n.
    """

    group: str
    radius: int
    beta: int
    horizon: int
    report: HardnessReport
    d_lower: int
    witnesses: tuple[str, ...]

    @property
    def holds(self) -> bool:
        return self.d_lower >= self.beta

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "radius": self.radius,
            "beta": self.beta,
            "horizon": self.horizon,
            "d_lower": self.d_lower,
            "holds": self.holds,
            "witness_count": len(self.witnesses),
        }


def growth_vs_nonregularity(
    group: GroupPresentation,
    n: int,
    string_budget: int = 200_000,
) -> GrowthComparison:
    """Check that the word problem's nonregularity at horizon 2n is at least
    the ball size beta(n).

    The geodesic witness set is verified pair by pair against the raw group
    oracle; the hardness report at horizon 2n comes from the generic
    signature machinery when the horizon fits its budget (skipped otherwise,
    the geodesic clique alone already certifies the bound).
    """
    table, words = growth(group, n)
    oracle = word_problem_oracle(group)
    witnesses = tuple(sorted(words.values(), key=lambda w: (len(w), w)))

    for i, wi in enumerate(witnesses):
        if not oracle(wi + group.invert_word(wi)):
            raise AssertionError(f"{group.name}: geodesic {wi!r} failed its own inverse")
        for wj in witnesses[i + 1 :]:
            if oracle(wj + group.invert_word(wi)):
                raise AssertionError(
                    f"{group.name}: {wj!r} * {wi!r}^-1 unexpectedly in the word problem"
                )

    try:
        report = nonregularity(oracle, 2 * n, mode="lower", string_budget=string_budget)
    except BudgetExceededError:
        report = HardnessReport(
            language=oracle.name,
            n=2 * n,
            d_exact=None,
            d_lower=len(witnesses),
            witness_set=witnesses,
            c_bits=math.log2(len(witnesses)),
            method="same-length-classes",
        )
    d_lower = max(report.d_lower, len(witnesses))
    return GrowthComparison(
        group=group.name,
        radius=n,
        beta=table.beta(n),
        horizon=2 * n,
        report=report,
        d_lower=d_lower,
        witnesses=witnesses,
    )
