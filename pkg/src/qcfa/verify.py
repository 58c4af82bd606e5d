"""Numerical verification suite for the transfer-operator machinery.

Every finitely checkable inequality in the construction is exercised here
over the shipped fixture machines plus seeded random machines: channel laws
of the step/truncation/transfer operators, equivalence of the operator path
with brute-force branch enumeration, the structural zero pattern of transfer
operators, the crossing-sequence distance bound, the feature-vector packing
chain, the acceptance/time bridge inequalities, hardness monotonicity, and
the growth inequalities.

Checks never raise on a violated inequality; they return a CheckResult whose
``worst_slack`` is the most-violated margin (positive means satisfied) with
a replayable witness of the worst instance.
"""

from __future__ import annotations

import math
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import langs
from .hardness import nonregularity
from .machine import (
    MachineFormatError,
    TwoQcfa,
    exact_run,
    fixture_path,
    load_machine,
    to_convenient_form,
)
from .quantum import (
    KrausFamily,
    choi_matrix,
    choi_trace_norm_bound,
    min_eigenvalue,
    random_density,
    random_isometry_blocks,
    schatten_norm,
)
from .transfer import (
    TransferOperator,
    _blocks_to_dense,
    accept_profile,
    check_step_channel,
    crossing_distances,
    crossing_sequence,
    dual_transfer_operator,
    enumerate_stopping_ensemble,
    feature_vector,
    full_space_transfer_matrix,
    prefix_region,
    suffix_region,
    transfer_operator,
)

TOL = 1e-9
ZERO_PATTERN_TOL = 1e-12

FIXTURE_NAMES = ("parity", "rotation", "coin")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named check over some number of instances."""

    check_id: str
    instances: int
    worst_slack: float
    witnesses: dict
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "instances": self.instances,
            "worst_slack": self.worst_slack,
            "passed": self.passed,
            "witnesses": self.witnesses,
        }


def _result(check_id: str, slacks: list[tuple[float, dict]], tol: float = TOL) -> CheckResult:
    """Aggregate (slack, witness) pairs; positive slack means satisfied."""
    if not slacks:
        return CheckResult(check_id, 0, math.inf, {}, True)
    worst, witness = min(slacks, key=lambda sw: sw[0])
    return CheckResult(
        check_id=check_id,
        instances=len(slacks),
        worst_slack=worst,
        witnesses=witness,
        passed=worst >= -tol,
    )


@dataclass(frozen=True)
class VerifyConfig:
    """Parameters of the full suite; everything derives from the seed."""

    seed: int = 0
    random_machines: int = 10
    machine_paths: tuple[str, ...] = ()
    prefixes_per_machine: int = 2
    max_prefix_len: int = 4
    m_values: tuple[int, ...] = (0, 5, 20)
    density_samples: int = 20
    enumeration_m: int = 9
    crossing_i_max: int = 10
    crossing_random_instances: int = 20
    bridge_m: int = 50
    hardness_max_n: int = 8
    growth_radius: int = 3
    string_budget: int = 8191


def fixture_machines() -> list[TwoQcfa]:
    return [load_machine(fixture_path(name)) for name in FIXTURE_NAMES]


def random_machine(
    seed: int,
    k: int = 2,
    d: int = 4,
    n_results: int = 2,
    alphabet: tuple[str, ...] = ("a", "b"),
) -> TwoQcfa:
    """A random valid 2QCFA.

    Kraus families are blocks of random isometries, so completeness holds by
    construction; classical moves are uniform over the legal directions.
    ``d`` counts all classical states including accept and reject (so
    d >= 3).
    """
    if d < 3:
        raise ValueError("need at least start, accept, and reject states")
    rng = np.random.Generator(np.random.Philox(key=seed))
    quantum_states = tuple(f"q{i}" for i in range(k))
    classical_states = tuple(f"c{i}" for i in range(d - 2)) + ("accept", "reject")
    results = tuple(f"r{i}" for i in range(n_results))
    tape = alphabet + ("#L", "#R")
    theta = {}
    delta = {}
    for c in classical_states[: d - 2]:
        for sigma in tape:
            blocks = random_isometry_blocks(k, n_results, rng)
            theta[(c, sigma)] = KrausFamily(
                results, {r: (blocks[i],) for i, r in enumerate(results)}, k * k
            )
            moves = [0, 1] if sigma == "#L" else [-1, 0] if sigma == "#R" else [-1, 0, 1]
            for r in results:
                # Halting must stay reachable but rare enough that runs are long.
                target = int(rng.integers(0, d + 2))
                nxt = classical_states[min(target, d - 1)]
                delta[(c, sigma, r)] = (nxt, int(rng.choice(moves)))
    return TwoQcfa(
        name=f"random-{seed}",
        quantum_states=quantum_states,
        classical_states=classical_states,
        alphabet=alphabet,
        results=results,
        theta=theta,
        delta=delta,
        q_start="q0",
        c_start="c0",
        c_acc="accept",
        c_rej="reject",
    )


def random_machine_pool(config: VerifyConfig) -> list[TwoQcfa]:
    rng = np.random.Generator(np.random.Philox(key=config.seed))
    pool = []
    for i in range(config.random_machines):
        k = int(rng.integers(1, 3))
        d = int(rng.integers(3, 7))
        n_results = int(rng.integers(1, 3))
        pool.append(random_machine(seed=config.seed * 1000 + i, k=k, d=d, n_results=n_results))
    return pool


def _random_word(rng, alphabet, max_len: int) -> str:
    length = int(rng.integers(0, max_len + 1))
    return "".join(str(rng.choice(alphabet)) for _ in range(length))


def _random_diag_density(spec: TwoQcfa, rng) -> np.ndarray:
    """Random classical-diagonal density as (d, k, k) blocks."""
    k, d = spec.k, spec.d
    z = np.zeros((d, k, k), dtype=np.complex128)
    weights = rng.dirichlet(np.ones(d))
    for c in range(d):
        z[c] = weights[c] * random_density(k, rng).matrix
    return z


def _apply(op: TransferOperator, z: np.ndarray) -> np.ndarray:
    d, k = op.d, op.k
    return (op.action @ z.reshape(d * k * k)).reshape(d, k, k)


# ---------------------------------------------------------------------------
# Individual checks
# ---------------------------------------------------------------------------


def check_channel_laws(
    machines: Sequence[TwoQcfa],
    config: VerifyConfig,
    load_failures: Sequence[tuple[str, str]] = (),
) -> CheckResult:
    """Step completeness, Choi positivity, and trace preservation of every
    constructed transfer operator.

    Machine descriptions that failed validation at load (for example a Kraus
    family that does not sum to the identity) count as failed instances of
    this check, carrying the loader's message naming the transition.
    """
    rng = np.random.Generator(np.random.Philox(key=config.seed + 1))
    slacks: list[tuple[float, dict]] = []
    for path, message in load_failures:
        slacks.append((-math.inf, {"machine": path, "law": "load", "error": message}))
    for spec in machines:
        conv = to_convenient_form(spec)
        words = {
            _random_word(rng, conv.alphabet, config.max_prefix_len)
            for _ in range(config.prefixes_per_machine)
        }
        for text in sorted(words):
            for side, region in (
                ("prefix", prefix_region(conv, text)),
                ("suffix", suffix_region(conv, text)),
            ):
                ident = {"machine": spec.name, "side": side, "text": text}
                _, residual = check_step_channel(region)
                slacks.append((TOL - residual, {**ident, "law": "step-completeness"}))
                for m in config.m_values:
                    op = transfer_operator(region, m)
                    eig = min_eigenvalue(choi_matrix(op.to_super()))
                    slacks.append((eig + TOL, {**ident, "m": m, "law": "choi-psd"}))
                    for _ in range(config.density_samples):
                        z = _random_diag_density(conv, rng)
                        out = _apply(op, z)
                        total = float(sum(np.trace(out[c]).real for c in range(conv.d)))
                        slacks.append(
                            (TOL - abs(total - 1.0), {**ident, "m": m, "law": "trace-preserving"})
                        )
    return _result("channel-laws", slacks)


def check_operator_vs_enumeration(
    machines: Sequence[TwoQcfa], config: VerifyConfig
) -> CheckResult:
    """Transfer operators agree with brute-force branch enumeration."""
    rng = np.random.Generator(np.random.Philox(key=config.seed + 2))
    slacks: list[tuple[float, dict]] = []
    for spec in machines:
        conv = to_convenient_form(spec)
        for text in ("", "a", "ab", "bbab")[: config.max_prefix_len]:
            for side, region in (
                ("prefix", prefix_region(conv, text)),
                ("suffix", suffix_region(conv, text)),
            ):
                for m in (0, config.enumeration_m):
                    op = transfer_operator(region, m)
                    for _ in range(3):
                        z = _random_diag_density(conv, rng)
                        fast = _apply(op, z)
                        slow, dropped = enumerate_stopping_ensemble(region, z, m)
                        dist = schatten_norm(
                            _blocks_to_dense(fast) - _blocks_to_dense(slow), 1
                        )
                        slacks.append(
                            (
                                TOL + dropped - dist,
                                {
                                    "machine": spec.name,
                                    "side": side,
                                    "text": text,
                                    "m": m,
                                    "distance": dist,
                                    "pruned_mass": dropped,
                                },
                            )
                        )
    return _result("operator-vs-simulation", slacks)


def check_structural_zeros(machines: Sequence[TwoQcfa], config: VerifyConfig) -> CheckResult:
    """Entries of the transfer operator required to vanish do vanish.

    Computed on the full quantum (x) classical space via the literal Kraus
    dynamics (independent of the block-form fast path, which enforces the
    pattern by construction): inputs with mismatched classical bra/ket are
    annihilated and outputs never mix classical indices.  Also confirms the
    fast path matches the full-space computation entrywise.
    """
    slacks: list[tuple[float, dict]] = []
    for spec in machines:
        conv = to_convenient_form(spec)
        k, d = conv.k, conv.d
        kd = k * d
        for text in ("", "a"):
            for region in (prefix_region(conv, text), suffix_region(conv, text)):
                for m in (0, 4):
                    full = full_space_transfer_matrix(region, m)
                    padded = transfer_operator(region, m).to_super().action
                    agree = float(np.abs(full - padded).max())
                    worst_zero = 0.0
                    for i in range(kd):
                        for j in range(kd):
                            col = full[:, j * kd + i]
                            c1, c1p = i % d, j % d
                            if c1 != c1p:
                                worst_zero = max(worst_zero, float(np.abs(col).max()))
                                continue
                            out = col.reshape(kd, kd, order="F")
                            for r in range(kd):
                                for s in range(kd):
                                    if r % d != s % d:
                                        worst_zero = max(worst_zero, abs(out[r, s]))
                    ident = {"machine": spec.name, "side": region.side, "text": text, "m": m}
                    slacks.append((ZERO_PATTERN_TOL - worst_zero, {**ident, "law": "zero-pattern"}))
                    slacks.append((TOL - agree, {**ident, "law": "full-space-agreement"}))
    return _result("structural-zeros", slacks, tol=0.0)


def check_crossing_distance(
    spec: TwoQcfa, x: str, x2: str, y: str, m: int, i_max: int
) -> CheckResult:
    """Distance between paired crossing-sequence entries is bounded by
    floor((i-1)/2) times the Choi bound on the prefix-operator distance."""
    cs_a = crossing_sequence(spec, x, y, m, i_max)
    cs_b = crossing_sequence(spec, x2, y, m, i_max)
    bound = choi_trace_norm_bound(
        transfer_operator(prefix_region(spec, x), m).to_super(),
        transfer_operator(prefix_region(spec, x2), m).to_super(),
    )
    dists = crossing_distances(cs_a, cs_b)
    slacks = []
    for i, dist in enumerate(dists, start=1):
        rhs = ((i - 1) // 2) * bound
        slacks.append(
            (
                rhs + TOL - dist,
                {"machine": spec.name, "x": x, "x2": x2, "y": y, "m": m, "i": i,
                 "distance": dist, "bound": rhs},
            )
        )
    return _result("crossing-distance", slacks, tol=0.0)


def check_crossing_distance_suite(
    machines: Sequence[TwoQcfa], config: VerifyConfig
) -> CheckResult:
    rng = np.random.Generator(np.random.Philox(key=config.seed + 3))
    slacks: list[tuple[float, dict]] = []

    def absorb(res: CheckResult):
        slacks.append((res.worst_slack, res.witnesses))

    for spec in machines[:3]:
        conv = to_convenient_form(spec)
        absorb(check_crossing_distance(conv, "a", "b", "a", 20, config.crossing_i_max))
        absorb(check_crossing_distance(conv, "ab", "ab", "b", 20, config.crossing_i_max))
    pool = random_machine_pool(config)
    for i in range(config.crossing_random_instances):
        spec = pool[i % len(pool)] if pool else machines[0]
        conv = to_convenient_form(spec)
        x = _random_word(rng, conv.alphabet, 2)
        x2 = _random_word(rng, conv.alphabet, 2)
        y = _random_word(rng, conv.alphabet, 2)
        absorb(check_crossing_distance(conv, x, x2, y, 8, config.crossing_i_max))
    return _result("crossing-distance", slacks, tol=0.0)


def check_packing(spec: TwoQcfa, xs: Sequence[str], m: int) -> CheckResult:
    """Feature-vector packing: some pair of a large set must be close.

    Mirrors the geometric argument: the feature vectors of the truncated
    transfer operators live in a ball of radius sqrt(h) in R^h (h = k^4 d^2),
    so the closest pair, measured through sqrt(2h) * Euclidean distance
    (which dominates the operators' Choi trace-norm distance), is at most
    4 sqrt(2) h / (|X|^(1/h) - 1).
    """
    if len(xs) < 2:
        raise ValueError("packing needs at least two strings")
    h = spec.k**4 * spec.d**2
    ops = {x: transfer_operator(prefix_region(spec, x), m) for x in xs}
    feats = {x: feature_vector(ops[x]) for x in xs}
    chois = {x: choi_matrix(ops[x].to_super()) for x in xs}
    slacks: list[tuple[float, dict]] = []
    for x, g in feats.items():
        slacks.append(
            (
                math.sqrt(h) + TOL - float(np.linalg.norm(g)),
                {"machine": spec.name, "law": "feature-norm", "x": x, "m": m},
            )
        )
    chain_min = math.inf
    worst_pair = None
    xs = list(xs)
    for i, x in enumerate(xs):
        for x2 in xs[i + 1 :]:
            feat_dist = math.sqrt(2 * h) * float(np.linalg.norm(feats[x] - feats[x2]))
            choi_dist = schatten_norm(chois[x] - chois[x2], 1)
            slacks.append(
                (
                    feat_dist + TOL - choi_dist,
                    {"machine": spec.name, "law": "choi-vs-feature", "x": x, "x2": x2, "m": m},
                )
            )
            if feat_dist < chain_min:
                chain_min, worst_pair = feat_dist, (x, x2)
    bound = 4 * math.sqrt(2) * h / (len(xs) ** (1.0 / h) - 1.0)
    slacks.append(
        (
            bound + TOL - chain_min,
            {"machine": spec.name, "law": "packing", "m": m, "set_size": len(xs),
             "closest_pair": worst_pair, "min_distance": chain_min, "bound": bound},
        )
    )
    return _result("packing", slacks, tol=0.0)


def _strings_up_to(alphabet, n):
    from .hardness import strings_up_to

    return strings_up_to(tuple(alphabet), n)


def check_packing_suite(machines: Sequence[TwoQcfa], config: VerifyConfig) -> CheckResult:
    slacks: list[tuple[float, dict]] = []
    for spec in machines:
        conv = to_convenient_form(spec)
        res = check_packing(conv, _strings_up_to(conv.alphabet, 3), m=30)
        slacks.append((res.worst_slack, res.witnesses))
    return _result("packing", slacks, tol=0.0)


def check_bridge(spec: TwoQcfa, x: str, y: str, m: int) -> CheckResult:
    """Acceptance within s steps never exceeds accept mass at crossing s, and
    the Markov bound on unhalted mass holds with the measured expected time.

    The first inequality holds because a branch accepting within s steps has
    crossed the x|y boundary fewer than s times when it halts, and halted
    branches keep their state in the crossing sequence; truncation at m >= s
    only removes accept mass.
    """
    w = x + y
    cap = m
    stats = exact_run(spec, w, cap)
    cs = crossing_sequence(spec, x, y, m, length=min(m, cap))
    profile = accept_profile(cs)
    slacks: list[tuple[float, dict]] = []
    for s in range(1, min(m, cap) + 1):
        lhs = float(stats.p_accept_by_step[s])
        rhs = profile[s - 1][spec.c_acc]
        slacks.append(
            (
                rhs + TOL - lhs,
                {"machine": spec.name, "x": x, "y": y, "m": m, "s": s,
                 "law": "acceptance-bridge", "lhs": lhs, "rhs": rhs},
            )
        )
        halted = float(stats.p_accept_by_step[s] + stats.p_reject_by_step[s])
        markov_rhs = stats.expected_time_lower / s
        slacks.append(
            (
                markov_rhs + TOL - (1.0 - halted),
                {"machine": spec.name, "x": x, "y": y, "s": s, "law": "markov",
                 "lhs": 1.0 - halted, "rhs": markov_rhs},
            )
        )
    return _result("bridge", slacks, tol=0.0)


def check_bridge_suite(machines: Sequence[TwoQcfa], config: VerifyConfig) -> CheckResult:
    slacks: list[tuple[float, dict]] = []
    for spec in machines:
        conv = to_convenient_form(spec)
        for x, y in (("", ""), ("a", "b"), ("ab", "ab"), ("aab", "bab")):
            res = check_bridge(conv, x, y, config.bridge_m)
            slacks.append((res.worst_slack, res.witnesses))
    return _result("bridge", slacks, tol=0.0)


def check_theorem_constant(
    spec: TwoQcfa, oracle: langs.LanguageOracle, n: int, step_cap: int = 400
) -> CheckResult:
    """Descriptive check of the running-time lower bound.

    Measures the machine's worst classification error eps on strings of
    length <= n via exact runs at the step cap; when eps < 1/2 the measured
    expected-time lower bound must be at least
    (1-2 eps)^2 / (16 sqrt(2) k^4 d^2) * D^(1/(k^4 d^2)).  Reported as
    not-applicable when eps >= 1/2 (the machine does not classify the
    language at this cap).
    """
    words = _strings_up_to(oracle.alphabet, n)
    eps = 0.0
    t_hat = 0.0
    for w in words:
        stats = exact_run(spec, w, step_cap)
        err = 1.0 - stats.p_accept if oracle(w) else stats.p_accept
        eps = max(eps, err)
        t_hat = max(t_hat, stats.expected_time_lower)
    if eps >= 0.5:
        return CheckResult(
            check_id="theorem-constant",
            instances=0,
            worst_slack=math.inf,
            witnesses={"machine": spec.name, "language": oracle.name,
                       "applicable": False, "epsilon": eps},
            passed=True,
        )
    h = spec.k**4 * spec.d**2
    d_value = nonregularity(oracle, n, mode="lower").d_lower
    rhs = (1 - 2 * eps) ** 2 / (16 * math.sqrt(2) * h) * d_value ** (1.0 / h)
    return _result(
        "theorem-constant",
        [
            (
                t_hat + TOL - rhs,
                {"machine": spec.name, "language": oracle.name, "applicable": True,
                 "epsilon": eps, "expected_time": t_hat, "lower_bound": rhs,
                 "d_value": d_value, "n": n},
            )
        ],
        tol=0.0,
    )


def check_hardness_monotonicity(config: VerifyConfig) -> CheckResult:
    """D_L(n) <= D_L(n+1) for every built-in oracle up to the horizon the
    string budget allows (larger alphabets cap out sooner).

    The mode is fixed per oracle across the whole horizon range: both the
    exact clique number and the same-length-classes lower bound are monotone
    in n, but an exact value at one horizon need not be below a lower bound
    at the next, so mixing modes would compare incomparable quantities.
    """
    slacks: list[tuple[float, dict]] = []
    from .hardness import count_up_to

    for name, oracle in langs.builtin_oracles().items():
        sigma = len(oracle.alphabet)
        top = max(
            (n for n in range(1, config.hardness_max_n + 1)
             if count_up_to(sigma, n) <= config.string_budget),
            default=0,
        )
        mode = "exact" if count_up_to(sigma, top) <= 600 else "lower"
        prev = None
        for n in range(1, top + 1):
            rep = nonregularity(oracle, n, mode=mode, string_budget=config.string_budget)
            d_value = rep.d_exact if mode == "exact" else rep.d_lower
            if prev is not None:
                slacks.append(
                    (
                        float(d_value - prev),
                        {"language": name, "n": n, "mode": mode, "d": d_value, "d_prev": prev},
                    )
                )
            prev = d_value
    return _result("hardness-monotonicity", slacks, tol=0.0)


def check_growth_inequalities(config: VerifyConfig) -> CheckResult:
    """Ball-size sanity plus the word-problem inequality D(2n) >= beta(n)."""
    slacks: list[tuple[float, dict]] = []
    for gname, group in langs.builtin_groups().items():
        table, _ = langs.growth(group, config.growth_radius + 2)
        for m, n in table.submultiplicative_pairs():
            slack = table.beta(m) * table.beta(n) - table.beta(m + n)
            slacks.append((float(slack), {"group": gname, "law": "submultiplicative",
                                          "m": m, "n": n}))
        cmp = langs.growth_vs_nonregularity(group, config.growth_radius)
        slacks.append(
            (
                float(cmp.d_lower - cmp.beta),
                {"group": gname, "law": "growth-vs-nonregularity",
                 "beta": cmp.beta, "d_lower": cmp.d_lower, "radius": cmp.radius},
            )
        )
    return _result("growth-inequalities", slacks, tol=0.0)


# ---------------------------------------------------------------------------
# The full suite
# ---------------------------------------------------------------------------


def run_all(config: VerifyConfig | None = None) -> list[CheckResult]:
    """Run every check; deterministic given the config seed.

    Checks run as independent jobs on a small thread pool; a check that
    raises is reported as a failed CheckResult carrying the traceback, never
    propagated.  Results are ordered by check id.
    """
    config = config or VerifyConfig()
    machines: list[TwoQcfa] = []
    load_failures: list[tuple[str, str]] = []
    if config.machine_paths:
        for path in config.machine_paths:
            try:
                machines.append(load_machine(path))
            except MachineFormatError as exc:
                load_failures.append((str(path), str(exc)))
    else:
        machines = fixture_machines()
    if not machines:
        machines = fixture_machines()
    pool = random_machine_pool(config)

    jobs: list[tuple[str, Callable[[], CheckResult]]] = [
        ("channel-laws", lambda: check_channel_laws(machines + pool, config, load_failures)),
        ("operator-vs-simulation", lambda: check_operator_vs_enumeration(machines, config)),
        ("structural-zeros", lambda: check_structural_zeros(machines, config)),
        ("crossing-distance", lambda: check_crossing_distance_suite(machines, config)),
        ("packing", lambda: check_packing_suite(machines, config)),
        ("bridge", lambda: check_bridge_suite(machines, config)),
        (
            "theorem-constant",
            lambda: check_theorem_constant(
                to_convenient_form(machines[0]), langs.builtin_oracles()["parity"], n=4
            ),
        ),
        ("hardness-monotonicity", lambda: check_hardness_monotonicity(config)),
        ("growth-inequalities", lambda: check_growth_inequalities(config)),
    ]

    def guarded(check_id: str, job: Callable[[], CheckResult]) -> CheckResult:
        try:
            return job()
        except Exception:
            return CheckResult(
                check_id=check_id,
                instances=0,
                worst_slack=-math.inf,
                witnesses={"error": traceback.format_exc(limit=20)},
                passed=False,
            )

    with ThreadPoolExecutor(max_workers=4) as pool_exec:
        futures = [(cid, pool_exec.submit(guarded, cid, job)) for cid, job in jobs]
        results = [f.result() for _, f in futures]
    return sorted(results, key=lambda r: r.check_id)


def summary_lines(results: Sequence[CheckResult]) -> list[str]:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        slack = "inf" if math.isinf(r.worst_slack) else f"{r.worst_slack:.3e}"
        lines.append(f"{status}  {r.check_id:<26} instances={r.instances:<5} worst_slack={slack}")
    return lines
