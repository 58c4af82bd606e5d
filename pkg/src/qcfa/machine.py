"""Two-way finite automata with quantum and classical states (2QCFA).

A machine is a 10-tuple (Q, C, Sigma, R, theta, delta, q_start, c_start,
c_acc, c_rej): a two-way DFA over Sigma plus end-markers, augmented with a
quantum register of |Q| basis states.  Each step applies the selective
quantum operation theta(c, sigma) to the register, observes a result r, and
then updates the classical state and head position via delta(c, sigma, r).

This module provides the machine data model, a JSON description format,
the convenient-form normalization (prepend a right sweep then a left sweep
before the original computation), an exact ensemble simulator, and a seeded
Monte Carlo simulator.
"""

from __future__ import annotations

import ast
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .quantum import (
    TRACE_TOL,
    ZERO_TOL,
    KrausFamily,
    as_complex_matrix,
    check_completeness,
    dagger,
)

logger = logging.getLogger(__name__)

LEFT_MARKER = "#L"
RIGHT_MARKER = "#R"

MOVES = (-1, 0, 1)


class MachineFormatError(ValueError):
    """Raised when a machine description violates the schema or invariants."""


# ---------------------------------------------------------------------------
# Amplitude expression grammar: decimal literals, pi, named constants,
# sqrt/sin/cos, + - * /, unary minus, parentheses.
# ---------------------------------------------------------------------------

_FUNCTIONS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos}


def evaluate_expression(text: str, constants: Mapping[str, float] | None = None) -> float:
    """Evaluate an amplitude expression to a double."""
    names = {"pi": math.pi}
    if constants:
        names.update(constants)

    def ev(node) -> float:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                return float(names[node.id])
            raise MachineFormatError(f"unknown name {node.id!r} in expression {text!r}")
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            return left / right
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            val = ev(node.operand)
            return val if isinstance(node.op, ast.UAdd) else -val
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            fn = _FUNCTIONS.get(node.func.id)
            if fn is None or node.keywords or len(node.args) != 1:
                raise MachineFormatError(f"unsupported call in expression {text!r}")
            return fn(ev(node.args[0]))
        raise MachineFormatError(f"unsupported syntax in expression {text!r}")

    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise MachineFormatError(f"cannot parse expression {text!r}: {exc}") from exc
    return ev(tree)


def _entry_to_complex(entry, constants) -> complex:
    if isinstance(entry, str):
        return complex(evaluate_expression(entry, constants), 0.0)
    if isinstance(entry, (int, float)):
        raise MachineFormatError(
            f"bare number {entry!r}: matrix entries must be [re, im] pairs or expression strings"
        )
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        re_part, im_part = entry
        re_val = evaluate_expression(re_part, constants) if isinstance(re_part, str) else float(re_part)
        im_val = evaluate_expression(im_part, constants) if isinstance(im_part, str) else float(im_part)
        return complex(re_val, im_val)
    raise MachineFormatError(f"bad matrix entry {entry!r}")


def _parse_matrix(rows, constants) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise MachineFormatError(f"bad matrix {rows!r}")
    data = [[_entry_to_complex(e, constants) for e in row] for row in rows]
    return as_complex_matrix(data)


# ---------------------------------------------------------------------------
# Machine data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoQcfa:
    """An immutable, fully validated 2QCFA."""

    name: str
    quantum_states: tuple[str, ...]
    classical_states: tuple[str, ...]
    alphabet: tuple[str, ...]
    results: tuple[str, ...]
    theta: Mapping[tuple[str, str], KrausFamily]
    delta: Mapping[tuple[str, str, str], tuple[str, int]]
    q_start: str
    c_start: str
    c_acc: str
    c_rej: str
    convenient: bool = False

    def __post_init__(self):
        for seq, label in (
            (self.quantum_states, "quantum states"),
            (self.classical_states, "classical states"),
            (self.alphabet, "alphabet"),
            (self.results, "results"),
        ):
            if len(set(seq)) != len(seq) or not seq:
                raise MachineFormatError(f"{label} must be nonempty and distinct")
        if LEFT_MARKER in self.alphabet or RIGHT_MARKER in self.alphabet:
            raise MachineFormatError("end-markers may not appear in the input alphabet")
        if self.q_start not in self.quantum_states:
            raise MachineFormatError(f"unknown q_start {self.q_start!r}")
        for c in (self.c_start, self.c_acc, self.c_rej):
            if c not in self.classical_states:
                raise MachineFormatError(f"unknown classical state {c!r}")
        if self.c_acc == self.c_rej:
            raise MachineFormatError("accept and reject states must differ")

        k = len(self.quantum_states)
        bound = k * k
        for c in self.nonhalting_states:
            for sigma in self.tape_symbols:
                fam = self.theta.get((c, sigma))
                if fam is None:
                    raise MachineFormatError(f"missing transition for state {c!r} on {sigma!r}")
                if fam.dim != k:
                    raise MachineFormatError(
                        f"transition ({c!r}, {sigma!r}): operator dimension {fam.dim} != |Q| = {k}"
                    )
                if fam.index_bound != bound:
                    raise MachineFormatError(
                        f"transition ({c!r}, {sigma!r}): Kraus index bound must be |Q|^2 = {bound}"
                    )
                if tuple(fam.results) != self.results:
                    raise MachineFormatError(
                        f"transition ({c!r}, {sigma!r}): results do not match the machine's result set"
                    )
                ok, residual = check_completeness(fam)
                if not ok:
                    raise MachineFormatError(
                        f"transition ({c!r}, {sigma!r}) is not a valid quantum operation "
                        f"(completeness residual {residual:.3e})"
                    )
                for r in self.results:
                    move = self.delta.get((c, sigma, r))
                    if move is None:
                        raise MachineFormatError(
                            f"missing classical action for ({c!r}, {sigma!r}, {r!r})"
                        )
                    nxt, d = move
                    if nxt not in self.classical_states or d not in MOVES:
                        raise MachineFormatError(f"bad classical action {move!r} for ({c!r}, {sigma!r}, {r!r})")
                    if sigma == LEFT_MARKER and d == -1:
                        raise MachineFormatError(
                            f"({c!r}, {LEFT_MARKER}, {r!r}) moves left off the left end-marker"
                        )
                    if sigma == RIGHT_MARKER and d == 1:
                        raise MachineFormatError(
                            f"({c!r}, {RIGHT_MARKER}, {r!r}) moves right off the right end-marker"
                        )
        object.__setattr__(self, "theta", dict(self.theta))
        object.__setattr__(self, "delta", dict(self.delta))

    @property
    def k(self) -> int:
        return len(self.quantum_states)

    @property
    def d(self) -> int:
        return len(self.classical_states)

    @property
    def tape_symbols(self) -> tuple[str, ...]:
        return self.alphabet + (LEFT_MARKER, RIGHT_MARKER)

    @property
    def nonhalting_states(self) -> tuple[str, ...]:
        return tuple(c for c in self.classical_states if c not in (self.c_acc, self.c_rej))

    def is_halting(self, c: str) -> bool:
        return c in (self.c_acc, self.c_rej)

    def q_index(self, q: str) -> int:
        return self.quantum_states.index(q)

    def c_index(self, c: str) -> int:
        return self.classical_states.index(c)

    def check_input(self, w: str) -> None:
        bad = set(w) - set(self.alphabet)
        if bad:
            raise ValueError(f"input contains symbols outside the alphabet: {sorted(bad)}")


def _identity_family(spec_results: tuple[str, ...], k: int) -> KrausFamily:
    return KrausFamily(spec_results, {spec_results[0]: (np.eye(k),)}, k * k)


def load_machine(source, constants: Mapping[str, float] | None = None) -> TwoQcfa:
    """Load and validate a machine description.

    ``source`` is a path to a UTF-8 JSON document or an already-parsed dict.
    A document may declare named ``constants`` (expression strings); entries
    in ``constants`` passed here override them, which is how parameterized
    fixtures are instantiated.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise MachineFormatError(f"machine file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise MachineFormatError(f"{path}: invalid JSON ({exc})") from exc
        name = doc.get("name", path.stem)
    else:
        doc = source
        name = doc.get("name", "machine")

    required = [
        "quantum_states", "classical_states", "alphabet", "results",
        "q_start", "c_start", "c_acc", "c_rej", "transitions",
    ]
    missing = [key for key in required if key not in doc]
    if missing:
        raise MachineFormatError(f"{name}: missing fields {missing}")

    consts: dict[str, float] = {}
    for cname, expr in doc.get("constants", {}).items():
        consts[cname] = evaluate_expression(expr, consts) if isinstance(expr, str) else float(expr)
    if constants:
        consts.update({cname: float(v) for cname, v in constants.items()})

    quantum_states = tuple(doc["quantum_states"])
    results = tuple(doc["results"])
    k = len(quantum_states)

    theta: dict[tuple[str, str], KrausFamily] = {}
    delta: dict[tuple[str, str, str], tuple[str, int]] = {}
    for entry in doc["transitions"]:
        c, sigma = entry.get("state"), entry.get("symbol")
        if c is None or sigma is None:
            raise MachineFormatError(f"{name}: transition missing 'state' or 'symbol': {entry}")
        key = (c, sigma)
        if key in theta:
            raise MachineFormatError(f"{name}: duplicate transition for ({c!r}, {sigma!r})")
        ops = {
            r: tuple(_parse_matrix(m, consts) for m in mats)
            for r, mats in entry.get("kraus", {}).items()
        }
        try:
            fam = KrausFamily(results, ops, k * k)
        except ValueError as exc:
            raise MachineFormatError(f"{name}: transition ({c!r}, {sigma!r}): {exc}") from exc
        theta[key] = fam
        for r, action in entry.get("delta", {}).items():
            delta[(c, sigma, r)] = (action["next"], int(action["move"]))

    try:
        return TwoQcfa(
            name=name,
            quantum_states=quantum_states,
            classical_states=tuple(doc["classical_states"]),
            alphabet=tuple(doc["alphabet"]),
            results=results,
            theta=theta,
            delta=delta,
            q_start=doc["q_start"],
            c_start=doc["c_start"],
            c_acc=doc["c_acc"],
            c_rej=doc["c_rej"],
        )
    except MachineFormatError:
        raise
    except ValueError as exc:
        raise MachineFormatError(f"{name}: {exc}") from exc


def fixture_path(name: str) -> Path:
    """Path of a machine description shipped with the package."""
    return Path(__file__).parent / "fixtures" / f"{name}.json"


def to_convenient_form(spec: TwoQcfa) -> TwoQcfa:
    """Prepend a right sweep to #R and a left sweep back to #L.

    The returned machine first moves its head to the right end-marker, then
    back to the left end-marker, applying trivial quantum operations along
    the way, and from that point behaves exactly like the original machine.
    Acceptance probabilities are preserved exactly; every halting time grows
    by exactly 2(|w|+1) steps on input w.  The left-sweep state reacts to the
    left end-marker by performing the original start transition directly,
    which is what makes the overhead exactly two sweeps.
    """
    existing = set(spec.classical_states)
    sweep_r, sweep_l = "sweep_r", "sweep_l"
    while sweep_r in existing or sweep_l in existing:
        sweep_r += "~"
        sweep_l += "~"
    if (sweep_r, sweep_l) != ("sweep_r", "sweep_l"):
        logger.warning("sweep state names collided with machine states; renamed to %r/%r", sweep_r, sweep_l)

    k = len(spec.quantum_states)
    ident = _identity_family(spec.results, k)
    theta = dict(spec.theta)
    delta = dict(spec.delta)
    for sigma in spec.tape_symbols:
        if sigma != RIGHT_MARKER:
            theta[(sweep_r, sigma)] = ident
            for r in spec.results:
                delta[(sweep_r, sigma, r)] = (sweep_r, 1)
        if sigma != LEFT_MARKER:
            theta[(sweep_l, sigma)] = ident
            for r in spec.results:
                delta[(sweep_l, sigma, r)] = (sweep_l, -1)
    theta[(sweep_r, RIGHT_MARKER)] = ident
    for r in spec.results:
        delta[(sweep_r, RIGHT_MARKER, r)] = (sweep_l, -1)
    if spec.is_halting(spec.c_start):
        # Degenerate machine that halts immediately; one extra step.
        theta[(sweep_l, LEFT_MARKER)] = ident
        for r in spec.results:
            delta[(sweep_l, LEFT_MARKER, r)] = (spec.c_start, 0)
    else:
        theta[(sweep_l, LEFT_MARKER)] = spec.theta[(spec.c_start, LEFT_MARKER)]
        for r in spec.results:
            delta[(sweep_l, LEFT_MARKER, r)] = spec.delta[(spec.c_start, LEFT_MARKER, r)]

    return TwoQcfa(
        name=spec.name + "+sweeps",
        quantum_states=spec.quantum_states,
        classical_states=spec.classical_states + (sweep_r, sweep_l),
        alphabet=spec.alphabet,
        results=spec.results,
        theta=theta,
        delta=delta,
        q_start=spec.q_start,
        c_start=sweep_r,
        c_acc=spec.c_acc,
        c_rej=spec.c_rej,
        convenient=True,
    )


# ---------------------------------------------------------------------------
# Simulators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunStatistics:
    """Per-step cumulative halting probabilities of a run.

    ``p_accept_by_step[t]`` is the probability of having accepted within t
    steps (index 0 is before the first step), likewise for rejection;
    ``p_running`` is the residual mass still unhalted at the cap.  Since the
    machine may reject by looping, ``expected_time_lower`` is a lower bound:
    the halting-time expectation with the residual charged at the cap.
    """

    input: str
    p_accept_by_step: np.ndarray
    p_reject_by_step: np.ndarray
    p_running: float
    expected_time_lower: float
    step_cap: int
    trials: int | None = None

    def __post_init__(self):
        acc, rej = np.asarray(self.p_accept_by_step), np.asarray(self.p_reject_by_step)
        if np.any(np.diff(acc) < -TRACE_TOL) or np.any(np.diff(rej) < -TRACE_TOL):
            raise ValueError("cumulative halting probabilities must be nondecreasing")

    @property
    def p_accept(self) -> float:
        return float(self.p_accept_by_step[-1])

    @property
    def p_reject(self) -> float:
        return float(self.p_reject_by_step[-1])


def tape_of(spec: TwoQcfa, w: str) -> list[str]:
    return [LEFT_MARKER, *w, RIGHT_MARKER]


def iter_exact_run(
    spec: TwoQcfa, w: str, step_cap: int
) -> Iterator[tuple[int, dict[tuple[str, int], np.ndarray], float, float]]:
    """Exact ensemble evolution on the full tape, one step at a time.

    Yields (t, blocks, p_accept, p_reject) where ``blocks`` maps (classical
    state, head position) to the unnormalized quantum block of that branch
    group; block traces are branch probabilities.  Halting states are
    absorbing: their blocks are frozen.  Yields the initial configuration at
    t = 0, then after each of the ``step_cap`` steps.
    """
    spec.check_input(w)
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    tape = tape_of(spec, w)
    k = spec.k
    q0 = spec.q_index(spec.q_start)
    start = np.zeros((k, k), dtype=np.complex128)
    start[q0, q0] = 1.0
    blocks: dict[tuple[str, int], np.ndarray] = {(spec.c_start, 0): start}

    def halted_mass(which: str) -> float:
        return float(
            sum(np.trace(b).real for (c, _), b in blocks.items() if c == which)
        )

    yield 0, blocks, halted_mass(spec.c_acc), halted_mass(spec.c_rej)
    for t in range(1, step_cap + 1):
        nxt: dict[tuple[str, int], np.ndarray] = {}

        def deposit(c, h, mat):
            key = (c, h)
            if key in nxt:
                nxt[key] = nxt[key] + mat
            else:
                nxt[key] = mat

        for (c, h), block in blocks.items():
            if spec.is_halting(c):
                deposit(c, h, block)
                continue
            sigma = tape[h]
            fam = spec.theta[(c, sigma)]
            for r in spec.results:
                image = fam.result_map(r, block)
                if not image.any():
                    continue
                c2, move = spec.delta[(c, sigma, r)]
                deposit(c2, h + move, image)
        blocks = nxt
        yield t, blocks, halted_mass(spec.c_acc), halted_mass(spec.c_rej)


def exact_run(spec: TwoQcfa, w: str, step_cap: int) -> RunStatistics:
    """Exact cumulative accept/reject probabilities per step.

    Running out of steps is not an error; the residual mass is reported and
    charged at the cap in the expected-time lower bound.
    """
    acc = np.zeros(step_cap + 1)
    rej = np.zeros(step_cap + 1)
    for t, _, p_acc, p_rej in iter_exact_run(spec, w, step_cap):
        acc[t] = p_acc
        rej[t] = p_rej
    halted = acc + rej
    expected = float(np.sum(np.arange(1, step_cap + 1) * np.diff(halted)))
    p_running = float(max(0.0, 1.0 - halted[-1]))
    expected += step_cap * p_running
    return RunStatistics(
        input=w,
        p_accept_by_step=acc,
        p_reject_by_step=rej,
        p_running=p_running,
        expected_time_lower=expected,
        step_cap=step_cap,
    )


def monte_carlo_run(
    spec: TwoQcfa, w: str, trials: int, step_cap: int, seed: int
) -> RunStatistics:
    """Sampled runs with a seeded counter-based generator (Philox).

    Each trial tracks one probabilistic branch: the register's density
    operator, the classical state, and the head; measurement results are
    sampled per step.  Deterministic given the seed.
    """
    spec.check_input(w)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tape = tape_of(spec, w)
    rng = np.random.Generator(np.random.Philox(seed))
    k = spec.k
    q0 = spec.q_index(spec.q_start)

    acc_counts = np.zeros(step_cap + 1, dtype=np.int64)
    rej_counts = np.zeros(step_cap + 1, dtype=np.int64)
    halt_steps = np.zeros(trials)
    for trial in range(trials):
        a = np.zeros((k, k), dtype=np.complex128)
        a[q0, q0] = 1.0
        c, h = spec.c_start, 0
        halted_at = step_cap
        for t in range(1, step_cap + 1):
            if spec.is_halting(c):
                break
            fam = spec.theta[(c, tape[h])]
            images = [fam.result_map(r, a) for r in spec.results]
            probs = np.array([max(np.trace(m).real, 0.0) for m in images])
            probs = probs / probs.sum()
            idx = rng.choice(len(probs), p=probs)
            if probs[idx] > ZERO_TOL:
                a = images[idx] / probs[idx]
            c, move = spec.delta[(c, tape[h], spec.results[idx])]
            h += move
            if spec.is_halting(c):
                halted_at = t
                if c == spec.c_acc:
                    acc_counts[t:] += 1
                else:
                    rej_counts[t:] += 1
                break
        halt_steps[trial] = halted_at

    acc = acc_counts / trials
    rej = rej_counts / trials
    return RunStatistics(
        input=w,
        p_accept_by_step=acc,
        p_reject_by_step=rej,
        p_running=float(1.0 - acc[-1] - rej[-1]),
        expected_time_lower=float(halt_steps.mean()),
        step_cap=step_cap,
        trials=trials,
    )
