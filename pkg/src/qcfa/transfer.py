"""Truncated transfer operators and crossing sequences.

A 2QCFA computing on a tape region (the prefix #L x, or the suffix y #R)
can be followed with ensembles in *classical-diagonal block form*: operators
on quantum (x) classical (x) head space whose classical and head indices
agree on bra and ket.  A single computation step, the truncation that forces
still-running branches to reject, and the head trace are all linear maps
preserving that subspace, so we store them as matrices over the basis
|q><q'| (x) |c><c| (x) |h><h|.

The m-truncated transfer operator of a region maps the ensemble entering the
region to the ensemble leaving it, with branches exceeding m steps forced to
reject: trace out the head after (truncate . step^m . inject).  Alternating
the prefix operator and the suffix operator from the machine's start
configuration yields the crossing sequence at the x|y boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .machine import LEFT_MARKER, RIGHT_MARKER, TwoQcfa
from .quantum import (
    CHANNEL_TOL,
    ZERO_TOL,
    SuperOperator,
    dagger,
    schatten_norm,
)

Blocks = dict[tuple[str, int], np.ndarray]


@dataclass(frozen=True)
class _Region:
    """A tape region with its head coordinates.

    ``symbols[h]`` is the tape symbol at position h (None at the exit cell,
    which lies just outside the region); ``active`` are the positions where
    the machine keeps computing; a branch leaves the region by stepping onto
    ``exit_pos``.  ``inject_pos`` is where entering ensembles are placed.
    """

    spec: TwoQcfa
    text: str
    symbols: tuple[str | None, ...]
    active: frozenset[int]
    exit_pos: int
    inject_pos: int
    side: str

    @property
    def positions(self) -> int:
        return len(self.symbols)


def prefix_region(spec: TwoQcfa, x: str) -> _Region:
    """Region for the prefix #L x; position 0 is #L, |x|+1 the exit."""
    spec.check_input(x)
    symbols: tuple[str | None, ...] = (LEFT_MARKER, *x, None)
    return _Region(
        spec=spec,
        text=x,
        symbols=symbols,
        active=frozenset(range(len(x) + 1)),
        exit_pos=len(x) + 1,
        inject_pos=len(x),
        side="prefix",
    )


def suffix_region(spec: TwoQcfa, y: str) -> _Region:
    """Region for the suffix y #R; position 0 is the exit, |y|+1 is #R."""
    spec.check_input(y)
    symbols: tuple[str | None, ...] = (None, *y, RIGHT_MARKER)
    return _Region(
        spec=spec,
        text=y,
        symbols=symbols,
        active=frozenset(range(1, len(y) + 2)),
        exit_pos=0,
        inject_pos=1,
        side="suffix",
    )


# The public prefix/suffix context names for callers.
PrefixContext = prefix_region
SuffixContext = suffix_region


# ---------------------------------------------------------------------------
# Linear dynamics on the classical-diagonal subspace
# ---------------------------------------------------------------------------


class _Engine:
    """Matrices realizing step/truncate/inject/head-trace for one region.

    Flat index of a classical-diagonal basis element |q><q'| (x) |c><c| (x)
    |h><h| is ((c * positions + h) * k + q) * k + q'.  The block matrices
    below act on that coordinate vector.
    """

    def __init__(self, region: _Region):
        self.region = region
        spec = region.spec
        self.k = spec.k
        self.d = spec.d
        self.n_pos = region.positions
        self.dim = self.k * self.k * self.d * self.n_pos
        self.io_dim = self.k * self.k * self.d  # head traced out

    def slot(self, c_idx: int, h: int) -> int:
        return (c_idx * self.n_pos + h) * self.k * self.k

    def io_slot(self, c_idx: int) -> int:
        return c_idx * self.k * self.k

    def step_matrix(self) -> np.ndarray:
        region, spec, k = self.region, self.region.spec, self.k
        kk = k * k
        s = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for c_idx, c in enumerate(spec.classical_states):
            for h in range(self.n_pos):
                col = self.slot(c_idx, h)
                halted_or_exited = spec.is_halting(c) or h not in region.active
                if halted_or_exited:
                    s[col : col + kk, col : col + kk] = np.eye(kk)
                    continue
                sigma = region.symbols[h]
                fam = spec.theta[(c, sigma)]
                for r in spec.results:
                    ops = fam.operators(r)
                    if not ops:
                        continue
                    block = np.zeros((kk, kk), dtype=np.complex128)
                    for e in ops:
                        block += np.kron(e.conj(), e)
                    c2, move = spec.delta[(c, sigma, r)]
                    row = self.slot(spec.c_index(c2), h + move)
                    s[row : row + kk, col : col + kk] += block
        return s

    def truncation_matrix(self) -> np.ndarray:
        region, spec = self.region, self.region.spec
        kk = self.k * self.k
        rej = spec.c_index(spec.c_rej)
        t = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for c_idx, c in enumerate(spec.classical_states):
            for h in range(self.n_pos):
                col = self.slot(c_idx, h)
                if not spec.is_halting(c) and h in region.active:
                    row = self.slot(rej, h)
                else:
                    row = col
                t[row : row + kk, col : col + kk] += np.eye(kk)
        return t

    def inject_matrix(self) -> np.ndarray:
        kk = self.k * self.k
        m = np.zeros((self.dim, self.io_dim), dtype=np.complex128)
        for c_idx in range(self.d):
            row = self.slot(c_idx, self.region.inject_pos)
            col = self.io_slot(c_idx)
            m[row : row + kk, col : col + kk] = np.eye(kk)
        return m

    def head_trace_matrix(self) -> np.ndarray:
        kk = self.k * self.k
        m = np.zeros((self.io_dim, self.dim), dtype=np.complex128)
        for c_idx in range(self.d):
            row = self.io_slot(c_idx)
            for h in range(self.n_pos):
                col = self.slot(c_idx, h)
                m[row : row + kk, col : col + kk] += np.eye(kk)
        return m

    # Conversions between block dictionaries and flat coordinate vectors.

    def blocks_to_vec(self, blocks: Blocks) -> np.ndarray:
        spec, kk = self.region.spec, self.k * self.k
        v = np.zeros(self.dim, dtype=np.complex128)
        for (c, h), mat in blocks.items():
            mat = np.asarray(mat, dtype=np.complex128)
            if mat.shape != (self.k, self.k):
                raise ValueError(f"block at ({c!r}, {h}) has shape {mat.shape}, expected ({self.k}, {self.k})")
            if not 0 <= h < self.n_pos:
                raise ValueError(f"head position {h} outside region")
            base = self.slot(spec.c_index(c), h)
            v[base : base + kk] = mat.reshape(-1)
        return v

    def vec_to_blocks(self, v: np.ndarray, tol: float = 0.0) -> Blocks:
        spec, k = self.region.spec, self.k
        out: Blocks = {}
        for c_idx, c in enumerate(spec.classical_states):
            for h in range(self.n_pos):
                base = self.slot(c_idx, h)
                mat = v[base : base + k * k].reshape(k, k)
                if np.abs(mat).max() > tol:
                    out[(c, h)] = mat
        return out


def single_step(region: _Region, blocks: Blocks) -> Blocks:
    """One computation step of the machine within the region.

    Blocks in halting classical states and blocks at the exit cell are fixed
    points; every other block evolves by the machine's transition function.
    The total trace is preserved.
    """
    eng = _Engine(region)
    return eng.vec_to_blocks(eng.step_matrix() @ eng.blocks_to_vec(blocks))


def truncate(region: _Region, blocks: Blocks) -> Blocks:
    """Force every still-computing block to the reject state (in place on h)."""
    eng = _Engine(region)
    return eng.vec_to_blocks(eng.truncation_matrix() @ eng.blocks_to_vec(blocks))


def check_step_channel(region: _Region) -> tuple[bool, float]:
    """Verify the single-step dynamics is trace preserving.

    The step's Kraus operators respect the (c, h) block structure, so
    completeness of the whole-space family reduces to per-block completeness
    of each theta(c, symbol(h)); the residual is the Frobenius norm of the
    full deviation from the identity.
    """
    spec, k = region.spec, region.spec.k
    total_sq = 0.0
    for c in spec.classical_states:
        if spec.is_halting(c):
            continue
        for h in region.active:
            fam = spec.theta[(c, region.symbols[h])]
            acc = np.zeros((k, k), dtype=np.complex128)
            for r in spec.results:
                for e in fam.operators(r):
                    acc += dagger(e) @ e
            total_sq += schatten_norm(acc - np.eye(k), 2) ** 2
    residual = float(np.sqrt(total_sq))
    return residual <= CHANNEL_TOL, residual


# ---------------------------------------------------------------------------
# Transfer operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferOperator:
    """The m-truncated transfer operator of a region, as an action matrix.

    The matrix acts on coordinates over the classical-diagonal basis
    |q><q'| (x) |c><c| of the quantum (x) classical space (head traced out);
    flat index (c*k + q)*k + q'.  It is the restriction of a quantum channel
    whose remaining matrix entries are structurally zero, so the full
    superoperator is recovered by zero padding (:meth:`to_super`).
    """

    spec: TwoQcfa
    text: str
    side: str
    m: int
    action: np.ndarray

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def d(self) -> int:
        return self.spec.d

    def basis_labels(self) -> list[tuple[str, str, str]]:
        """(q, q', c) labels matching the action matrix coordinates."""
        return [
            (q, q2, c)
            for c in self.spec.classical_states
            for q in self.spec.quantum_states
            for q2 in self.spec.quantum_states
        ]

    def index(self, q_idx: int, q2_idx: int, c_idx: int) -> int:
        return (c_idx * self.k + q_idx) * self.k + q2_idx

    def apply_blocks(self, blocks: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
        """Apply to a classical-diagonal operator given as {state: block}."""
        k = self.k
        v = np.zeros(self.k * self.k * self.d, dtype=np.complex128)
        for c, mat in blocks.items():
            c_idx = self.spec.c_index(c)
            v[c_idx * k * k : (c_idx + 1) * k * k] = np.asarray(mat, dtype=np.complex128).reshape(-1)
        out = self.action @ v
        return {
            c: out[i * k * k : (i + 1) * k * k].reshape(k, k)
            for i, c in enumerate(self.spec.classical_states)
        }

    def to_super(self) -> SuperOperator:
        """Zero-padded full superoperator on the quantum (x) classical space.

        Inputs |q1 c1><q1' c1'| with c1 != c1' are annihilated and outputs
        never have mismatched classical indices, so padding with zeros gives
        the exact full-space channel.
        """
        k, d = self.k, self.d
        kd = k * d
        full = np.zeros((kd * kd, kd * kd), dtype=np.complex128)
        for c1 in range(d):
            for q1 in range(k):
                for q1p in range(k):
                    col_out = self.action[:, self.index(q1, q1p, c1)]
                    # Full-space vec column for input |q1 c1><q1' c1|.
                    i_full = q1 * d + c1
                    j_full = q1p * d + c1
                    col_idx = j_full * kd + i_full
                    for c2 in range(d):
                        for q2 in range(k):
                            for q2p in range(k):
                                val = col_out[self.index(q2, q2p, c2)]
                                if val == 0:
                                    continue
                                r_full = q2 * d + c2
                                s_full = q2p * d + c2
                                full[s_full * kd + r_full, col_idx] = val
        return SuperOperator(full, kd, kd)

    def classical_transition(self) -> np.ndarray:
        """d x d matrix of trace flow: entry [c2, c1] = Tr of block c2 of the
        image of the maximally mixed block at c1."""
        k = self.k
        flow = np.zeros((self.d, self.d))
        for c1_idx, c1 in enumerate(self.spec.classical_states):
            image = self.apply_blocks({c1: np.eye(k) / k})
            for c2_idx, c2 in enumerate(self.spec.classical_states):
                flow[c2_idx, c1_idx] = float(np.trace(image[c2]).real)
        return flow

    def to_json_dict(self) -> dict:
        return {
            "machine": self.spec.name,
            "side": self.side,
            "text": self.text,
            "m": self.m,
            "basis": [list(t) for t in self.basis_labels()],
            "action": [
                [[float(z.real), float(z.imag)] for z in row] for row in self.action
            ],
        }


def _build_transfer(region: _Region, m: int) -> TransferOperator:
    if m < 0:
        raise ValueError("truncation bound m must be >= 0")
    eng = _Engine(region)
    step = eng.step_matrix()
    mat = eng.inject_matrix()
    for _ in range(m):
        mat = step @ mat
    mat = eng.head_trace_matrix() @ (eng.truncation_matrix() @ mat)
    return TransferOperator(
        spec=region.spec, text=region.text, side=region.side, m=m, action=mat
    )


def transfer_operator(region: _Region, m: int) -> TransferOperator:
    """The m-truncated transfer operator of the given region.

    Injects each classical-diagonal basis element at the region's entry
    cell, runs m steps, truncates still-running branches to reject, and
    traces out the head.
    """
    return _build_transfer(region, m)


def dual_transfer_operator(spec: TwoQcfa, y: str, m: int) -> TransferOperator:
    """Transfer operator for the suffix y #R (entry at its leftmost cell)."""
    return _build_transfer(suffix_region(spec, y), m)


# ---------------------------------------------------------------------------
# Crossing sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossingSequence:
    """Ensembles observed at successive crossings of the x|y boundary.

    ``entries[i]`` is the classical-diagonal density operator (as a
    (d, k, k) block array) describing all branches at their (i+1)-st
    boundary crossing; halted branches keep "crossing" in their halting
    state and branches exceeding m steps between crossings are forced to
    reject.
    """

    spec: TwoQcfa
    x: str
    y: str
    m: int
    entries: tuple[np.ndarray, ...]

    def block_dict(self, i: int) -> dict[str, np.ndarray]:
        """Blocks of the i-th entry (1-based crossing index) by state name."""
        arr = self.entries[i - 1]
        return {c: arr[j] for j, c in enumerate(self.spec.classical_states)}

    def classical_marginal(self, i: int) -> dict[str, float]:
        arr = self.entries[i - 1]
        return {
            c: float(np.trace(arr[j]).real)
            for j, c in enumerate(self.spec.classical_states)
        }

    def to_json_dict(self) -> dict:
        return {
            "machine": self.spec.name,
            "x": self.x,
            "y": self.y,
            "m": self.m,
            "states": list(self.spec.classical_states),
            "entries": [
                [
                    [[float(z.real), float(z.imag)] for z in row]
                    for block in entry
                    for row in block
                ]
                for entry in self.entries
            ],
        }


def start_operator(spec: TwoQcfa) -> np.ndarray:
    """|q_start><q_start| (x) |c_start><c_start| as a (d, k, k) block array."""
    k, d = spec.k, spec.d
    z = np.zeros((d, k, k), dtype=np.complex128)
    q0 = spec.q_index(spec.q_start)
    z[spec.c_index(spec.c_start), q0, q0] = 1.0
    return z


def _apply_to_array(op: TransferOperator, z: np.ndarray) -> np.ndarray:
    k, d = op.k, op.d
    out = op.action @ z.reshape(d * k * k)
    return out.reshape(d, k, k)


def crossing_sequence(
    spec: TwoQcfa, x: str, y: str, m: int, length: int
) -> CrossingSequence:
    """The m-truncated crossing sequence of the machine on the split input xy.

    Requires a machine in convenient form (built by
    :func:`qcfa.machine.to_convenient_form`), so that the first crossing is
    the pure start configuration; entries alternate between applying the
    suffix operator (even indices) and the prefix operator (odd indices).
    """
    if not spec.convenient:
        raise ValueError(
            "crossing sequences are defined for machines in convenient form; "
            "apply to_convenient_form first"
        )
    if length < 1:
        raise ValueError("length must be >= 1")
    fwd = transfer_operator(prefix_region(spec, x), m)
    bwd = dual_transfer_operator(spec, y, m)
    entries = [start_operator(spec)]
    for i in range(2, length + 1):
        op = bwd if i % 2 == 0 else fwd
        entries.append(_apply_to_array(op, entries[-1]))
    return CrossingSequence(spec=spec, x=x, y=y, m=m, entries=tuple(entries))


def accept_profile(cs: CrossingSequence) -> list[dict[str, float]]:
    """Classical-state marginals per crossing index (1-based list order)."""
    return [cs.classical_marginal(i) for i in range(1, len(cs.entries) + 1)]


def crossing_distances(a: CrossingSequence, b: CrossingSequence) -> list[float]:
    """Trace distances between paired entries of two crossing sequences."""
    if len(a.entries) != len(b.entries):
        raise ValueError("crossing sequences have different lengths")
    dists = []
    for za, zb in zip(a.entries, b.entries):
        diff = _blocks_to_dense(za) - _blocks_to_dense(zb)
        dists.append(schatten_norm(diff, 1))
    return dists


def _blocks_to_dense(z: np.ndarray) -> np.ndarray:
    """Expand (d, k, k) classical-diagonal blocks to a dense kd x kd matrix
    in the quantum (x) classical index convention (q*d + c)."""
    d, k, _ = z.shape
    out = np.zeros((k * d, k * d), dtype=np.complex128)
    for c in range(d):
        for q1 in range(k):
            for q2 in range(k):
                out[q1 * d + c, q2 * d + c] = z[c, q1, q2]
    return out


# ---------------------------------------------------------------------------
# Feature embedding
# ---------------------------------------------------------------------------


def feature_vector(op: TransferOperator) -> np.ndarray:
    """Real vector of length k^4 d^2 encoding the operator without redundancy.

    The potentially nonzero matrix elements of the operator's Choi matrix
    are <q2 c2| Op(|q1 c1><q1' c1|) |q2' c2>.  Those with (q1, q2) equal to
    (q1', q2') are real and listed first; the rest come in conjugate pairs
    under swapping, so one member per pair is stored as (re, im).  Its
    Euclidean norm is at most k^2 d for any channel of this structure.
    """
    k, d = op.k, op.d
    entries: list[float] = []
    for q1 in range(k):
        for q2 in range(k):
            for c1 in range(d):
                for c2 in range(d):
                    val = op.action[op.index(q2, q2, c2), op.index(q1, q1, c1)]
                    entries.append(float(val.real))
    for q1 in range(k):
        for q1p in range(k):
            for q2 in range(k):
                for q2p in range(k):
                    if not (q1p > q1 or (q1p == q1 and q2p > q2)):
                        continue
                    for c1 in range(d):
                        for c2 in range(d):
                            val = op.action[op.index(q2, q2p, c2), op.index(q1, q1p, c1)]
                            entries.append(float(val.real))
                            entries.append(float(val.imag))
    vec = np.array(entries)
    assert vec.size == k**4 * d**2
    return vec


# ---------------------------------------------------------------------------
# Independent oracles: branch enumeration and full-space dynamics
# ---------------------------------------------------------------------------


def enumerate_stopping_ensemble(
    region: _Region,
    z: np.ndarray,
    m: int,
    prune_tol: float = ZERO_TOL,
) -> tuple[np.ndarray, float]:
    """Brute-force enumeration of all measurement-result histories.

    Starts from the classical-diagonal density ``z`` ((d, k, k) blocks)
    injected at the region's entry cell and follows every probabilistic
    branch for up to m steps, truncating unfinished branches to reject.
    Branches whose probability falls below ``prune_tol`` are dropped; the
    accumulated dropped mass is returned alongside the stopping ensemble.

    This is deliberately independent of the operator machinery above: it is
    the oracle the transfer operators are tested against.
    """
    spec, k, d = region.spec, region.spec.k, region.spec.d
    rej = spec.c_index(spec.c_rej)
    out = np.zeros((d, k, k), dtype=np.complex128)
    dropped = 0.0
    # Branch: (probability, normalized density, classical index, head, steps)
    stack: list[tuple[float, np.ndarray, int, int, int]] = []
    for c_idx in range(d):
        p = float(np.trace(z[c_idx]).real)
        if p > 0.0:
            stack.append((p, z[c_idx] / p, c_idx, region.inject_pos, 0))
    while stack:
        p, a, c_idx, h, t = stack.pop()
        c = spec.classical_states[c_idx]
        if spec.is_halting(c) or h == region.exit_pos:
            out[c_idx] += p * a
            continue
        if t == m:
            out[rej] += p * a
            continue
        fam = spec.theta[(c, region.symbols[h])]
        for r in spec.results:
            image = fam.result_map(r, a)
            pr = float(np.trace(image).real)
            branch_p = p * pr
            if branch_p <= prune_tol:
                dropped += max(branch_p, 0.0)
                continue
            c2, move = spec.delta[(c, region.symbols[h], r)]
            stack.append((branch_p, image / pr, spec.c_index(c2), h + move, t + 1))
    return out, dropped


def dense_step_kraus(region: _Region) -> list[np.ndarray]:
    """The single-step Kraus operators materialized on the full region space.

    Returns dense matrices on quantum (x) classical (x) head (index
    (q * d + c) * positions + h).  Intended for small regions only; used to
    cross-check the block-form dynamics and the structural zero pattern of
    transfer operators against a literal implementation.
    """
    spec = region.spec
    k, d, n_pos = spec.k, spec.d, region.positions
    dim = k * d * n_pos

    def basis_vec(q, c, h):
        v = np.zeros(dim)
        v[(q * d + c) * n_pos + h] = 1.0
        return v

    ops: list[np.ndarray] = []
    for c_idx, c in enumerate(spec.classical_states):
        for h in range(n_pos):
            if spec.is_halting(c) or h not in region.active:
                # |R| k^2 identical scaled copies act like one unscaled copy;
                # collapsing them changes nothing about the channel
                keep = np.zeros((dim, dim), dtype=np.complex128)
                for q in range(k):
                    v = basis_vec(q, c_idx, h)
                    keep += np.outer(v, v)
                ops.append(keep)
                continue
            sigma = region.symbols[h]
            fam = spec.theta[(c, sigma)]
            for r in spec.results:
                c2, move = spec.delta[(c, sigma, r)]
                c2_idx = spec.c_index(c2)
                for e in fam.operators(r):
                    full = np.zeros((dim, dim), dtype=np.complex128)
                    for q1 in range(k):
                        for q2 in range(k):
                            if e[q1, q2] == 0:
                                continue
                            v_out = basis_vec(q1, c2_idx, h + move)
                            v_in = basis_vec(q2, c_idx, h)
                            full += e[q1, q2] * np.outer(v_out, v_in)
                    ops.append(full)
    return ops


def full_space_transfer_matrix(region: _Region, m: int) -> np.ndarray:
    """Transfer operator computed on the full (kd)^2-dimensional space.

    Evolves every |i><j| basis element of the quantum (x) classical input
    space through the literal Kraus dynamics of :func:`dense_step_kraus`,
    truncates, and traces out the head.  Returns the (kd)^2 x (kd)^2
    column-stacked action matrix, for comparison with
    :meth:`TransferOperator.to_super`.
    """
    spec = region.spec
    k, d, n_pos = spec.k, spec.d, region.positions
    kd = k * d
    step_ops = dense_step_kraus(region)

    # Truncation Kraus operators on the full space.
    rej = spec.c_index(spec.c_rej)
    dim = kd * n_pos
    trunc_ops = []
    for c_idx, c in enumerate(spec.classical_states):
        for h in range(n_pos):
            c2_idx = rej if (not spec.is_halting(c) and h in region.active) else c_idx
            op = np.zeros((dim, dim), dtype=np.complex128)
            for q in range(k):
                row = (q * d + c2_idx) * n_pos + h
                col = (q * d + c_idx) * n_pos + h
                op[row, col] = 1.0
            trunc_ops.append(op)

    # evolve every |i><j| basis element at once as a batched tensor
    head = np.zeros((n_pos, n_pos))
    head[region.inject_pos, region.inject_pos] = 1.0
    batch = np.zeros((kd * kd, dim, dim), dtype=np.complex128)
    for i in range(kd):
        for j in range(kd):
            e_ij = np.zeros((kd, kd), dtype=np.complex128)
            e_ij[i, j] = 1.0
            batch[j * kd + i] = np.kron(e_ij, head)

    def apply_family(z_batch, family):
        out = np.zeros_like(z_batch)
        for e in family:
            out += e @ z_batch @ dagger(e)
        return out

    for _ in range(m):
        batch = apply_family(batch, step_ops)
    batch = apply_family(batch, trunc_ops)

    action = np.zeros((kd * kd, kd * kd), dtype=np.complex128)
    for col in range(kd * kd):
        out = np.einsum("ihjh->ij", batch[col].reshape(kd, n_pos, kd, n_pos))
        action[:, col] = out.reshape(-1, order="F")
    return action
