"""Tests for transfer operators, crossing sequences, and the feature map."""

import numpy as np
import pytest

from qcfa.machine import exact_run, to_convenient_form
from qcfa.quantum import (
    choi_matrix,
    choi_trace_norm_bound,
    min_eigenvalue,
    random_density,
    schatten_norm,
)
from qcfa.transfer import (
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
    single_step,
    start_operator,
    suffix_region,
    transfer_operator,
    truncate,
)
from qcfa.verify import random_machine

ALL_TEXTS = ("", "a", "ab", "ba")


def random_diag_density(spec, rng):
    z = np.zeros((spec.d, spec.k, spec.k), dtype=complex)
    weights = rng.dirichlet(np.ones(spec.d))
    for c in range(spec.d):
        z[c] = weights[c] * random_density(spec.k, rng).matrix
    return z


# ---------------------------------------------------------------------------
# single_step / truncate
# ---------------------------------------------------------------------------


def test_single_step_parity_deterministic(parity):
    region = prefix_region(parity, "ab")
    out = single_step(region, {("even", 1): np.array([[1.0]])})
    assert set(out) == {("odd", 2)}
    assert out[("odd", 2)][0, 0] == pytest.approx(1.0)


def test_single_step_halted_blocks_fixed(parity):
    region = prefix_region(parity, "ab")
    blocks = {("accept", 1): np.array([[0.7]]), ("reject", 0): np.array([[0.3]])}
    out = single_step(region, blocks)
    assert out[("accept", 1)][0, 0] == pytest.approx(0.7)
    assert out[("reject", 0)][0, 0] == pytest.approx(0.3)


def test_single_step_exit_cell_fixed(parity):
    region = prefix_region(parity, "a")
    out = single_step(region, {("even", 2): np.array([[1.0]])})
    assert set(out) == {("even", 2)}


def test_single_step_matches_apply_kraus(rotation, rng):
    # a sweep block over 'a' evolves by conjugation with the rotation unitary
    region = prefix_region(rotation, "ab")
    block = random_density(2, rng).matrix
    out = single_step(region, {("sweep", 1): block})
    (u,) = rotation.theta[("sweep", "a")].operators("r0")
    assert set(out) == {("sweep", 2)}
    assert np.allclose(out[("sweep", 2)], u @ block @ u.conj().T)


def test_single_step_trace_preserved_on_mixtures(rotation_conv, rng):
    region = prefix_region(rotation_conv, "ba")
    blocks = {}
    for c in rotation_conv.classical_states[:3]:
        for h in (0, 1, 2):
            blocks[(c, h)] = random_density(2, rng).matrix / 9
    out = single_step(region, blocks)
    total_in = sum(np.trace(b).real for b in blocks.values())
    total_out = sum(np.trace(b).real for b in out.values())
    assert total_out == pytest.approx(total_in, abs=1e-12)


def test_check_step_channel_fixtures(parity, rotation):
    ok, residual = check_step_channel(prefix_region(parity, "ab"))
    assert ok and residual < 1e-12
    ok, residual = check_step_channel(prefix_region(rotation, "a"))
    assert ok


def test_check_step_channel_corrupted(parity):
    from conftest import corrupt_kraus

    # scale the (even, a) family by 1.1: each affected (c, h) slot deviates
    # from completeness by |1.1^2 - 1| = 0.21 in Frobenius norm
    corrupted = corrupt_kraus(parity, "even", "a", 1.1)
    for x, slots in (("a", 1), ("aa", 2)):
        ok, residual = check_step_channel(prefix_region(corrupted, x))
        assert not ok
        assert residual == pytest.approx(0.21 * np.sqrt(slots), abs=1e-12)


def test_truncate_examples(parity):
    region = prefix_region(parity, "ab")
    acc_only = {("accept", 2): np.array([[1.0]])}
    assert set(truncate(region, acc_only)) == {("accept", 2)}

    running = {("even", 0): np.array([[1.0]])}
    out = truncate(region, running)
    assert set(out) == {("reject", 0)}
    assert out[("reject", 0)][0, 0] == pytest.approx(1.0)


def test_truncate_preserves_accept_mass_and_trace(parity_conv, rng):
    region = prefix_region(parity_conv, "ab")
    blocks = {}
    for c in parity_conv.classical_states:
        for h in range(4):
            blocks[(c, h)] = np.array([[rng.random()]]) / 40
    out = truncate(region, blocks)
    total_in = sum(b[0, 0].real for b in blocks.values())
    total_out = sum(b[0, 0].real for b in out.values())
    assert total_out == pytest.approx(total_in, abs=1e-12)
    acc_in = sum(b[0, 0].real for (c, _), b in blocks.items() if c == "accept")
    acc_out = sum(b[0, 0].real for (c, _), b in out.items() if c == "accept")
    assert acc_out == pytest.approx(acc_in, abs=1e-12)


# ---------------------------------------------------------------------------
# Transfer operators
# ---------------------------------------------------------------------------


def test_transfer_operator_m0_truncates_everything(parity_conv):
    op = transfer_operator(prefix_region(parity_conv, "ab"), 0)
    flow = op.classical_transition()
    idx = {c: i for i, c in enumerate(parity_conv.classical_states)}
    for c in parity_conv.classical_states:
        target = c if parity_conv.is_halting(c) else parity_conv.c_rej
        expected = np.zeros(parity_conv.d)
        expected[idx[target]] = 1.0
        assert np.allclose(flow[:, idx[c]], expected)


def test_transfer_operator_parity_deterministic_map(parity_conv):
    # with m past the worst-case walk length the deterministic machine induces
    # a 0/1 classical map
    op = transfer_operator(prefix_region(parity_conv, "a"), 2 * 1 + 4)
    flow = op.classical_transition()
    assert np.allclose(flow, np.round(flow), atol=1e-12)
    assert np.allclose(flow.sum(axis=0), 1.0)


@pytest.mark.parametrize("side", ["prefix", "suffix"])
@pytest.mark.parametrize("m", [0, 3, 12])
def test_operator_matches_enumeration_fixtures(
    parity_conv, rotation_conv, coin_conv, rng, side, m
):
    for spec in (parity_conv, rotation_conv, coin_conv):
        for text in ALL_TEXTS:
            region = (
                prefix_region(spec, text) if side == "prefix" else suffix_region(spec, text)
            )
            op = transfer_operator(region, m)
            for _ in range(3):
                z = random_diag_density(spec, rng)
                fast = (op.action @ z.reshape(-1)).reshape(spec.d, spec.k, spec.k)
                slow, dropped = enumerate_stopping_ensemble(region, z, m)
                dist = schatten_norm(_blocks_to_dense(fast) - _blocks_to_dense(slow), 1)
                assert dist <= 1e-9 + dropped


def test_operator_channel_laws_random_machines(rng):
    for seed in range(10):
        spec = to_convenient_form(random_machine(seed=seed, k=2, d=4))
        for side_region in (prefix_region(spec, "ab"), suffix_region(spec, "b")):
            for m in (0, 5):
                op = transfer_operator(side_region, m)
                sup = op.to_super()
                assert min_eigenvalue(choi_matrix(sup)) >= -1e-9
                for _ in range(5):
                    z = random_diag_density(spec, rng)
                    out = (op.action @ z.reshape(-1)).reshape(spec.d, spec.k, spec.k)
                    total = sum(np.trace(out[c]).real for c in range(spec.d))
                    assert total == pytest.approx(1.0, abs=1e-9)


def test_dual_operator_empty_suffix(rotation_conv):
    # with y empty the injection sits on #R itself, so only the #R transitions
    # matter: the sweep state measures there on its first step
    op = dual_transfer_operator(rotation_conv, "", 5)
    image = op.apply_blocks({"sweep": np.array([[1.0, 0], [0, 0.0]])})
    assert np.trace(image["reject"]).real == pytest.approx(0.0, abs=1e-12)
    image = op.apply_blocks({"sweep": np.array([[0.0, 0], [0, 1.0]])})
    assert np.trace(image["reject"]).real == pytest.approx(1.0, abs=1e-12)


def test_full_space_oracle_agrees_with_padded_operator(rotation_conv, parity_conv):
    for spec, text, m in ((rotation_conv, "a", 4), (parity_conv, "ab", 6)):
        for region in (prefix_region(spec, text), suffix_region(spec, text)):
            full = full_space_transfer_matrix(region, m)
            padded = transfer_operator(region, m).to_super().action
            assert np.abs(full - padded).max() < 1e-9


def test_structural_zeros_full_space(rotation_conv):
    spec = rotation_conv
    k, d = spec.k, spec.d
    kd = k * d
    region = prefix_region(spec, "a")
    full = full_space_transfer_matrix(region, 4)
    for i in range(kd):
        for j in range(kd):
            col = full[:, j * kd + i].reshape(kd, kd, order="F")
            if i % d != j % d:  # classical bra/ket mismatch on the input
                assert np.abs(col).max() <= 1e-12
            for r in range(kd):
                for s in range(kd):
                    if r % d != s % d:  # classical mismatch on the output
                        assert abs(col[r, s]) <= 1e-12


# ---------------------------------------------------------------------------
# Crossing sequences
# ---------------------------------------------------------------------------


def test_crossing_sequence_requires_convenient_form(parity):
    with pytest.raises(ValueError, match="convenient"):
        crossing_sequence(parity, "a", "b", 10, 4)


def test_crossing_sequence_start_entry(parity_conv):
    cs = crossing_sequence(parity_conv, "a", "b", 20, 3)
    z1 = cs.entries[0]
    expected = start_operator(parity_conv)
    assert np.allclose(z1, expected)


def test_crossing_sequence_parity_pure_classical(parity_conv):
    cs = crossing_sequence(parity_conv, "a", "b", 40, 8)
    for z in cs.entries:
        traces = np.array([np.trace(z[c]).real for c in range(parity_conv.d)])
        assert traces.sum() == pytest.approx(1.0, abs=1e-9)
        # deterministic machine: mass sits on a single classical basis state
        assert np.isclose(traces.max(), 1.0, atol=1e-9)
        dense = _blocks_to_dense(z)
        assert schatten_norm(dense @ dense, 1) == pytest.approx(1.0, abs=1e-9)
    # the run on "ab" rejects, and the final crossings agree
    final = cs.classical_marginal(8)
    assert final["reject"] == pytest.approx(exact_run(parity_conv, "ab", 60).p_reject)


def test_crossing_entries_are_densities(rotation_conv):
    cs = crossing_sequence(rotation_conv, "ab", "a", 25, 9)
    for z in cs.entries:
        dense = _blocks_to_dense(z)
        assert np.trace(dense).real == pytest.approx(1.0, abs=1e-9)
        assert min_eigenvalue(dense) >= -1e-9


def test_accept_profile_monotone_and_normalized(rotation_conv):
    cs = crossing_sequence(rotation_conv, "a", "b", 30, 12)
    profile = accept_profile(cs)
    assert profile[0][rotation_conv.c_start] == pytest.approx(1.0)
    prev = 0.0
    for marginal in profile:
        assert sum(marginal.values()) == pytest.approx(1.0, abs=1e-9)
        assert marginal["accept"] >= prev - 1e-12
        prev = marginal["accept"]


def test_accept_profile_parity_accepted_word(parity_conv):
    # hand trace for x = "a", y = "a" (input "aa", accepted): the sweep
    # crosses (1), returns (2), leaves in odd parity (3), accepts at #R (4)
    cs = crossing_sequence(parity_conv, "a", "a", 40, 6)
    profile = accept_profile(cs)
    acc = [marg["accept"] for marg in profile]
    assert acc[:3] == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)
    assert acc[3] == pytest.approx(1.0)
    assert acc[5] == pytest.approx(1.0)
    assert exact_run(parity_conv, "aa", 60).p_accept == 1.0


def test_crossing_distance_identical_prefixes(rotation_conv):
    cs_a = crossing_sequence(rotation_conv, "ab", "b", 20, 8)
    cs_b = crossing_sequence(rotation_conv, "ab", "b", 20, 8)
    assert max(crossing_distances(cs_a, cs_b)) == 0.0


def test_crossing_distance_bound_fixture(parity_conv):
    m = 20
    cs_a = crossing_sequence(parity_conv, "a", "a", m, 10)
    cs_b = crossing_sequence(parity_conv, "b", "a", m, 10)
    bound = choi_trace_norm_bound(
        transfer_operator(prefix_region(parity_conv, "a"), m).to_super(),
        transfer_operator(prefix_region(parity_conv, "b"), m).to_super(),
    )
    dists = crossing_distances(cs_a, cs_b)
    assert dists[0] == 0.0  # shared start entry
    for i, dist in enumerate(dists, start=1):
        assert dist <= ((i - 1) // 2) * bound + 1e-9


# ---------------------------------------------------------------------------
# Feature vectors
# ---------------------------------------------------------------------------


def test_feature_vector_parity_binary_entries(parity_conv):
    op = transfer_operator(prefix_region(parity_conv, "a"), 20)
    g = feature_vector(op)
    assert g.size == parity_conv.k**4 * parity_conv.d**2
    assert np.all((np.abs(g) < 1e-12) | (np.abs(g - 1) < 1e-12))


def test_feature_vector_norm_bound_random(rng):
    for seed in range(50):
        spec = to_convenient_form(random_machine(seed=100 + seed, k=(seed % 2) + 1, d=3 + seed % 3))
        text = "".join(rng.choice(("a", "b")) for _ in range(int(rng.integers(0, 3))))
        op = transfer_operator(prefix_region(spec, text), 6)
        g = feature_vector(op)
        assert g.size == spec.k**4 * spec.d**2
        assert np.linalg.norm(g) <= spec.k**2 * spec.d + 1e-9


def test_feature_vector_dominates_choi_distance(rotation_conv):
    m = 15
    h = rotation_conv.k**4 * rotation_conv.d**2
    texts = ("", "a", "b", "ab", "ba")
    ops = {t: transfer_operator(prefix_region(rotation_conv, t), m) for t in texts}
    feats = {t: feature_vector(ops[t]) for t in texts}
    for i, t in enumerate(texts):
        for t2 in texts[i + 1 :]:
            choi_dist = choi_trace_norm_bound(ops[t].to_super(), ops[t2].to_super())
            feat_dist = np.sqrt(2 * h) * np.linalg.norm(feats[t] - feats[t2])
            assert choi_dist <= feat_dist + 1e-9
