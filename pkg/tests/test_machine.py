"""Tests for the machine model, loader, convenient form, and simulators."""

import json
import math

import numpy as np
import pytest

from qcfa.machine import (
    MachineFormatError,
    evaluate_expression,
    exact_run,
    fixture_path,
    iter_exact_run,
    load_machine,
    monte_carlo_run,
    to_convenient_form,
)
from qcfa.quantum import min_eigenvalue
from qcfa.verify import random_machine

SIN2 = math.sin(math.sqrt(2) * math.pi) ** 2  # first-measurement reject probability


def test_expression_grammar():
    assert evaluate_expression("sqrt(2)*pi") == pytest.approx(math.sqrt(2) * math.pi)
    assert evaluate_expression("1/sqrt(2)") == pytest.approx(1 / math.sqrt(2))
    assert evaluate_expression("-cos(pi/3) + 1.5") == pytest.approx(1.0)
    assert evaluate_expression("sin(alpha)", {"alpha": math.pi / 2}) == pytest.approx(1.0)
    with pytest.raises(MachineFormatError):
        evaluate_expression("__import__('os')")
    with pytest.raises(MachineFormatError):
        evaluate_expression("2 ** 3")
    with pytest.raises(MachineFormatError):
        evaluate_expression("unknown_name")


def test_load_parity_fixture(parity):
    assert parity.k == 1
    assert parity.d == 5
    assert parity.c_start == "init"
    assert set(parity.alphabet) == {"a", "b"}


def test_load_rotation_unitary(rotation):
    alpha = math.sqrt(2) * math.pi
    expected = np.array(
        [[math.cos(alpha), -math.sin(alpha)], [math.sin(alpha), math.cos(alpha)]]
    )
    (op,) = rotation.theta[("sweep", "a")].operators("r0")
    assert np.allclose(op, expected)


def test_load_rotation_constant_override():
    spec = load_machine(fixture_path("rotation"), constants={"alpha": math.pi / 2})
    (op,) = spec.theta[("sweep", "a")].operators("r0")
    assert np.allclose(op, [[0.0, -1.0], [1.0, 0.0]], atol=1e-12)


def test_load_rejects_bad_kraus_sum():
    doc = json.loads(fixture_path("parity").read_text())
    for entry in doc["transitions"]:
        if entry["state"] == "even" and entry["symbol"] == "a":
            entry["kraus"]["go"] = [[[["sqrt(2)", 0]]]]  # sums to 2I
    with pytest.raises(MachineFormatError, match=r"'even'.*'a'"):
        load_machine(doc)


def test_load_rejects_end_marker_motion():
    doc = json.loads(fixture_path("parity").read_text())
    for entry in doc["transitions"]:
        if entry["state"] == "even" and entry["symbol"] == "#L":
            entry["delta"]["go"]["move"] = -1
    with pytest.raises(MachineFormatError, match="left end-marker"):
        load_machine(doc)


def test_load_rejects_missing_fields():
    with pytest.raises(MachineFormatError, match="missing fields"):
        load_machine({"quantum_states": ["q0"]})


def test_load_missing_file_is_named():
    with pytest.raises(MachineFormatError, match="no_such_machine"):
        load_machine("no_such_machine.json")


def test_exact_run_parity_deterministic(parity):
    stats = exact_run(parity, "aa", 10)
    # one sweep: #L, a, a, #R read over four steps, then accept
    assert stats.p_accept_by_step[3] == 0.0
    assert stats.p_accept_by_step[4] == 1.0
    assert stats.p_accept == 1.0
    assert stats.p_running == 0.0
    assert stats.expected_time_lower == pytest.approx(4.0)
    assert exact_run(parity, "a", 10).p_reject == 1.0


def test_exact_run_rotation_equal_counts(rotation):
    # equal numbers of a and b leave the register at |q0>, so the first
    # measurement at #R cannot reject
    stats = exact_run(rotation, "ab", 50)
    assert stats.p_reject_by_step[4] == pytest.approx(0.0, abs=1e-12)


def test_exact_run_rotation_first_measurement(rotation):
    stats = exact_run(rotation, "a", 50)
    # steps: #L, a, then the measurement at #R on the third step
    assert stats.p_reject_by_step[2] == 0.0
    assert stats.p_reject_by_step[3] == pytest.approx(SIN2, abs=1e-12)


def test_exact_run_mass_conservation_fixtures(parity, rotation, coin):
    for spec, w in ((parity, "abab"), (rotation, "ab"), (coin, "ba")):
        stats = exact_run(spec, w, 60)
        total = stats.p_accept_by_step + stats.p_reject_by_step
        running = 1.0 - total
        assert np.all(running >= -1e-9)
        for t, blocks, p_acc, p_rej in iter_exact_run(spec, w, 30):
            block_trace = sum(np.trace(b).real for b in blocks.values())
            assert block_trace == pytest.approx(1.0, abs=1e-9)
            for b in blocks.values():
                assert min_eigenvalue(b) >= -1e-9


def test_exact_run_mass_conservation_random_machines():
    for seed in range(50):
        spec = random_machine(seed=seed, k=(seed % 2) + 1, d=3 + seed % 4)
        stats = exact_run(spec, "ab", 25)
        total = stats.p_accept_by_step + stats.p_reject_by_step + (
            1.0 - stats.p_accept_by_step - stats.p_reject_by_step
        )
        assert np.allclose(total, 1.0, atol=1e-9)
        for t, blocks, _, _ in iter_exact_run(spec, "ab", 12):
            assert sum(np.trace(b).real for b in blocks.values()) == pytest.approx(
                1.0, abs=1e-9
            )
            for b in blocks.values():
                assert min_eigenvalue(b) >= -1e-9


def test_convenient_form_parity(parity, parity_conv):
    assert parity_conv.d == parity.d + 2
    assert parity_conv.convenient
    for w in ("", "a", "ab"):
        orig = exact_run(parity, w, 30)
        conv = exact_run(parity_conv, w, 30 + 2 * (len(w) + 1))
        assert conv.p_accept == pytest.approx(orig.p_accept, abs=1e-12)
        assert conv.expected_time_lower - orig.expected_time_lower == pytest.approx(
            2 * (len(w) + 1), abs=1e-9
        )


def test_convenient_form_twice(parity_conv):
    twice = to_convenient_form(parity_conv)
    assert twice.d == parity_conv.d + 2
    for w in ("", "ab"):
        once = exact_run(parity_conv, w, 40)
        again = exact_run(twice, w, 40 + 2 * (len(w) + 1))
        assert again.p_accept == pytest.approx(once.p_accept, abs=1e-12)


def test_convenient_form_rotation_time_shift(rotation, rotation_conv):
    cap = 400
    orig = exact_run(rotation, "ab", cap)
    conv = exact_run(rotation_conv, "ab", cap + 6)
    assert conv.expected_time_lower - orig.expected_time_lower == pytest.approx(6.0, abs=1e-9)
    assert conv.p_accept == pytest.approx(orig.p_accept, abs=1e-12)


def test_convenient_form_preserves_acceptance_all_fixtures(parity, rotation, coin):
    for spec in (parity, rotation, coin):
        conv = to_convenient_form(spec)
        for w in ("", "a", "ba"):
            orig = exact_run(spec, w, 200)
            shifted = exact_run(conv, w, 200 + 2 * (len(w) + 1))
            assert shifted.p_accept == pytest.approx(orig.p_accept, abs=1e-12)
            assert shifted.p_reject == pytest.approx(orig.p_reject, abs=1e-12)


def test_monte_carlo_parity_deterministic(parity):
    mc = monte_carlo_run(parity, "ab", trials=50, step_cap=20, seed=11)
    assert mc.p_accept in (0.0, 1.0)
    assert mc.p_accept == exact_run(parity, "ab", 20).p_accept


def test_monte_carlo_fair_coin(coin):
    trials = 10_000
    mc = monte_carlo_run(coin, "ab", trials=trials, step_cap=5, seed=99)
    bound = 4 * math.sqrt(0.25 / trials)
    assert abs(mc.p_accept - 0.5) <= bound


def test_monte_carlo_rotation_first_round(rotation):
    trials = 10_000
    mc = monte_carlo_run(rotation, "a", trials=trials, step_cap=3, seed=5)
    p = SIN2
    bound = 4 * math.sqrt(p * (1 - p) / trials)
    assert abs(mc.p_reject_by_step[3] - p) <= bound


def test_monte_carlo_matches_exact_on_fixtures(parity, rotation, coin):
    trials = 10_000
    for spec, w, cap in ((parity, "aa", 10), (coin, "a", 4), (rotation, "ab", 60)):
        mc = monte_carlo_run(spec, w, trials=trials, step_cap=cap, seed=17)
        exact = exact_run(spec, w, cap)
        for curve_mc, curve_ex in (
            (mc.p_accept_by_step, exact.p_accept_by_step),
            (mc.p_reject_by_step, exact.p_reject_by_step),
        ):
            for t in range(cap + 1):
                p = curve_ex[t]
                bound = 4 * math.sqrt(max(p * (1 - p), 1e-4) / trials)
                assert abs(curve_mc[t] - p) <= bound


def test_monte_carlo_deterministic_given_seed(rotation):
    a = monte_carlo_run(rotation, "a", trials=200, step_cap=30, seed=4)
    b = monte_carlo_run(rotation, "a", trials=200, step_cap=30, seed=4)
    assert np.array_equal(a.p_accept_by_step, b.p_accept_by_step)
    assert np.array_equal(a.p_reject_by_step, b.p_reject_by_step)
