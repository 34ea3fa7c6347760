import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crs.bitcodec import LogicLevels, dae
from crs.concealing import ConcealedBundle, conceal
from crs.evaluation import (
    AttackScenario, ScenarioError, attack_transform, fz_occupancy, position_norms, run_trials,
    signal_max_norm, sweep, sweep_csv, trilevel_values, word_norms, WordNorms,
)
from crs.keys import generate_noise_tape, keygen

bitrows = st.integers(1, 6).flatmap(
    lambda t: st.integers(1, 8).flatmap(
        lambda k: st.tuples(
            st.lists(st.integers(0, 1), min_size=k, max_size=k),
            st.lists(st.lists(st.integers(0, 1), min_size=k, max_size=k), min_size=t, max_size=t),
        )
    )
)


def test_word_norm_examples():
    assert word_norms([0, 1, 1, 0], [0, 1, 1, 0]) == WordNorms(0, 0.0)
    assert word_norms([0, 1, 1, 0], [0, 1, 0, 0]) == WordNorms(1, 0.25)
    assert word_norms([0, 1, 1, 0], [1, 0, 0, 1]) == WordNorms(1, 1.0)
    with pytest.raises(ValueError):
        word_norms([0, 1], [0, 1, 1])


def test_position_norm_examples():
    p = position_norms([1, 0, 1], [[1, 1, 1]])
    assert p.max.tolist() == [0, 1, 0] and p.mean.tolist() == [0, 1, 0]
    p = position_norms([0, 0, 1, 0], [[0, 0, 1, 0], [0, 0, 0, 0]])
    assert p.max[2] == 1 and p.mean[2] == 0.5


@given(bitrows)
def test_norms_match_brute_force(case):
    original, trials = case
    t, k = len(trials), len(original)
    p = position_norms(original, trials)
    for j in range(k):
        flips = [abs(original[j] - trials[s][j]) for s in range(t)]
        assert p.max[j] == max(flips)
        assert p.mean[j] == pytest.approx(sum(flips) / t)
    for row in trials:
        w = word_norms(original, row)
        flips = [abs(x - y) for x, y in zip(original, row)]
        assert w.max_norm == max(flips) and w.mean_norm == pytest.approx(sum(flips) / k)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=10), st.integers(1, 5))
def test_signal_norm_brute_force(signal, t):
    rng = np.random.default_rng(t)
    trials = np.array(signal) + rng.normal(size=(t, len(signal)))
    original = (np.array(signal) > 0).astype(float)
    got = signal_max_norm(original, trials).max
    for j in range(len(signal)):
        assert got[j] == max(abs(original[j] - trials[s][j]) for s in range(t))


def test_trilevel_and_fz():
    lv = LogicLevels(0.1, 0.9)
    assert trilevel_values([0.9, 0.1, 0.5], lv).tolist() == [1.0, 0.0, 0.5]
    fz = fz_occupancy([1, 0, 1], [[0.95, 0.5, 0.05], [0.9, 0.0, 0.95]], lv)
    assert fz.max.tolist() == [0.0, 0.5, 1.0]
    assert fz.mean.tolist() == [0.0, 0.25, 0.5]
    fz = fz_occupancy([1], [[0.2]], lv)
    assert fz.max.tolist() == [0.5] and fz.mean.tolist() == [0.5]


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        AttackScenario("sniff")
    with pytest.raises(ScenarioError):
        AttackScenario("wrong_b")
    with pytest.raises(ScenarioError):
        AttackScenario("wrong_bu", {"b_u": 0})
    with pytest.raises(ScenarioError):
        AttackScenario("external_noise", {"sigma_ext": -1})
    assert AttackScenario("no_nonlinearity").value is None


def test_degenerate_attacks():
    bundle = keygen(2, seed=1)
    honest = run_trials(bundle, 20, 50, base_seed=4)
    same_b = run_trials(bundle, 20, 50, base_seed=4, attack=AttackScenario("wrong_b", {"b": 1.0}))
    assert np.array_equal(honest.positions.mean, same_b.positions.mean)
    data = conceal(dae("0110"), bundle, generate_noise_tape(bundle, 4, 0))
    out, _ = attack_transform(AttackScenario("external_noise", {"sigma_ext": 0.0}), data, bundle)
    assert np.array_equal(out.u, data.u)


def test_wrong_b_hurts_more_the_further_off():
    bundle = keygen(2, seed=2)
    rates = [
        run_trials(bundle, 50, 200, 1, AttackScenario("wrong_b", {"b": b})).positions.mean.mean()
        for b in (1.0, 1.2, 3.0)
    ]
    assert rates[0] == 0 and 0 < rates[2]
    assert rates[0] <= rates[1] <= rates[2]


def test_batch_size_independence():
    bundle = keygen(2, seed=3, nonlinear_id="g_c")
    attack = AttackScenario("no_nonlinearity")
    a = run_trials(bundle, 37, 64, 5, attack, LogicLevels(0.1, 0.9), batch_size=37)
    b = run_trials(bundle, 37, 64, 5, attack, LogicLevels(0.1, 0.9), batch_size=5)
    assert a.to_csv() == b.to_csv()
    assert a.signal.to_csv() == b.signal.to_csv()
    assert a.fz.to_csv() == b.fz.to_csv()


def test_csv_determinism_and_schema():
    bundle = keygen(2, seed=9)
    csv1 = run_trials(bundle, 30, 20, 1).to_csv()
    assert csv1 == run_trials(bundle, 30, 20, 1).to_csv()
    lines = csv1.splitlines()
    assert lines[0] == "k,max_norm,mean_norm" and len(lines) == 21
    assert lines[1].startswith("1,")


def test_sweep_rows():
    rows = sweep("b_u", [1.0, 0.0, 2.0], keygen(2), 100, seed=1)
    assert [r.status for r in rows][0] == "ok"
    assert rows[1].status.startswith("error")
    text = sweep_csv(rows)
    assert text.splitlines()[0] == "param_value,max_norm,mean_norm,status"
    assert text == sweep_csv(sweep("b_u", [1.0, 0.0, 2.0], keygen(2), 100, seed=1))
    with pytest.raises(ValueError):
        sweep("sigma", [1.0], keygen(2), 10)


def test_external_noise_is_per_trial():
    bundle = keygen(1)
    u = np.zeros((2, 3, 5))
    out, _ = attack_transform(AttackScenario("external_noise", {"sigma_ext": 1.0}), ConcealedBundle(u), bundle, 0, [0, 1, 2])
    assert not np.array_equal(out.u[:, 0], out.u[:, 1])
    single, _ = attack_transform(AttackScenario("external_noise", {"sigma_ext": 1.0}), ConcealedBundle(u[:, 1]), bundle, 0, 1)
    assert np.array_equal(single.u, out.u[:, 1])
