import numpy as np
import pytest

from oracles import random_distribution
from promkit import oracle
from promkit.bits import SizeCapError
from promkit.circuits import (DynamicCircuit, FeedforwardLayer, PauliString,
                              TerminalSetting, ZeroProjector, cx, h, x,
                              xor_feedback_table)
from promkit.experiments import build_teleport_circuit
from promkit.mitigation import GeneralWeights


def reset_circuit():
    layer = FeedforwardLayer(measured=(0,), table=xor_feedback_table((0,)))
    setting = TerminalSetting(name="t", measured=(0,),
                              observables=(("zeros", ZeroProjector((0,))),))
    return DynamicCircuit(n=1, prep=(h(0),), layers=(layer,), settings=(setting,))


def test_reset_tensor_values():
    c = reset_circuit()
    obs = oracle.exact_setting_observables(c.settings[0])
    t = oracle.exact_trajectory_tensor(c, obs)
    assert t.branch_probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(t.branch_probs, [0.5, 0.5])
    assert t.ideal(0) == pytest.approx(1.0)
    # T[s, v]: correct lookup resets; wrong lookup leaves |1> half the time
    assert t.tensor[0, 0, 0] == pytest.approx(0.5)   # true 0, lookup 0 -> |0>
    assert t.tensor[0, 0, 1] == pytest.approx(0.0)   # true 0, X fires -> |1>
    assert t.tensor[0, 1, 1] == pytest.approx(0.5)
    assert t.tensor[0, 1, 0] == pytest.approx(0.0)


def test_masked_interpolates_channel():
    c = reset_circuit()
    obs = oracle.exact_setting_observables(c.settings[0])
    t = oracle.exact_trajectory_tensor(c, obs)
    q = np.array([0.9, 0.1])
    # no mask: expectation = sum_s p_s * (q0 * right + q1 * wrong)
    assert t.masked(0, 0, q) == pytest.approx(0.9)
    assert t.masked(0, 1, q) == pytest.approx(0.1)
    # noiseless channel, zero mask == ideal
    assert t.masked(0, 0, [1.0, 0.0]) == pytest.approx(t.ideal(0))


def test_mitigated_recovers_ideal():
    c = reset_circuit()
    obs = oracle.exact_setting_observables(c.settings[0])
    t = oracle.exact_trajectory_tensor(c, obs)
    q = np.array([0.85, 0.15])
    w = GeneralWeights(q)
    assert t.mitigated(0, q, w) == pytest.approx(t.ideal(0), abs=1e-12)
    assert t.mitigated(0, q, w.alpha()) == pytest.approx(1.0, abs=1e-12)


def test_teleport_ideal_matches_closed_form():
    phi_x, phi_z = np.pi / 8, 3 * np.pi / 8
    want = {"X": np.sin(2 * phi_x) * np.sin(2 * phi_z),
            "Y": -np.sin(2 * phi_x) * np.cos(2 * phi_z),
            "Z": np.cos(2 * phi_x)}
    c = build_teleport_circuit(1, phi_x, phi_z)
    for setting in c.settings:
        obs = oracle.exact_setting_observables(setting)
        t = oracle.exact_trajectory_tensor(c, obs)
        name = obs[0][0]
        assert t.ideal(0) == pytest.approx(want[name], abs=1e-12)


def test_branch_probs_follow_born_rule():
    # teleport stage: all four Bell outcomes equally likely
    c = build_teleport_circuit(1)
    obs = oracle.exact_setting_observables(c.settings[0])
    t = oracle.exact_trajectory_tensor(c, obs)
    assert np.allclose(t.branch_probs, 0.25)


def test_multi_observable_tensor():
    c = reset_circuit()
    setting = TerminalSetting(
        name="t", measured=(0,),
        observables=(("zeros", ZeroProjector((0,))), ("z", PauliString("Z", (0,)))))
    c = DynamicCircuit(n=1, prep=c.prep, layers=c.layers, settings=(setting,))
    obs = oracle.exact_setting_observables(setting)
    t = oracle.exact_trajectory_tensor(c, obs)
    assert t.names == ["zeros", "z"]
    # projector p and Z = 2p - 1 on a single qubit
    assert t.ideal(1) == pytest.approx(2 * t.ideal(0) - 1, abs=1e-12)


def test_random_circuit_unbiasedness():
    rng = np.random.default_rng(0)
    for _ in range(10):
        c = _random_dynamic_circuit(rng)
        obs = oracle.exact_setting_observables(c.settings[0])
        t = oracle.exact_trajectory_tensor(c, obs)
        q = random_distribution(rng, 1 << c.m)
        w = GeneralWeights(q)
        for b in range(len(obs)):
            assert t.mitigated(b, q, w) == pytest.approx(t.ideal(b), abs=1e-9)


def _random_dynamic_circuit(rng):
    from test_engine import random_gates
    n = int(rng.integers(2, 4))
    prep = tuple(random_gates(rng, n, 4))
    measured = tuple(int(q) for q in rng.choice(n, size=2, replace=False))
    table = tuple(tuple(random_gates(rng, n, int(rng.integers(0, 3))))
                  for _ in range(4))
    layer = FeedforwardLayer(measured=measured, table=table)
    label = "".join(rng.choice(list("IXYZ")) for _ in range(n))
    if set(label) == {"I"}:
        label = "Z" + label[1:]
    setting = TerminalSetting(name="t", measured=tuple(range(n)),
                              observables=((label, PauliString(label)),),
                              basis_gates=PauliString(label).basis_gates())
    return DynamicCircuit(n=n, prep=prep, layers=(layer,), settings=(setting,))


def test_size_caps_enforced():
    big = DynamicCircuit(n=13, prep=(h(0),))
    with pytest.raises(SizeCapError):
        oracle.exact_trajectory_tensor(big, [("z", PauliString("Z", (0,)))])
    layers = tuple(FeedforwardLayer(measured=(0,), table=((), ()))
                   for _ in range(7))
    wide = DynamicCircuit(n=2, layers=layers)
    with pytest.raises(SizeCapError):
        oracle.exact_trajectory_tensor(wide, [("z", PauliString("Z", (0,)))])


def test_oracle_rejects_repetition():
    layer = FeedforwardLayer(measured=(0,), table=((), ()), repeat=3,
                             consensus="majority")
    c = DynamicCircuit(n=1, layers=(layer,))
    with pytest.raises(ValueError):
        oracle.exact_trajectory_tensor(c, [("z", PauliString("Z", (0,)))])
