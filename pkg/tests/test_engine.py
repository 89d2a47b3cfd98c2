import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import apply_circuit_dense
from promkit import engine
from promkit.circuits import cx, h, rx, ry, rz, s, sdg, x, y, z


def random_gates(rng, n, count):
    makers = [lambda q: h(q), lambda q: x(q), lambda q: y(q), lambda q: z(q),
              lambda q: s(q), lambda q: sdg(q),
              lambda q: rx(rng.uniform(0, 2 * np.pi), q),
              lambda q: ry(rng.uniform(0, 2 * np.pi), q),
              lambda q: rz(rng.uniform(0, 2 * np.pi), q)]
    gates = []
    for _ in range(count):
        if n >= 2 and rng.random() < 0.35:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(cx(int(a), int(b)))
        else:
            gates.append(makers[rng.integers(len(makers))](int(rng.integers(n))))
    return gates


@given(st.integers(1, 5), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_gates_match_dense_kron(n, seed):
    rng = np.random.default_rng(seed)
    gates = random_gates(rng, n, 8)
    fast = engine.simulate_gates(gates, n)
    slow = apply_circuit_dense(gates, n)
    assert np.allclose(fast, slow, atol=1e-10)


def test_batched_matches_single():
    rng = np.random.default_rng(1)
    gates = random_gates(rng, 3, 10)
    batch = engine.zero_states(4, 3, dtype=np.complex128)
    batch = engine.apply_gates(batch, gates, 3)
    single = engine.simulate_gates(gates, 3)
    for row in batch:
        assert np.allclose(row, single, atol=1e-12)


def test_float32_path_accuracy():
    rng = np.random.default_rng(2)
    # real gates only so the float32 real path applies
    gates = [g for g in random_gates(rng, 4, 30) if g.is_real]
    exact = engine.apply_gates(engine.zero_states(1, 4, dtype=np.float64), gates, 4)
    fast = engine.apply_gates(engine.zero_states(1, 4, dtype=np.float32), gates, 4)
    assert fast.dtype == np.float32
    assert np.allclose(fast, exact, atol=1e-5)


def test_complex_gate_on_real_batch_raises():
    states = engine.zero_states(2, 1, dtype=np.float32)
    with pytest.raises(TypeError):
        engine.apply_gates(states, [s(0)], 1)


def test_measure_collapses_and_normalizes():
    states = engine.zero_states(512, 1, dtype=np.complex128)
    states = engine.apply_gates(states, [h(0)], 1)
    rng = np.random.default_rng(3)
    states, outcomes = engine.measure(states, (0,), 1, rng)
    assert set(np.unique(outcomes)) <= {0, 1}
    # collapsed states are basis states with unit norm
    norms = (np.abs(states) ** 2).sum(axis=1)
    assert np.allclose(norms, 1.0, atol=1e-12)
    for row, o in zip(states, outcomes):
        assert abs(row[o]) == pytest.approx(1.0, abs=1e-12)
    # roughly balanced outcomes
    assert 0.35 < outcomes.mean() < 0.65


def test_measure_statistics_biased_state():
    # amplitude sqrt(0.9)|0> + sqrt(0.1)|1>
    states = np.tile(np.array([np.sqrt(0.9), np.sqrt(0.1)], dtype=np.complex128),
                     (20_000, 1))
    rng = np.random.default_rng(4)
    _, outcomes = engine.measure(states, (0,), 1, rng)
    assert outcomes.mean() == pytest.approx(0.1, abs=0.01)


def test_measure_subset_ordering():
    # prepare |q0 q1 q2> = |0 1 0>, measure (2, 1): bits should read (0, 1)
    states = engine.zero_states(1, 3, dtype=np.complex128)
    states = engine.apply_gates(states, [x(1)], 3)
    _, outcomes = engine.measure(states, (2, 1), 3, np.random.default_rng(0))
    assert outcomes[0] == 0b01


def test_apply_x_masks_matches_gates():
    rng = np.random.default_rng(5)
    gates = random_gates(rng, 3, 6)
    base = engine.apply_gates(engine.zero_states(4, 3, dtype=np.complex128), gates, 3)
    masks = np.array([0b00, 0b01, 0b10, 0b11])
    flipped = engine.apply_x_masks(base.copy(), (0, 2), masks, 3)
    # row k should equal base with X applied per mask bit (qubit 0 high bit)
    for k, mask in enumerate(masks):
        want = base[k].copy().reshape(2, 2, 2)
        if (mask >> 1) & 1:
            want = want[::-1, :, :]
        if mask & 1:
            want = want[:, :, ::-1]
        assert np.allclose(flipped[k], want.reshape(-1), atol=1e-12)


def test_probabilities():
    state = engine.simulate_gates([h(0)], 1)
    assert np.allclose(engine.probabilities(state), [0.5, 0.5])


def test_measurement_determinism():
    states = engine.apply_gates(engine.zero_states(64, 2, dtype=np.complex128),
                                [h(0), h(1)], 2)
    _, o1 = engine.measure(states.copy(), (0, 1), 2, np.random.default_rng(9))
    _, o2 = engine.measure(states.copy(), (0, 1), 2, np.random.default_rng(9))
    assert np.array_equal(o1, o2)
