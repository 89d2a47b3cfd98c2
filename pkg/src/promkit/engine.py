"""Batched statevector primitives.

States are stored as a (batch, 2**n) array so that a whole batch of shots
advances through each gate with a handful of vectorized operations.  Qubit j
(0 = most significant bit of the basis index) corresponds to axis 1 + j when
the batch is viewed as (batch, 2, ..., 2).
"""
from __future__ import annotations

import numpy as np

from .circuits import Gate


def zero_states(batch: int, n: int, dtype=np.complex128) -> np.ndarray:
    states = np.zeros((batch, 1 << n), dtype=dtype)
    states[:, 0] = 1.0
    return states


def _gate_dtype(matrix: np.ndarray, state_dtype) -> np.ndarray:
    if np.iscomplexobj(matrix) and not np.iscomplexobj(np.empty(0, dtype=state_dtype)):
        raise TypeError("complex gate applied to a real-dtype state batch")
    return matrix.astype(state_dtype, copy=False)


def apply_1q(states: np.ndarray, matrix: np.ndarray, q: int, n: int) -> np.ndarray:
    u = _gate_dtype(np.asarray(matrix), states.dtype)
    batch = states.shape[0]
    v = states.reshape(batch, 1 << q, 2, 1 << (n - q - 1))
    lo = v[:, :, 0, :].copy()
    hi = v[:, :, 1, :]
    v[:, :, 0, :] = u[0, 0] * lo + u[0, 1] * hi
    v[:, :, 1, :] = u[1, 0] * lo + u[1, 1] * hi
    return states


def apply_x(states: np.ndarray, q: int, n: int) -> np.ndarray:
    batch = states.shape[0]
    v = states.reshape(batch, 1 << q, 2, 1 << (n - q - 1))
    tmp = v[:, :, 0, :].copy()
    v[:, :, 0, :] = v[:, :, 1, :]
    v[:, :, 1, :] = tmp
    return states


def apply_cx(states: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    batch = states.shape[0]
    hi, lo = (control, target) if control < target else (target, control)
    v = states.reshape(batch, 1 << hi, 2, 1 << (lo - hi - 1), 2, 1 << (n - lo - 1))
    if control < target:
        # condition on the more significant axis, flip the less significant
        tmp = v[:, :, 1, :, 0, :].copy()
        v[:, :, 1, :, 0, :] = v[:, :, 1, :, 1, :]
        v[:, :, 1, :, 1, :] = tmp
    else:
        tmp = v[:, :, 0, :, 1, :].copy()
        v[:, :, 0, :, 1, :] = v[:, :, 1, :, 1, :]
        v[:, :, 1, :, 1, :] = tmp
    return states


def apply_gate(states: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    if gate.name == "cx":
        return apply_cx(states, gate.qubits[0], gate.qubits[1], n)
    if gate.name == "x":
        return apply_x(states, gate.qubits[0], n)
    if len(gate.qubits) == 1:
        return apply_1q(states, gate.matrix, gate.qubits[0], n)
    return apply_kq_matrix(states, gate.matrix, gate.qubits, n)


def apply_gates(states: np.ndarray, gates, n: int) -> np.ndarray:
    for g in gates:
        states = apply_gate(states, g, n)
    return states


def apply_kq_matrix(states: np.ndarray, matrix: np.ndarray, qubits, n: int) -> np.ndarray:
    """General k-qubit unitary/Hermitian application (exact paths only)."""
    k = len(qubits)
    u = _gate_dtype(np.asarray(matrix), states.dtype)
    batch = states.shape[0]
    t = states.reshape((batch,) + (2,) * n)
    axes = [1 + q for q in qubits]
    rest = [ax for ax in range(1, n + 1) if ax not in axes]
    t = np.transpose(t, [0] + axes + rest)
    flat = np.ascontiguousarray(t).reshape(batch, 1 << k, -1)
    flat = np.einsum("ij,bjr->bir", u, flat)
    t = flat.reshape((batch,) + (2,) * n)
    inverse = np.argsort([0] + axes + rest)
    return np.transpose(t, inverse).reshape(batch, 1 << n).copy()


def simulate_gates(gates, n: int, state: np.ndarray | None = None,
                   dtype=np.complex128) -> np.ndarray:
    """Single-state convenience: run a gate list from |0...0> (or ``state``)."""
    if state is None:
        states = zero_states(1, n, dtype=dtype)
    else:
        states = np.array(state, dtype=dtype, copy=True)[None, :]
    return apply_gates(states, gates, n)[0]


def measure(states: np.ndarray, qubits, n: int, rng: np.random.Generator,
            ) -> tuple[np.ndarray, np.ndarray]:
    """Sample and collapse a computational-basis measurement of ``qubits``.

    Returns (collapsed states, outcome indices); outcome bit 0 is the first
    listed qubit.  Collapsed states are renormalized.
    """
    batch = states.shape[0]
    k = len(qubits)
    t = states.reshape((batch,) + (2,) * n)
    axes = [1 + q for q in qubits]
    rest = [ax for ax in range(1, n + 1) if ax not in axes]
    t = np.ascontiguousarray(np.transpose(t, [0] + axes + rest)).reshape(batch, 1 << k, -1)

    probs = np.square(np.abs(t)).sum(axis=2).astype(np.float64)
    probs /= probs.sum(axis=1, keepdims=True)
    cum = np.cumsum(probs, axis=1)
    u = rng.random(batch)
    outcomes = np.minimum((u[:, None] >= cum).sum(axis=1), (1 << k) - 1).astype(np.int64)

    rows = np.arange(batch)
    kept = t[rows, outcomes, :]
    norms = np.sqrt(probs[rows, outcomes]).astype(kept.real.dtype)
    collapsed = np.zeros_like(t)
    collapsed[rows, outcomes, :] = kept / norms[:, None]

    inverse = np.argsort([0] + axes + rest)
    out = np.transpose(collapsed.reshape((batch,) + (2,) * n), inverse)
    return np.ascontiguousarray(out).reshape(batch, 1 << n), outcomes


def apply_x_masks(states: np.ndarray, qubits, masks: np.ndarray, n: int) -> np.ndarray:
    """Apply X on ``qubits[j]`` for each shot whose mask bit j is set.

    Flipping qubits permutes basis indices by a per-shot XOR, done as one
    gather per distinct mask value.
    """
    masks = np.asarray(masks)
    k = len(qubits)
    if k == 0:
        return states
    idx = np.arange(states.shape[1])
    for v in np.unique(masks):
        if v == 0:
            continue
        full = 0
        for j, q in enumerate(qubits):
            if (int(v) >> (k - 1 - j)) & 1:
                full |= 1 << (n - 1 - q)
        sel = masks == v
        states[sel] = states[np.ix_(sel.nonzero()[0], idx ^ full)]
    return states


def probabilities(state: np.ndarray) -> np.ndarray:
    p = np.square(np.abs(state))
    return p / p.sum()
