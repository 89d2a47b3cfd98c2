"""Exact reference calculations on dynamic circuits.

Enumerates every (true outcome, applied feedforward) trajectory of a dynamic
circuit into a tensor T[b, s, v] = <O_b> weight of the branch where the
mid-circuit measurements truly collapsed to s while the feedforward tables
were driven with lookup value v.  From it, all shot-level quantities follow
exactly:

* ideal (noiseless) expectation: trace over the diagonal s == v,
* expectation under a syndrome channel q with a fixed mitigation mask f:
  sum_{s,t} q[s ^ t] T[b, s, t ^ f],
* the mitigated estimator's mean: sum_f alpha[f] of the above, which the
  weights make equal to the ideal value (the identity the acceptance suite
  checks to 1e-9).

Everything here is float64/complex128 and deliberately independent of the
shot engine's sampling machinery.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .bits import SizeCapError
from .circuits import DynamicCircuit, Gate, Observable
from .mitigation import MitigationWeights

DEFAULT_MAX_N = 12
DEFAULT_MAX_M = 6


@dataclass
class TrajectoryTensor:
    tensor: np.ndarray           # (B, 2**m, 2**m) real
    branch_probs: np.ndarray     # (2**m,) true-outcome probabilities (no errors)
    names: list[str]
    n: int
    m: int

    def ideal(self, b: int = 0) -> float:
        """Noiseless expectation: every lookup equals the true outcome."""
        return float(np.trace(self.tensor[b]))

    def masked(self, b: int, f: int, q) -> float:
        """Expectation under syndrome channel q with fixed mask f."""
        q = np.asarray(q, dtype=np.float64)
        k = self.tensor.shape[1]
        if q.size != k:
            raise ValueError("q length must be 2**m")
        idx = np.arange(k)
        qmat = q[idx[:, None] ^ idx[None, :]]
        return float((qmat * self.tensor[b][:, idx ^ f]).sum())

    def mitigated(self, b: int, q, weights) -> float:
        """Mean of the mask-sampled estimator: sum_f alpha[f] * masked(b, f, q)."""
        alpha = weights.alpha() if isinstance(weights, MitigationWeights) else np.asarray(weights)
        k = self.tensor.shape[1]
        if alpha.size != k:
            raise ValueError("alpha length must be 2**m")
        return float(sum(alpha[f] * self.masked(b, f, q) for f in range(k)))


def _project(state: np.ndarray, qubits, outcome: int, n: int) -> np.ndarray:
    """Unnormalized projection onto computational ``outcome`` of ``qubits``."""
    idx = np.arange(state.size)
    mask = pattern = 0
    k = len(qubits)
    for j, q in enumerate(qubits):
        bitpos = 1 << (n - 1 - q)
        mask |= bitpos
        if (outcome >> (k - 1 - j)) & 1:
            pattern |= bitpos
    out = np.where((idx & mask) == pattern, state, 0.0)
    return out


def exact_trajectory_tensor(circuit: DynamicCircuit, observables,
                            max_n: int = DEFAULT_MAX_N,
                            max_m: int = DEFAULT_MAX_M) -> TrajectoryTensor:
    """Enumerate all trajectories of ``circuit`` against ``observables``.

    ``observables`` is a list of (name, Observable); evaluation is exact and
    exhaustive (4**m leaf branches), so the circuit must fit the caps.
    """
    obs = list(observables)
    n, m = circuit.n, circuit.m
    if n > max_n:
        raise SizeCapError(f"oracle capped at {max_n} qubits, circuit has {n}")
    if m > max_m:
        raise SizeCapError(f"oracle capped at {max_m} measured bits, circuit has {m}")
    for layer in circuit.layers:
        if layer.repeat != 1:
            raise ValueError("exact oracle does not model QND repetition")

    k = 1 << m
    tensor = np.zeros((len(obs), k, k))
    probs = np.zeros(k)
    widths = circuit.layer_widths

    init = engine.simulate_gates(circuit.prep, n)

    def walk(state, li, s_acc, v_acc):
        if li == len(circuit.layers):
            if s_acc == v_acc:
                probs[s_acc] = float(np.vdot(state, state).real)
            for b, (_, ob) in enumerate(obs):
                tensor[b, s_acc, v_acc] = float(np.vdot(state, ob.apply(state, n)).real)
            return
        layer = circuit.layers[li]
        state = engine.simulate_gates(layer.pre_gates, n, state=state)
        for s_l in range(1 << layer.m):
            projected = _project(state, layer.measured, s_l, n)
            if not projected.any():
                continue  # zero-amplitude branch contributes nothing
            for v_l in range(1 << layer.m):
                branch = engine.simulate_gates(layer.table[v_l], n, state=projected)
                branch = engine.simulate_gates(layer.post_gates, n, state=branch)
                walk(branch,
                     li + 1,
                     (s_acc << layer.m) | s_l,
                     (v_acc << layer.m) | v_l)

    walk(init, 0, 0, 0)
    return TrajectoryTensor(tensor=tensor, branch_probs=probs,
                            names=[name for name, _ in obs], n=n, m=m)


def exact_setting_observables(setting) -> list[tuple[str, Observable]]:
    """Oracle observables equivalent to a terminal setting's diagonal reads.

    The setting's basis gates are folded into a diagonal observable
    U^dag D U, evaluated without shot sampling.
    """
    out = []
    for name, ob in setting.observables:
        if setting.basis_gates:
            out.append((name, _RotatedDiagonal(ob, setting)))
        else:
            out.append((name, _DiagonalOnMeasured(ob, setting)))
    return out


class _DiagonalOnMeasured(Observable):
    def __init__(self, ob: Observable, setting):
        self.values = ob.values_on_outcomes(setting.measured)
        self.measured = setting.measured
        self.support = setting.measured
        self.norm = ob.norm2()

    def norm2(self):
        return self.norm

    def apply(self, state, n):
        idx = np.arange(state.size)
        k = len(self.measured)
        pattern = np.zeros(state.size, dtype=np.int64)
        for j, q in enumerate(self.measured):
            pattern |= ((idx >> (n - 1 - q)) & 1) << (k - 1 - j)
        return state * self.values[pattern]


class _RotatedDiagonal(Observable):
    """U^dag D U with U the setting's basis change (exact path only)."""

    def __init__(self, ob: Observable, setting):
        self.diag = _DiagonalOnMeasured(ob, setting)
        self.gates = setting.basis_gates
        self.support = setting.measured

    def norm2(self):
        return self.diag.norm

    def apply(self, state, n):
        rotated = engine.simulate_gates(self.gates, n, state=state)
        rotated = self.diag.apply(rotated, n)
        # undo the basis change: apply the inverse gate list in reverse
        for g in reversed(self.gates):
            if g.matrix is None:
                back = g  # cx is self-inverse
            else:
                back = Gate(g.name + "_dag", g.qubits, g.matrix.conj().T)
            rotated = engine.simulate_gates([back], n, state=rotated)
        return rotated
