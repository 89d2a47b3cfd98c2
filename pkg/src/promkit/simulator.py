"""Shot-based execution of dynamic circuits with injectable readout errors.

Readout errors corrupt only the classical record: the statevector collapses
on the *true* outcome, while the reported outcome (true XOR syndrome, or a
confusion-matrix sample under the asymmetric model) drives the feedforward
lookup.  Mitigation masks are XORed onto the reported outcome before the
lookup, and each shot carries the sign of its mask's quasiprobability weight.

Shots run in fixed-size batches; batch b of trial t draws all randomness from
an independent stream keyed by (seed, t, b), so results are bit-identical for
a given (config, seed) no matter how batches are scheduled across workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import engine
from .bits import index_to_bits, stream
from .circuits import DynamicCircuit, TerminalSetting
from .mitigation import EstimatorAccumulator, MitigationWeights, terminal_rem
from .readout import ConfusionMatrix, SyndromeModel

MAX_BATCH = 16384
TARGET_BATCH_ELEMENTS = 1 << 21  # ~16 MiB of complex64 amplitudes per batch


def batch_size_for(n: int) -> int:
    """Deterministic batch size: depends only on the qubit count."""
    return int(min(MAX_BATCH, max(64, TARGET_BATCH_ELEMENTS >> n)))


@dataclass
class NoiseInjector:
    """Configuration of the injected readout errors.

    Exactly one of the three mechanisms may be active:

    * ``model``     — symmetrized channel: a joint syndrome distribution over
                      all mid-circuit bits (layer slices are XORed onto the
                      reported outcomes).  Bit-flip averaging is implicit in
                      this mode (the channel is already symmetric).
    * ``matrices``  — asymmetric hardware: one confusion matrix per layer.
                      With ``bfa=True`` each measurement is sandwiched in a
                      uniformly random X-mask (applied to the state) and the
                      report is classically flipped back.
    * ``forced``    — deterministic per-layer syndromes (test hook).

    ``terminal`` optionally adds a symmetrized channel on the terminal
    measurement, the target of terminal readout-error correction.
    """

    model: SyndromeModel | None = None
    matrices: list[ConfusionMatrix] | None = None
    bfa: bool = False
    forced: list[int] | None = None
    terminal: SyndromeModel | None = None

    def __post_init__(self):
        active = [x is not None for x in (self.model, self.matrices, self.forced)]
        if sum(active) > 1:
            raise ValueError("choose one of model / matrices / forced")
        if self.bfa and self.matrices is None:
            raise ValueError("bfa only applies to the asymmetric (matrices) mode")

    def validate_for(self, circuit: DynamicCircuit, setting: TerminalSetting) -> None:
        if self.model is not None and self.model.m != circuit.m:
            raise ValueError(f"noise model covers {self.model.m} bits, "
                             f"circuit measures {circuit.m}")
        if self.matrices is not None:
            if len(self.matrices) != len(circuit.layers):
                raise ValueError("need one confusion matrix per layer")
            for mat, layer in zip(self.matrices, circuit.layers):
                if mat.m_bits != layer.m:
                    raise ValueError("confusion matrix width mismatch")
        if self.forced is not None and len(self.forced) != len(circuit.layers):
            raise ValueError("need one forced syndrome per layer")
        if self.terminal is not None and self.terminal.m != len(setting.measured):
            raise ValueError("terminal noise width mismatch")

    def is_real_safe(self) -> bool:
        return True  # noise only adds X gates / classical flips


@dataclass
class RunResult:
    """Aggregated outcome of a run of one terminal setting."""

    setting: TerminalSetting
    shots: int
    accepted: int
    discarded: int
    signed_counts: np.ndarray              # (2, 2**k): [mask-sign +, mask-sign -]
    layer_reported_counts: list[np.ndarray]  # per layer, consensus reports (accepted shots)
    layer_flip_counts: list[np.ndarray]      # per layer, per-bit consensus != true (accepted)
    xi: float = 1.0

    def merge(self, other: "RunResult") -> "RunResult":
        self.shots += other.shots
        self.accepted += other.accepted
        self.discarded += other.discarded
        self.signed_counts += other.signed_counts
        for mine, theirs in zip(self.layer_reported_counts, other.layer_reported_counts):
            mine += theirs
        for mine, theirs in zip(self.layer_flip_counts, other.layer_flip_counts):
            mine += theirs
        return self

    @property
    def counts(self) -> np.ndarray:
        """Plain histogram of terminal outcomes (signs ignored)."""
        return self.signed_counts.sum(axis=0)


@dataclass
class ShotRecord:
    """Full classical record of a single shot (unit-test hook)."""

    true_outcomes: list[int]
    reported_outcomes: list[int]
    lookup_indices: list[int]
    mask: int
    sign: int
    discarded: bool
    terminal_outcome: int | None


@dataclass
class ObservableEstimate:
    name: str
    estimate: float
    stderr: float
    xi: float
    accepted: int
    discarded: int
    single_shot_variance: float


def _pick_dtype(circuit: DynamicCircuit, setting: TerminalSetting, dtype):
    if dtype is not None:
        return dtype
    real = circuit.is_real() and all(g.is_real for g in setting.basis_gates)
    return np.float32 if real else np.complex64


def _apply_table(states, layer, lookup, n):
    for v in np.unique(lookup):
        gates = layer.table[int(v)]
        if not gates:
            continue
        sel = lookup == v
        states[sel] = engine.apply_gates(states[sel], gates, n)
    return states


def _consensus(reports: np.ndarray, layer) -> tuple[np.ndarray, np.ndarray]:
    """Per-bit consensus across QND repetitions.

    Returns (consensus outcome, accepted mask).  ``reports`` is (repeat, batch).
    """
    if layer.repeat == 1:
        return reports[0], np.ones(reports.shape[1], dtype=bool)
    k = layer.m
    bits = index_to_bits(reports, k).astype(np.int64)       # (repeat, batch, k)
    ones = bits.sum(axis=0)                                  # (batch, k)
    if layer.consensus == "majority":
        cons_bits = (2 * ones > layer.repeat).astype(np.int64)
        accepted = np.ones(reports.shape[1], dtype=bool)
    else:  # unanimous
        agree = (ones == 0) | (ones == layer.repeat)
        accepted = agree.all(axis=1)
        cons_bits = bits[0]
    weights = 1 << np.arange(k - 1, -1, -1)
    return cons_bits @ weights, accepted


def _run_batch(circuit: DynamicCircuit, setting: TerminalSetting, size: int,
               noise: NoiseInjector | None, weights: MitigationWeights | None,
               rng: np.random.Generator, dtype, collect: bool = False):
    n = circuit.n
    widths = circuit.layer_widths
    max_rep = max((layer.repeat for layer in circuit.layers), default=1)

    # all classical randomness that can be presampled is drawn up front in a
    # fixed order, so the draw sequence does not depend on outcomes
    full_syndromes = None
    if noise is not None and noise.model is not None:
        full_syndromes = np.stack([noise.model.sample(rng, size) for _ in range(max_rep)])

    if weights is not None:
        masks, signs = weights.sample(rng, size)
        mask_parts = []
        shift = sum(widths)
        for w in widths:
            shift -= w
            mask_parts.append((masks >> shift) & ((1 << w) - 1))
    else:
        masks = np.zeros(size, dtype=np.int64)
        signs = np.ones(size, dtype=np.int8)
        mask_parts = [np.zeros(size, dtype=np.int64) for _ in widths]

    states = engine.zero_states(size, n, dtype=dtype)
    states = engine.apply_gates(states, circuit.prep, n)

    accepted = np.ones(size, dtype=bool)
    trues, reporteds, lookups = [], [], []
    bit_offset = 0
    for li, layer in enumerate(circuit.layers):
        states = engine.apply_gates(states, layer.pre_gates, n)

        if noise is not None and noise.matrices is not None and noise.bfa:
            twirl = rng.integers(0, 1 << layer.m, size=size)
            states = engine.apply_x_masks(states, layer.measured, twirl, n)
            states, twirled_true = engine.measure(states, layer.measured, n, rng)
            states = engine.apply_x_masks(states, layer.measured, twirl, n)
            true = twirled_true ^ twirl
        else:
            twirl = None
            states, true = engine.measure(states, layer.measured, n, rng)

        reports = np.empty((layer.repeat, size), dtype=np.int64)
        for j in range(layer.repeat):
            if noise is None:
                reports[j] = true
            elif noise.model is not None:
                part = (full_syndromes[j] >> (circuit.m - bit_offset - layer.m)) \
                    & ((1 << layer.m) - 1)
                reports[j] = true ^ part
            elif noise.matrices is not None:
                if noise.bfa:
                    tw = twirl if j == 0 else rng.integers(0, 1 << layer.m, size=size)
                    reports[j] = noise.matrices[li].sample_reported(true ^ tw, rng) ^ tw
                else:
                    reports[j] = noise.matrices[li].sample_reported(true, rng)
            elif noise.forced is not None:
                reports[j] = true ^ noise.forced[li]
            else:  # terminal-only injector
                reports[j] = true

        consensus, layer_ok = _consensus(reports, layer)
        accepted &= layer_ok
        lookup = consensus ^ mask_parts[li]
        states = _apply_table(states, layer, lookup, n)
        states = engine.apply_gates(states, layer.post_gates, n)

        trues.append(true)
        reporteds.append(consensus)
        lookups.append(lookup)
        bit_offset += layer.m

    states = engine.apply_gates(states, setting.basis_gates, n)
    if setting.measured:
        states, term = engine.measure(states, setting.measured, n, rng)
        if noise is not None and noise.terminal is not None:
            term = term ^ noise.terminal.sample(rng, size)
    else:
        term = np.zeros(size, dtype=np.int64)

    k_term = len(setting.measured)
    counts = np.zeros((2, 1 << k_term), dtype=np.int64)
    pos = accepted & (signs > 0)
    neg = accepted & (signs < 0)
    counts[0] = np.bincount(term[pos], minlength=1 << k_term)
    counts[1] = np.bincount(term[neg], minlength=1 << k_term)

    rep_counts, flip_counts = [], []
    for li, layer in enumerate(circuit.layers):
        rep_counts.append(np.bincount(reporteds[li][accepted], minlength=1 << layer.m))
        tb = index_to_bits(trues[li][accepted], layer.m).astype(np.int64)
        cb = index_to_bits(reporteds[li][accepted], layer.m).astype(np.int64)
        flip_counts.append((tb != cb).sum(axis=0))

    result = RunResult(setting=setting, shots=size, accepted=int(accepted.sum()),
                       discarded=int(size - accepted.sum()), signed_counts=counts,
                       layer_reported_counts=rep_counts, layer_flip_counts=flip_counts,
                       xi=weights.xi if weights is not None else 1.0)
    if not collect:
        return result
    records = [ShotRecord(true_outcomes=[int(t[i]) for t in trues],
                          reported_outcomes=[int(r[i]) for r in reporteds],
                          lookup_indices=[int(l[i]) for l in lookups],
                          mask=int(masks[i]), sign=int(signs[i]),
                          discarded=not bool(accepted[i]),
                          terminal_outcome=int(term[i]) if setting.measured else None)
               for i in range(size)]
    return result, records


def run_shots(circuit: DynamicCircuit, setting: TerminalSetting, shots: int, *,
              noise: NoiseInjector | None = None,
              weights: MitigationWeights | None = None,
              seed: int = 0, trial: int = 0, workers: int = 1,
              dtype=None) -> RunResult:
    """Run ``shots`` shots of one terminal setting and aggregate the counts."""
    if shots < 1:
        raise ValueError("shots must be positive")
    if noise is not None:
        noise.validate_for(circuit, setting)
    if weights is not None and weights.m != circuit.m:
        raise ValueError(f"weights cover {weights.m} bits, circuit measures {circuit.m}")
    dtype = _pick_dtype(circuit, setting, dtype)

    batch = batch_size_for(circuit.n)
    sizes = [batch] * (shots // batch)
    if shots % batch:
        sizes.append(shots % batch)

    def one(args):
        b, sz = args
        return _run_batch(circuit, setting, sz, noise, weights,
                          stream(seed, trial, b), dtype)

    tasks = list(enumerate(sizes))
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, tasks))
    else:
        parts = [one(t) for t in tasks]

    total = parts[0]
    for p in parts[1:]:
        total.merge(p)
    return total


def run_shot(circuit: DynamicCircuit, setting: TerminalSetting,
             rng: np.random.Generator, *, noise: NoiseInjector | None = None,
             weights: MitigationWeights | None = None, dtype=None) -> ShotRecord:
    """Single-shot path returning the full classical record."""
    if noise is not None:
        noise.validate_for(circuit, setting)
    dtype = _pick_dtype(circuit, setting, dtype)
    _, records = _run_batch(circuit, setting, 1, noise, weights, rng, dtype, collect=True)
    return records[0]


def estimate_observables(result: RunResult, terminal_q: np.ndarray | None = None,
                         ) -> list[ObservableEstimate]:
    """Turn a run's signed counts into per-observable estimates.

    If ``terminal_q`` is given, the terminal readout channel is inverted on
    the (per-sign) count histograms before evaluation.
    """
    plus = result.signed_counts[0].astype(np.float64)
    minus = result.signed_counts[1].astype(np.float64)
    if terminal_q is not None:
        plus = terminal_rem(plus, terminal_q)
        minus = terminal_rem(minus, terminal_q)
    out = []
    for name, values in result.setting.value_table():
        acc = EstimatorAccumulator(xi=result.xi)
        s1 = float(values @ (plus - minus))
        s2 = float((values * values) @ (plus + minus))
        acc.add_moments(result.accepted, s1, s2, result.discarded)
        out.append(ObservableEstimate(
            name=name, estimate=acc.estimate, stderr=acc.stderr, xi=result.xi,
            accepted=result.accepted, discarded=result.discarded,
            single_shot_variance=acc.single_shot_variance))
    return out


def aggregate_estimate(results: list[RunResult], value_vectors: list[np.ndarray],
                       scale: float = 1.0) -> tuple[float, float]:
    """Sum of per-setting estimates (independent settings), scaled.

    Used e.g. for stabilizer fidelities: each setting contributes the sum of
    its stabilizer values per shot; the total is scale * sum of settings, and
    the standard errors combine in quadrature.
    """
    total, var = 0.0, 0.0
    for result, values in zip(results, value_vectors):
        acc = EstimatorAccumulator(xi=result.xi)
        plus = result.signed_counts[0].astype(np.float64)
        minus = result.signed_counts[1].astype(np.float64)
        acc.add_moments(result.accepted, float(values @ (plus - minus)),
                        float((values * values) @ (plus + minus)))
        total += acc.estimate
        var += acc.stderr ** 2
    return scale * total, scale * float(np.sqrt(var))
