"""Quasiprobability readout-error mitigation.

Inverting the symmetrized channel Q[s, f] = q[s ^ f] amounts to one column of
Q^{-1}: weights alpha with sum_f alpha[f] q[s ^ f] = [s == 0].  Because Q is
an XOR-circulant the solution is a Walsh-spectrum division,

    alpha = fwht(1 / fwht(q)) / 2**m,

computable in O(m 2**m) and, for product-structured q, factor by factor
without ever expanding 2**m entries.  Shots are run with a random mask f
drawn from |alpha| / xi (xi = ||alpha||_1) XORed onto the reported outcomes;
the signed, xi-scaled sample mean is an unbiased estimator of the
noiseless expectation at a sampling-overhead cost of xi**2 in variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bits import AliasSampler, check_size, fwht, num_bits
from .readout import (GeneralModel, LayeredModel, SyndromeModel,
                      TensoredModel, UniformModel)

SINGULAR_ATOL = 1e-12


class SingularChannelError(Exception):
    """The channel spectrum has a (numerically) zero eigenvalue; no weights exist."""


class MitigationWeights:
    """Base interface: sampling overhead ``xi`` plus mask sampling."""

    m: int
    xi: float

    def sample(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``size`` masks; returns (mask indices, signs in {-1, +1})."""
        raise NotImplementedError

    def alpha(self) -> np.ndarray:
        """Materialize the full weight vector (subject to the size cap)."""
        raise NotImplementedError


def _solve_alpha(q: np.ndarray) -> np.ndarray:
    lam = fwht(q)
    bad = np.abs(lam) < SINGULAR_ATOL
    if np.any(bad):
        raise SingularChannelError(
            f"channel eigenvalue(s) {np.flatnonzero(bad).tolist()} vanish; "
            "the readout channel is not invertible")
    return fwht(1.0 / lam) / q.size


class GeneralWeights(MitigationWeights):
    """Weights for an arbitrary joint q; O(m 2**m) init, O(1) per draw."""

    def __init__(self, q):
        q = np.asarray(q, dtype=np.float64)
        self.m = num_bits(q.size)
        self._alpha = _solve_alpha(q)
        self.xi = float(np.abs(self._alpha).sum())
        self._signs = np.where(self._alpha < 0, -1, 1).astype(np.int8)
        self._sampler = AliasSampler(np.abs(self._alpha) / self.xi)

    def sample(self, rng, size):
        f = self._sampler.draw(rng, size=size)
        return f, self._signs[f]

    def alpha(self):
        return self._alpha.copy()


class TensoredWeights(MitigationWeights):
    """Per-bit closed form: alpha_bit = [1-r, -r] / (1-2r); O(m) everything."""

    def __init__(self, rates):
        rates = np.asarray(rates, dtype=np.float64)
        if np.any(np.abs(1.0 - 2.0 * rates) < SINGULAR_ATOL):
            raise SingularChannelError("a per-bit flip rate of 1/2 is not invertible")
        self.m = rates.size
        self.rates = rates
        denom = 1.0 - 2.0 * rates
        self._alpha_bits = np.stack([(1.0 - rates) / denom, -rates / denom])  # (2, m)
        abs_bits = np.abs(self._alpha_bits)
        self._xi_bits = abs_bits.sum(axis=0)
        self.xi = float(np.prod(self._xi_bits))
        self._p_flip = abs_bits[1] / self._xi_bits
        self._sign_bits = np.where(self._alpha_bits < 0, -1, 1).astype(np.int8)  # (2, m)

    def sample(self, rng, size):
        flips = rng.random((size, self.m)) < self._p_flip
        weights = 1 << np.arange(self.m - 1, -1, -1)
        f = (flips.astype(np.int64) @ weights)
        signs = np.where(flips, self._sign_bits[1], self._sign_bits[0]).prod(axis=1)
        return f, signs.astype(np.int8)

    def alpha(self):
        check_size(self.m, "expanded tensored weights")
        a = np.array([1.0])
        for j in range(self.m):
            a = np.kron(a, self._alpha_bits[:, j])
        return a


class UniformWeights(MitigationWeights):
    """All bits share one flip rate; O(1) init and state, O(m) per draw."""

    def __init__(self, m: int, rate: float):
        if abs(1.0 - 2.0 * rate) < SINGULAR_ATOL:
            raise SingularChannelError("flip rate 1/2 is not invertible")
        self.m = m
        self.rate = float(rate)
        self.xi = float(abs(1.0 / (1.0 - 2.0 * rate)) ** m)
        self._negative_flip = rate > 0.5  # sign pattern flips if 1-2r < 0

    def sample(self, rng, size):
        # |alpha_1| / (|alpha_0| + |alpha_1|) simplifies to the rate itself
        flips = rng.random((size, self.m)) < self.rate
        weights = 1 << np.arange(self.m - 1, -1, -1)
        f = flips.astype(np.int64) @ weights
        if self._negative_flip:
            signs = np.where((~flips).sum(axis=1) % 2 == 1, -1, 1)
        else:
            signs = np.where(flips.sum(axis=1) % 2 == 1, -1, 1)
        return f, signs.astype(np.int8)

    def alpha(self):
        return TensoredWeights(np.full(self.m, self.rate)).alpha()


class LayeredWeights(MitigationWeights):
    """Per-layer factors; the joint weight vector is their Kronecker product."""

    def __init__(self, parts: list[MitigationWeights]):
        if not parts:
            raise ValueError("layered weights need at least one part")
        self.parts = parts
        self.m = sum(p.m for p in parts)
        self.xi = float(np.prod([p.xi for p in parts]))

    @property
    def widths(self) -> list[int]:
        return [p.m for p in self.parts]

    def sample(self, rng, size):
        f = np.zeros(size, dtype=np.int64)
        signs = np.ones(size, dtype=np.int8)
        for p in self.parts:
            fp, sp = p.sample(rng, size)
            f = (f << p.m) | fp
            signs = signs * sp
        return f, signs

    def alpha(self):
        check_size(self.m, "expanded layered weights")
        a = np.array([1.0])
        for p in self.parts:
            a = np.kron(a, p.alpha())
        return a


def solve_weights(model) -> MitigationWeights:
    """Mitigation weights for a syndrome model, preserving its structure."""
    if isinstance(model, UniformModel):
        return UniformWeights(model.m, model.rate)
    if isinstance(model, TensoredModel):
        return TensoredWeights(model.rates)
    if isinstance(model, LayeredModel):
        return LayeredWeights([solve_weights(p) for p in model.parts])
    if isinstance(model, GeneralModel):
        return GeneralWeights(model.q)
    if isinstance(model, SyndromeModel):
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return GeneralWeights(np.asarray(model, dtype=np.float64))


def overhead_bound(eta: float) -> float:
    """Upper bound xi <= 1/(1-2*eta) in terms of the total error eta = 1-q[0].

    Tight at m = 1 (single bit attains equality); requires eta < 1/2.
    """
    if not 0.0 <= eta < 0.5:
        raise ValueError("bound requires total error in [0, 1/2)")
    return 1.0 / (1.0 - 2.0 * eta)


def shot_budget(xi: float, n_target: int) -> int:
    """Shots needed to match the precision of n_target noiseless shots."""
    if n_target < 0:
        raise ValueError("n_target must be non-negative")
    return math.ceil(xi * xi * n_target)


def sensitivity_bound(xi: float, d: float, norm: float = 1.0) -> float:
    """Worst-case estimate shift when weights come from a miscalibrated q'.

    For total-variation distance d between the q used to solve the weights and
    the q' actually characterizing the device, both the mitigated expectation
    and xi itself move by at most 2 xi^2 d / (1 - 2 xi d) (times the spectral
    norm for the expectation).  Valid only while 2 xi d < 1.
    """
    if d < 0:
        raise ValueError("distance must be non-negative")
    if 2.0 * xi * d >= 1.0:
        raise ValueError("sensitivity bound requires 2*xi*d < 1")
    return 2.0 * xi * xi * d / (1.0 - 2.0 * xi * d) * norm


def raw_error_bound(eta: float, norm: float = 1.0) -> float:
    """Worst-case bias of the *unmitigated* estimate: 2 eta/(1-2 eta) * ||O||."""
    if not 0.0 <= eta < 0.5:
        raise ValueError("bound requires total error in [0, 1/2)")
    return 2.0 * eta / (1.0 - 2.0 * eta) * norm


@dataclass
class EstimatorAccumulator:
    """Streaming moments of signed single-shot outcomes o = value * sign.

    estimate = xi * mean(o); stderr propagates the xi scale.  Shots discarded
    by post-selection are counted but contribute no moments.
    """

    xi: float = 1.0
    n: int = 0
    sum_o: float = 0.0
    sum_o2: float = 0.0
    n_discarded: int = 0

    def add(self, values, signs=None) -> None:
        values = np.asarray(values, dtype=np.float64)
        o = values if signs is None else values * np.asarray(signs)
        self.n += o.size
        self.sum_o += float(o.sum())
        self.sum_o2 += float((o * o).sum())

    def add_moments(self, n: int, sum_o: float, sum_o2: float, n_discarded: int = 0) -> None:
        self.n += n
        self.sum_o += sum_o
        self.sum_o2 += sum_o2
        self.n_discarded += n_discarded

    @property
    def estimate(self) -> float:
        if self.n == 0:
            raise ValueError("no accepted shots")
        return self.xi * self.sum_o / self.n

    @property
    def single_shot_variance(self) -> float:
        """Sample variance of the xi-scaled single-shot outcomes."""
        if self.n < 2:
            return 0.0
        mean = self.sum_o / self.n
        var = (self.sum_o2 / self.n - mean * mean) * self.n / (self.n - 1)
        return self.xi * self.xi * max(var, 0.0)

    @property
    def stderr(self) -> float:
        if self.n == 0:
            raise ValueError("no accepted shots")
        return math.sqrt(self.single_shot_variance / self.n)


def project_nonnegative(v) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = sum v}.

    Zeroes the most negative entries and spreads their deficit uniformly over
    the rest (equivalently: x = max(v - tau, 0) with tau chosen to preserve
    the total).  Preserves the total exactly.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.sum() < 0.0:
        raise ValueError("cannot project: total is negative")
    order = np.argsort(v)
    out = v[order].astype(np.float64, copy=True)
    deficit = 0.0
    for i in range(out.size):
        remaining = out.size - i
        if out[i] + deficit / remaining < 0.0:
            deficit += out[i]
            out[i] = 0.0
        else:
            out[i:] += deficit / remaining
            break
    result = np.empty_like(out)
    result[order] = out
    return result


def terminal_rem(counts, q, project: bool = True) -> np.ndarray:
    """Invert a symmetrized readout channel on terminal counts.

    counts is the histogram of reported terminal outcomes; the result is the
    channel-inverted histogram (same total), optionally projected onto the
    nearest non-negative histogram.
    """
    c = np.asarray(counts, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if c.shape != q.shape:
        raise ValueError("counts and q must have equal length")
    lam = fwht(q)
    if np.any(np.abs(lam) < SINGULAR_ATOL):
        raise SingularChannelError("terminal channel is not invertible")
    corrected = fwht(fwht(c) / lam) / c.size
    return project_nonnegative(corrected) if project else corrected
