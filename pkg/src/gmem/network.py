"""One-neuron-per-pattern bidirectional memory.

Each stored pattern gets its own memory neuron. The neuron's outgoing
weights (memory -> pattern layer, ``W``) are learned with the delta rule
so that firing the neuron reproduces the pattern. Its incoming weights
(pattern layer -> memory, ``V``) are learned with one delta-rule step from
zero, which makes the neuron's activation proportional to the overlap
between a probe and its pattern. Recall is winner-take-all over those
activations, with a threshold to reject unknown probes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .patterns import BitPattern, DimensionError, MaskedPattern, PatternSet

W_TOL = 1e-12
W_MAX_STEPS = 10_000


class ConvergenceError(RuntimeError):
    """The memory->pattern weight update failed to converge."""


class NormMode(enum.Enum):
    PRESENTED = "presented"
    R = "r"


@dataclass(frozen=True)
class HyperParams:
    eps_w: float = 1.0
    eps_v: float = 1.5
    theta: float = 1.0
    tau: float = 0.70

    def __post_init__(self):
        for name in ("eps_w", "eps_v", "theta", "tau"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True, eq=False)
class RecallResult:
    scores: np.ndarray
    winner: int
    winner_score: float
    accepted: bool
    presented_count: int


Probe = Union[BitPattern, MaskedPattern]


def _as_masked(probe: Probe) -> MaskedPattern:
    if isinstance(probe, MaskedPattern):
        return probe
    return MaskedPattern.full(probe)


def delta_step_w(w: np.ndarray, d: np.ndarray, eps_w: float, x: float = 1.0) -> np.ndarray:
    """One gradient-descent update of a memory neuron's outgoing weights.

    The pattern layer output is ``y = w * x`` (no summation: a single
    memory neuron drives each cell), and the update is
    ``w + eps_w * (d - y) * x``.
    """
    y = w * x
    return w + eps_w * (d - y) * x


def learn_w_row(d: np.ndarray, eps_w: float, tol: float = W_TOL, max_steps: int = W_MAX_STEPS):
    """Run the delta rule from zero until the row reproduces ``d``.

    Returns ``(row, steps)``. With ``eps_w == 1`` a single step is exact.
    """
    d = np.asarray(d, dtype=np.float64)
    w = np.zeros_like(d)
    first = None
    for step in range(1, max_steps + 1):
        w = delta_step_w(w, d, eps_w)
        resid = float(np.max(np.abs(d - w))) if d.size else 0.0
        if resid <= tol:
            return w, step
        if not math.isfinite(resid) or (first is not None and resid > first):
            raise ConvergenceError(f"delta rule diverges at eps_w={eps_w} (residual {resid:g} after {step} steps)")
        if first is None:
            first = resid
    raise ConvergenceError(f"delta rule did not converge at eps_w={eps_w} within {max_steps} steps")


def _exact_dot(row: np.ndarray, y: np.ndarray) -> float:
    # correctly rounded, so equal multisets of terms give equal sums
    return math.fsum((row * y).tolist())


class MemoryNet:
    """Memory neurons (rows of ``W`` and ``V``) over a fixed pattern layer of size ``R``."""

    def __init__(self, width: int, height: int, params: HyperParams | None = None):
        if width < 1 or height < 1:
            raise DimensionError(f"dimensions must be positive, got {width}x{height}")
        self.width = int(width)
        self.height = int(height)
        self.params = params if params is not None else HyperParams()
        self._n = 0
        self._w = np.zeros((0, self.R))
        self._v = np.zeros((0, self.R))
        self._v_ready = np.zeros(0, dtype=bool)

    @property
    def R(self) -> int:
        return self.width * self.height

    @property
    def N(self) -> int:
        return self._n

    @property
    def W(self) -> np.ndarray:
        w = self._w[: self._n]
        w.flags.writeable = False
        return w

    @property
    def V(self) -> np.ndarray:
        v = self._v[: self._n]
        v.flags.writeable = False
        return v

    def __repr__(self):
        return f"MemoryNet({self.width}x{self.height}, N={self._n}, {self.params})"

    def _reserve(self, n: int):
        cap = self._w.shape[0]
        if n <= cap:
            return
        cap = max(n, 2 * cap, 8)
        for name in ("_w", "_v"):
            old = getattr(self, name)
            grown = np.zeros((cap, self.R))
            grown[: self._n] = old[: self._n]
            setattr(self, name, grown)
        ready = np.zeros(cap, dtype=bool)
        ready[: self._n] = self._v_ready[: self._n]
        self._v_ready = ready

    def _check_index(self, index: int):
        if not 0 <= index < self._n:
            raise IndexError(f"memory neuron {index} out of range (N={self._n})")

    def _check_dims(self, p: BitPattern):
        if p.shape != (self.width, self.height):
            raise DimensionError(f"pattern is {p.width}x{p.height}, net is {self.width}x{self.height}")

    @classmethod
    def from_weights(cls, width, height, params, W, V) -> "MemoryNet":
        net = cls(width, height, params)
        W = np.asarray(W, dtype=np.float64)
        V = np.asarray(V, dtype=np.float64)
        if W.shape != V.shape or W.ndim != 2 or W.shape[1] != net.R:
            raise DimensionError(f"weight shapes {W.shape}/{V.shape} do not fit R={net.R}")
        net._w = W.copy()
        net._v = V.copy()
        net._n = W.shape[0]
        net._v_ready = np.ones(net._n, dtype=bool)
        return net

    def copy(self) -> "MemoryNet":
        return MemoryNet.from_weights(self.width, self.height, self.params, self.W, self.V)

    # -- training ------------------------------------------------------------

    def train_w(self, p: BitPattern) -> int:
        """Append a memory neuron for ``p`` and learn its outgoing weights."""
        self._check_dims(p)
        row, _ = learn_w_row(p.bits, self.params.eps_w)
        index = self._n
        self._reserve(index + 1)
        self._w[index] = row
        self._v[index] = 0.0
        self._v_ready[index] = False
        self._n += 1
        return index

    def train_v(self, index: int) -> None:
        """Learn the incoming weights of neuron ``index`` (one step from zero, q reset to 0)."""
        self._check_index(index)
        y = self._w[index] * 1.0
        q = 0.0
        v = np.zeros(self.R)
        self._v[index] = v + self.params.eps_v * (self.params.theta - q) * y
        self._v_ready[index] = True

    def store(self, p: BitPattern) -> int:
        index = self.train_w(p)
        self.train_v(index)
        return index

    def store_all(self, patterns: PatternSet) -> None:
        """Store every pattern in order. On any failure the net is left as it was."""
        for i, p in enumerate(patterns):
            if p.shape != (self.width, self.height):
                raise DimensionError(f"pattern {i} is {p.width}x{p.height}, net is {self.width}x{self.height}")
        n0 = self._n
        try:
            for p in patterns:
                self.store(p)
        except Exception:
            self._n = n0
            raise

    # -- errors --------------------------------------------------------------

    def compute_error_E(self, index: int, target: BitPattern) -> float:
        """Half squared error between pattern-layer output of neuron ``index`` and ``target``."""
        self._check_index(index)
        self._check_dims(target)
        y = self._w[index] * 1.0
        return 0.5 * float(np.sum((target.bits - y) ** 2))

    def compute_error_e(self, probe: Probe) -> float:
        """Half squared error of the raw memory activations against ``theta``."""
        probe = _as_masked(probe)
        self._check_dims(probe.pattern)
        if self._n == 0:
            return 0.0
        q = self._raw_activations(probe)
        return 0.5 * float(np.sum((self.params.theta - q) ** 2))

    # -- recall --------------------------------------------------------------

    def _raw_activations(self, probe: MaskedPattern) -> np.ndarray:
        y = probe.visible_bits().astype(np.float64)
        V = self._v[: self._n]
        q = V @ y
        if q.size:
            # recompute the leaders with correctly rounded sums so that exact
            # ties stay exact regardless of BLAS accumulation order
            top = q.max()
            near = np.flatnonzero(q >= top - 1e-9 * abs(top))
            cols = np.flatnonzero(y)
            for i in near:
                q[i] = _exact_dot(V[i, cols], y[cols])
        return q

    def activations(self, probe: Probe, norm: NormMode = NormMode.PRESENTED) -> np.ndarray:
        probe = _as_masked(probe)
        self._check_dims(probe.pattern)
        if self._n == 0:
            raise ValueError("net has no stored patterns")
        q = self._raw_activations(probe)
        denom = self.R if NormMode(norm) is NormMode.R else probe.presented_count
        return q / denom

    def recall(self, probe: Probe, norm: NormMode = NormMode.PRESENTED, tau: float | None = None) -> RecallResult:
        probe = _as_masked(probe)
        scores = self.activations(probe, norm)
        scores.flags.writeable = False
        winner = int(np.argmax(scores))
        best = float(scores[winner])
        tau = self.params.tau if tau is None else tau
        return RecallResult(scores, winner, best, best >= tau, probe.presented_count)

    def reconstruct(self, index: int) -> BitPattern:
        """Pattern-layer output when neuron ``index`` alone fires, rounded to {0, 1}."""
        self._check_index(index)
        y = self._w[index] * 1.0
        return BitPattern(self.width, self.height, (y >= 0.5).astype(np.uint8))


def new_net(width: int, height: int, params: HyperParams | None = None) -> MemoryNet:
    return MemoryNet(width, height, params)
