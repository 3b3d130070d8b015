"""Two-input neuron built on shaped-pulse two-photon absorption.

Photon pairs at ``w0/2 - W`` and ``w0/2 + W`` interfere; the excitation
probability is proportional to

    |integral dW a(W) exp(i (theta(W) + w1(W) x1 + w2(W) x2))|^2

over the pulse half-width ``[-W0, W0]``. The integral is discretized with a
Gauss-Legendre rule, so every node acts as one interfering alternative with
its own amplitude, phase and two input weights.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .approximation import ExpSum

DEFAULT_NODES = 32


def _sample(fn: Callable, x: np.ndarray) -> np.ndarray:
    # constant callables may return a scalar
    return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape).copy()


def gauss_legendre(half_width: float, node_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``[-half_width, half_width]``."""
    x, w = leggauss(node_count)
    return half_width * x, half_width * w


@dataclass(frozen=True, eq=False)
class SlmNeuron:
    half_width: float
    offsets: np.ndarray
    weights: np.ndarray
    a: np.ndarray
    theta: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    norm: float = 1.0

    def __post_init__(self):
        arrays = {}
        for name in ("offsets", "weights", "a", "theta", "w1", "w2"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            arr.setflags(write=False)
            arrays[name] = arr
        if len({len(v) for v in arrays.values()}) != 1:
            raise ValueError("node arrays disagree in length")
        if not self.half_width > 0 or not self.norm > 0:
            raise ValueError("half_width and norm must be positive")
        if np.any(arrays["weights"] <= 0) or np.any(arrays["a"] < 0):
            raise ValueError("quadrature weights must be positive and a >= 0")
        if np.any(np.abs(arrays["offsets"]) > self.half_width * (1 + 1e-12)):
            raise ValueError("node offsets must lie inside the pulse bandwidth")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @classmethod
    def from_functions(
        cls,
        half_width: float,
        node_count: int,
        a: Callable,
        theta: Callable,
        w1: Callable,
        w2: Callable,
        norm: float = 1.0,
    ) -> "SlmNeuron":
        """Sample the node parameter functions of the offset ``W``."""
        offsets, weights = gauss_legendre(half_width, node_count)
        return cls(half_width, offsets, weights, _sample(a, offsets),
                   _sample(theta, offsets), _sample(w1, offsets), _sample(w2, offsets), norm)

    @property
    def node_count(self) -> int:
        return len(self.offsets)

    @property
    def arity(self) -> int:
        return 2

    def node_amplitudes(self, inputs) -> np.ndarray:
        """Per-node complex contributions, shape ``(P, nodes)``."""
        x = np.atleast_2d(np.asarray(inputs, dtype=float))
        if x.shape[1] != 2:
            raise ValueError("the SLM neuron takes exactly two inputs")
        phase = self.theta + np.outer(x[:, 0], self.w1) + np.outer(x[:, 1], self.w2)
        return self.weights * self.a * np.exp(1j * phase)

    def outputs(self, inputs) -> np.ndarray:
        z = self.node_amplitudes(inputs).sum(axis=1)
        return self.norm * (z.real**2 + z.imag**2)

    def excitation_probability(self, x1: float, x2: float) -> float:
        return float(self.outputs([[x1, x2]])[0])

    def parameters(self) -> np.ndarray:
        """``(a, theta, w1, w2)`` for each node, node-major."""
        return np.stack([self.a, self.theta, self.w1, self.w2], axis=1).reshape(-1)

    def with_parameters(self, vector) -> "SlmNeuron":
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (4 * self.node_count,):
            raise ValueError("parameter vector has the wrong length")
        table = vector.reshape(self.node_count, 4)
        return SlmNeuron(
            self.half_width, self.offsets, self.weights,
            np.maximum(table[:, 0], 0.0), table[:, 1], table[:, 2], table[:, 3],
            self.norm,
        )

    def with_norm(self, norm: float) -> "SlmNeuron":
        return SlmNeuron(self.half_width, self.offsets, self.weights, self.a,
                         self.theta, self.w1, self.w2, norm)

    def calibrated(self, inputs) -> "SlmNeuron":
        """Copy whose largest output over ``inputs`` is exactly 1."""
        peak = float(np.max(self.outputs(inputs))) / self.norm
        if peak <= 0:
            raise ValueError("neuron output is identically zero on these inputs")
        return self.with_norm(1.0 / peak)

    def to_dict(self) -> dict:
        return {
            "half_width": self.half_width,
            "norm": self.norm,
            "nodes": [
                {"omega_offset": float(o), "weight": float(w), "a": float(a),
                 "theta": float(t), "w1": float(u), "w2": float(v)}
                for o, w, a, t, u, v in zip(self.offsets, self.weights, self.a,
                                            self.theta, self.w1, self.w2)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SlmNeuron":
        nodes = data["nodes"]
        col = lambda key: [node[key] for node in nodes]
        return cls(data["half_width"], col("omega_offset"), col("weight"), col("a"),
                   col("theta"), col("w1"), col("w2"), data.get("norm", 1.0))


@dataclass(frozen=True)
class SlmSpectra:
    """Pulse description before reduction to node parameters.

    ``amplitude`` is the spectral amplitude, ``phase`` the spectral phase of
    the pulse entering the modulator, ``increment`` the programmable phase
    multiplier applied per frequency, ``transition`` the two-photon resonance.
    """

    amplitude: Callable
    phase: Callable
    increment: Callable
    transition: float
    half_width: float

    def __post_init__(self):
        if not self.transition > 0 or not self.half_width > 0:
            raise ValueError("transition and half_width must be positive")


def from_spectra(s: SlmSpectra, node_count: int = DEFAULT_NODES, norm: float = 1.0) -> SlmNeuron:
    """Node parameters of the pair ``(w0/2 - W, w0/2 + W)`` at each quadrature node.

    Input 1 scales the increment on the lower photon, input 2 on the upper.
    """
    if node_count < 2:
        raise ValueError("need at least two quadrature nodes")
    offsets, weights = gauss_legendre(s.half_width, node_count)
    center = s.transition / 2
    lower, upper = center - offsets, center + offsets
    a = _sample(s.amplitude, upper) * _sample(s.amplitude, lower)
    theta = _sample(s.phase, lower) + _sample(s.phase, upper)
    w1 = _sample(s.increment, lower)
    w2 = _sample(s.increment, upper)
    return SlmNeuron(s.half_width, offsets, weights, a, theta, w1, w2, norm)


def to_expsum(neuron: SlmNeuron, omega: float = 2 * math.pi) -> ExpSum:
    """The discretized neuron as an exponential sum in waveguide form.

    Node ``q`` becomes a term with amplitude ``rho_q a_q``, lengths
    ``(w1_q, w2_q) / omega`` and bias ``theta_q / omega``; nodes with
    ``a_q = 0`` are dropped. ``neuron.norm * |result(x)|**2`` equals the
    excitation probability.
    """
    amp = neuron.weights * neuron.a
    keep = amp > 0
    if not np.any(keep):
        raise ValueError("every node has zero amplitude")
    lengths = np.stack([neuron.w1, neuron.w2], axis=1)[keep] / omega
    return ExpSum(omega, amp[keep], lengths, neuron.theta[keep] / omega)


def random_slm_neuron(
    rng: np.random.Generator,
    node_count: int = DEFAULT_NODES,
    half_width: float = 1.0,
    weight_scale: float = math.pi,
) -> SlmNeuron:
    offsets, weights = gauss_legendre(half_width, node_count)
    return SlmNeuron(
        half_width, offsets, weights,
        rng.uniform(0.0, 1.0, node_count),
        rng.uniform(-math.pi, math.pi, node_count),
        rng.uniform(-weight_scale, weight_scale, node_count),
        rng.uniform(-weight_scale, weight_scale, node_count),
    )
