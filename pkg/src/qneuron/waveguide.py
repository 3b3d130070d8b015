"""Waveguide model: independent universes joined by ideal waveguides.

Universe ``u`` routes ``k_u`` identical waveguides of lengths ``l_u^1..l_u^d``
through the input regions plus a bias waveguide of length ``theta_u`` through
a region of unit index. The detector amplitude is

    g(x) = sum_u k_u / (l_u^1 ... l_u^d theta_u) * exp(i omega (l_u . x + theta_u))

and the neuron's output is ``|g(x)|**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LENGTH_FLOOR = 1e-9


@dataclass(frozen=True)
class Universe:
    multiplicity: int
    lengths: tuple[float, ...]
    bias_length: float

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        if isinstance(self.multiplicity, bool) or int(self.multiplicity) != self.multiplicity:
            raise ValueError("multiplicity must be an integer")
        object.__setattr__(self, "multiplicity", int(self.multiplicity))
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if any(not v > 0 for v in self.lengths) or not self.bias_length > 0:
            raise ValueError("lengths and bias_length must be positive")


@dataclass(frozen=True, eq=False)
class WgmNeuron:
    """Array-backed waveguide neuron.

    ``multiplicities`` has shape ``(U,)``, ``lengths`` ``(U, d)`` and
    ``biases`` ``(U,)``. Build from :class:`Universe` records with
    :meth:`from_universes`.
    """

    omega: float
    multiplicities: np.ndarray
    lengths: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.multiplicities)
        lengths = np.atleast_2d(np.asarray(self.lengths, dtype=float))
        biases = np.asarray(self.biases, dtype=float).reshape(-1)
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if k.ndim != 1 or len(k) == 0:
            raise ValueError("need at least one universe")
        if not np.all(k == np.round(k)) or np.any(k < 1):
            raise ValueError("multiplicities must be positive integers")
        if lengths.shape[0] != len(k) or biases.shape != k.shape:
            raise ValueError("universe arrays disagree in length")
        if np.any(lengths <= 0) or np.any(biases <= 0):
            raise ValueError("lengths and biases must be positive")
        k = k.astype(np.int64)
        for name, arr in (("multiplicities", k), ("lengths", lengths), ("biases", biases)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_universes(cls, omega: float, universes) -> "WgmNeuron":
        universes = list(universes)
        return cls(
            omega,
            np.array([u.multiplicity for u in universes]),
            np.array([u.lengths for u in universes], dtype=float),
            np.array([u.bias_length for u in universes], dtype=float),
        )

    @property
    def universes(self) -> list[Universe]:
        return [
            Universe(int(k), tuple(l), float(b))
            for k, l, b in zip(self.multiplicities, self.lengths, self.biases)
        ]

    @property
    def arity(self) -> int:
        return self.lengths.shape[1]

    @property
    def size(self) -> int:
        return len(self.multiplicities)

    def term_amplitudes(self) -> np.ndarray:
        """Real prefactors ``k_u / (prod_i l_u^i * theta_u)``."""
        return self.multiplicities / (np.prod(self.lengths, axis=1) * self.biases)

    def amplitude_bound(self) -> float:
        """Upper bound on ``|g(x)|`` from the triangle inequality."""
        return float(np.sum(self.term_amplitudes()))

    def evaluate_many(self, points) -> np.ndarray:
        x = np.atleast_2d(np.asarray(points, dtype=float))
        if x.shape[1] != self.arity:
            raise ValueError(f"expected {self.arity} inputs, got {x.shape[1]}")
        phase = self.omega * (x @ self.lengths.T + self.biases)
        return np.exp(1j * phase) @ self.term_amplitudes()

    def evaluate(self, x) -> complex:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ValueError("expected a single input vector")
        return complex(self.evaluate_many(x[None, :])[0])

    def outputs(self, points) -> np.ndarray:
        g = self.evaluate_many(points)
        return g.real**2 + g.imag**2

    def output(self, x) -> float:
        g = self.evaluate(x)
        return g.real**2 + g.imag**2

    def parameters(self) -> np.ndarray:
        """Per universe: its ``d`` lengths followed by its bias length."""
        return np.hstack([self.lengths, self.biases[:, None]]).reshape(-1)

    def with_parameters(self, vector) -> "WgmNeuron":
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.size * (self.arity + 1),):
            raise ValueError("parameter vector has the wrong length")
        table = np.maximum(vector, LENGTH_FLOOR).reshape(self.size, self.arity + 1)
        return WgmNeuron(self.omega, self.multiplicities, table[:, :-1], table[:, -1])

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "universes": [
                {"k": int(k), "lengths": [float(v) for v in l], "theta": float(b)}
                for k, l, b in zip(self.multiplicities, self.lengths, self.biases)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WgmNeuron":
        return cls.from_universes(
            data.get("omega", 2 * math.pi),
            (Universe(u["k"], u["lengths"], u["theta"]) for u in data["universes"]),
        )
