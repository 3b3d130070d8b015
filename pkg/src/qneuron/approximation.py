"""Constructive approximation of a non-negative function by a waveguide neuron.

The pipeline follows the universality argument step by step:

1. expand ``sqrt(f)`` in a truncated Fourier series, written as a sum of
   positive amplitudes times ``exp(i omega (l . x + theta))``;
2. multiply by a global phase so every frequency and bias is positive;
3. add a large common bias ``L`` and round ``A_u prod(l_u) (L + theta_u)`` up
   to an integer multiplicity;
4. check the result against ``f`` on a validation grid.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .interference import delta_for_budget
from .waveguide import WgmNeuron

COEFFICIENT_CUTOFF = 1e-12
DEFAULT_MAX_ORDER = 64
_EVAL_CHUNK = 4096


class ApproximationError(RuntimeError):
    """The pipeline could not certify the requested accuracy."""


@dataclass(frozen=True)
class RectDomain:
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ValueError("domain needs at least one dimension")
        if any(not lo < hi for lo, hi in bounds):
            raise ValueError("every interval needs lo < hi")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def unit(cls, d: int) -> "RectDomain":
        return cls(((0.0, 1.0),) * d)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def widths(self) -> np.ndarray:
        return np.array([b[1] - b[0] for b in self.bounds])

    def grid(self, points: int | Sequence[int]) -> np.ndarray:
        """Tensor grid including the endpoints, shape ``(prod(points), d)``."""
        counts = _per_dim(points, self.dim)
        axes = [np.linspace(lo, hi, m) for (lo, hi), m in zip(self.bounds, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class ExpSum:
    """``sum_u A_u exp(i omega (l_u . x + theta_u))`` with ``A_u > 0``."""

    omega: float
    amplitudes: np.ndarray
    frequencies: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float).reshape(-1)
        freqs = np.asarray(self.frequencies, dtype=float)
        if freqs.ndim == 1:
            freqs = freqs[:, None]
        biases = np.asarray(self.biases, dtype=float).reshape(-1)
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if np.any(amps <= 0):
            raise ValueError("amplitudes must be strictly positive")
        if freqs.shape[0] != len(amps) or biases.shape != amps.shape:
            raise ValueError("term arrays disagree in length")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "biases", biases)

    @property
    def size(self) -> int:
        return len(self.amplitudes)

    @property
    def arity(self) -> int:
        return self.frequencies.shape[1]

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.frequencies > 0) and np.all(self.biases > 0))

    def modulus_bound(self) -> float:
        return float(np.sum(self.amplitudes))

    def evaluate_many(self, points) -> np.ndarray:
        x = np.atleast_2d(np.asarray(points, dtype=float))
        if x.shape[1] != self.arity:
            raise ValueError(f"expected {self.arity} inputs, got {x.shape[1]}")
        out = np.empty(len(x), dtype=complex)
        for start in range(0, len(x), _EVAL_CHUNK):
            chunk = x[start : start + _EVAL_CHUNK]
            phase = self.omega * (chunk @ self.frequencies.T + self.biases)
            out[start : start + _EVAL_CHUNK] = np.exp(1j * phase) @ self.amplitudes
        return out

    def evaluate(self, x) -> complex:
        return complex(self.evaluate_many(np.asarray(x, dtype=float)[None, :])[0])


def _per_dim(value, d: int) -> tuple[int, ...]:
    if np.isscalar(value):
        return (int(value),) * d
    value = tuple(int(v) for v in value)
    if len(value) != d:
        raise ValueError(f"expected {d} per-dimension values, got {len(value)}")
    return value


def is_periodic(f: Callable, domain: RectDomain, samples: int = 9, rtol: float = 1e-9) -> bool:
    """Whether ``f`` takes equal values on every pair of opposite faces."""
    for i, (lo, hi) in enumerate(domain.bounds):
        face = domain.grid(samples)
        low, high = face.copy(), face.copy()
        low[:, i], high[:, i] = lo, hi
        a, b = np.asarray(f(low), float), np.asarray(f(high), float)
        if not np.allclose(a, b, rtol=rtol, atol=rtol):
            return False
    return True


def fourier_sqrt(
    f: Callable,
    domain: RectDomain,
    omega: float = 2 * math.pi,
    order: int | Sequence[int] = 4,
    extension: str = "auto",
) -> ExpSum:
    """Truncated Fourier series of ``sqrt(f)`` as an :class:`ExpSum`.

    ``f`` maps an ``(M, d)`` array of points to ``M`` non-negative values.
    The series interpolates ``sqrt(f)`` on a uniform ``2*order + 1`` grid of
    its periodic extension. ``extension`` is ``"periodic"``, ``"mirror"``
    (even reflection across the upper faces, doubling the period) or
    ``"auto"`` (periodic when ``f`` matches on opposite faces).
    """
    d = domain.dim
    orders = _per_dim(order, d)
    if any(k < 0 for k in orders):
        raise ValueError("order must be non-negative")
    if extension == "auto":
        extension = "periodic" if is_periodic(f, domain) else "mirror"
    if extension not in ("periodic", "mirror"):
        raise ValueError(f"unknown extension {extension!r}")
    widths = domain.widths
    periods = widths if extension == "periodic" else 2 * widths
    counts = [2 * k + 1 for k in orders]

    axes = []
    for i, m in enumerate(counts):
        t = periods[i] * np.arange(m) / m
        if extension == "mirror":
            t = np.where(t > widths[i], 2 * widths[i] - t, t)
        axes.append(domain.lo[i] + t)
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.reshape(-1) for m in mesh], axis=1)
    values = np.asarray(f(points), dtype=float).reshape(counts)
    if np.any(values < 0):
        raise ValueError("target function is negative at a sample point")
    coeffs = np.fft.fftn(np.sqrt(values)) / values.size

    waves = np.stack(
        np.meshgrid(
            *[np.where(np.arange(m) <= k, np.arange(m), np.arange(m) - m)
              for m, k in zip(counts, orders)],
            indexing="ij",
        ),
        axis=-1,
    ).reshape(-1, d)
    coeffs = coeffs.reshape(-1)
    keep = np.abs(coeffs) >= COEFFICIENT_CUTOFF
    waves, coeffs = waves[keep], coeffs[keep]

    angular = 2 * math.pi * waves / periods
    frequencies = angular / omega
    biases = (np.angle(coeffs) - angular @ domain.lo) / omega
    return ExpSum(omega, np.abs(coeffs), frequencies, biases)


def positivize(g0: ExpSum) -> ExpSum:
    """Global phase shift making every frequency and bias strictly positive."""
    shift_l = max(0.0, -float(g0.frequencies.min())) + 1.0
    shift_theta = max(0.0, -float(g0.biases.min())) + 1.0
    return ExpSum(g0.omega, g0.amplitudes, g0.frequencies + shift_l, g0.biases + shift_theta)


def _require_positive(g0: ExpSum) -> None:
    if not g0.is_positive:
        raise ValueError("exponential sum must be positivized first")


def round_to_wgm(g0: ExpSum, L: float) -> WgmNeuron:
    """Integer-multiplicity neuron approximating ``exp(i omega L) * g0``.

    Each multiplicity is ``floor(A_u * prod(l_u) * (L + theta_u)) + 1``.
    """
    _require_positive(g0)
    if not L > 0:
        raise ValueError("L must be positive")
    biases = L + g0.biases
    a = g0.amplitudes * np.prod(g0.frequencies, axis=1) * biases
    k = np.floor(a).astype(np.int64) + 1
    return WgmNeuron(g0.omega, k, g0.frequencies, biases)


def rounding_bound(g0: ExpSum, L: float) -> float:
    """Pointwise bound on ``|round_to_wgm(g0, L)(x) - exp(i omega L) g0(x)|``."""
    _require_positive(g0)
    return float(np.sum(1.0 / (np.prod(g0.frequencies, axis=1) * (L + g0.biases))))


def loose_rounding_bound(g0: ExpSum, L: float) -> float:
    """``(1/L) * sum_u 1/prod(l_u)``, which dominates :func:`rounding_bound`."""
    _require_positive(g0)
    return float(np.sum(1.0 / np.prod(g0.frequencies, axis=1)) / L)


def shifted(g0: ExpSum, L: float) -> ExpSum:
    """``exp(i omega L) * g0`` written with biases ``L + theta_u``."""
    return ExpSum(g0.omega, g0.amplitudes, g0.frequencies, g0.biases + L)


@dataclass
class BuildReport:
    order: int
    U: int
    L: float
    epsilon: float
    sup_error: float
    grid: list[int]
    fourier_error: float
    delta: float
    expsum: ExpSum | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("expsum")
        return out


def sup_error(f: Callable, model_outputs: np.ndarray, points: np.ndarray) -> float:
    target = np.asarray(f(points), dtype=float)
    return float(np.max(np.abs(target - model_outputs)))


def build(
    f: Callable,
    domain: RectDomain,
    epsilon: float,
    omega: float = 2 * math.pi,
    max_order: int = DEFAULT_MAX_ORDER,
    grid: int | Sequence[int] | None = None,
    extension: str = "auto",
    l_scale: float = 1.0,
) -> tuple[WgmNeuron, BuildReport]:
    """Waveguide neuron with ``|f - output| < epsilon`` on the validation grid.

    ``l_scale >= 1`` multiplies the smallest certified common bias; larger
    values give longer bias waveguides and larger multiplicities with the
    same frequencies.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if l_scale < 1:
        raise ValueError("l_scale must be >= 1")
    if grid is None:
        grid = 201 if domain.dim == 1 else 51
    points = domain.grid(grid)
    target = np.asarray(f(points), dtype=float)
    if np.any(target < 0):
        raise ValueError("target function is negative on the validation grid")

    order = 1
    while True:
        g0 = fourier_sqrt(f, domain, omega, order, extension)
        g = g0.evaluate_many(points)
        fourier_err = float(np.max(np.abs(target - (g.real**2 + g.imag**2))))
        if fourier_err < epsilon / 2:
            break
        if order >= max_order:
            raise ApproximationError(
                f"order cap {max_order} reached with error {fourier_err:.3g} "
                f">= {epsilon / 2:.3g}"
            )
        order = min(2 * order, max_order)

    gp = positivize(g0)
    delta = delta_for_budget(gp.modulus_bound(), epsilon / 2)
    L = l_scale * loose_rounding_bound(gp, 1.0) / delta
    neuron = round_to_wgm(gp, L)
    err = sup_error(f, neuron.outputs(points), points)
    report = BuildReport(
        order=order,
        U=neuron.size,
        L=L,
        epsilon=epsilon,
        sup_error=err,
        grid=list(_per_dim(grid, domain.dim)),
        fourier_error=fourier_err,
        delta=delta,
        expsum=gp,
    )
    if not err < epsilon:
        raise ApproximationError(f"validation failed: sup error {err:.3g} >= {epsilon}")
    return neuron, report
