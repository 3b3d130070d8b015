"""Multi-barrier multiple-slit interferometer treated as a single neuron.

A particle leaves the source plane, passes one slit in each of the ``d - 1``
barriers and reaches the detector plane. Every region between consecutive
planes has its own refractive index; the vector of indices is the input.
Each trajectory contributes

    (1 / prod_j l_j) * exp(i * 2*pi/lambda * sum_j n_j l_j)

and the detection probability is the squared modulus of the sum over all
trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .interference import amplitude_sum, probability

MAX_TRAJECTORIES = 10**7
_CHUNK = 1 << 16
_LENGTH_FLOOR = 1e-9
_EXT = np.longdouble
_TWO_PI_EXT = 8 * np.arctan(_EXT(1))


@dataclass(frozen=True)
class BarrierStack:
    """Planar geometry: source plane, ``d - 1`` barriers, detector plane.

    ``gaps[j]`` is the distance between plane ``j`` and plane ``j + 1``;
    ``barriers[j - 1]`` holds the transverse slit coordinates of barrier ``j``.
    ``bias_region``, when set, names a region whose index is pinned to 1 and
    which is therefore not part of the external input.
    """

    wavelength: float
    gaps: tuple[float, ...]
    barriers: tuple[tuple[float, ...], ...]
    source: float = 0.0
    detector: float = 0.0
    bias_region: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gaps", tuple(float(h) for h in self.gaps))
        object.__setattr__(
            self, "barriers", tuple(tuple(float(r) for r in b) for b in self.barriers)
        )
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if any(not h > 0 for h in self.gaps):
            raise ValueError("every gap must be positive")
        if len(self.gaps) != len(self.barriers) + 1:
            raise ValueError(
                f"{len(self.barriers)} barriers need {len(self.barriers) + 1} gaps, "
                f"got {len(self.gaps)}"
            )
        if any(len(b) == 0 for b in self.barriers):
            raise ValueError("every barrier needs at least one slit")
        if self.bias_region is not None and not 0 <= self.bias_region < len(self.gaps):
            raise ValueError("bias_region out of range")

    @property
    def regions(self) -> int:
        return len(self.gaps)

    @property
    def input_arity(self) -> int:
        return self.regions - (self.bias_region is not None)

    @property
    def slit_counts(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.barriers)

    @property
    def path_count(self) -> int:
        return math.prod(self.slit_counts)

    def full_indices(self, n) -> np.ndarray:
        """Region indices with the bias region (if any) filled in as 1.

        Accepts a single input vector or a batch of shape ``(P, arity)``.
        """
        n = np.asarray(n, dtype=float)
        if n.shape[-1] != self.input_arity:
            raise ValueError(
                f"expected {self.input_arity} refractive indices, got {n.shape[-1]}"
            )
        if np.any(n < 1):
            raise ValueError("refractive indices must be >= 1")
        if self.bias_region is not None:
            n = np.insert(n, self.bias_region, 1.0, axis=-1)
        return n

    def to_dict(self) -> dict:
        out = {
            "wavelength": self.wavelength,
            "gaps": list(self.gaps),
            "barriers": [list(b) for b in self.barriers],
            "source": self.source,
            "detector": self.detector,
        }
        if self.bias_region is not None:
            out["bias_region"] = self.bias_region
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "BarrierStack":
        return cls(
            wavelength=data["wavelength"],
            gaps=data["gaps"],
            barriers=data["barriers"],
            source=data.get("source", 0.0),
            detector=data.get("detector", 0.0),
            bias_region=data.get("bias_region"),
        )


@dataclass(frozen=True)
class Trajectory:
    """One slit index per barrier (zero-based)."""

    slit_choice: tuple[int, ...]


def path_length(r_a: float, r_b: float, h: float) -> float:
    if not h > 0:
        raise ValueError("plane separation must be positive")
    return math.hypot(h, r_a - r_b)


def _plane_positions(stack: BarrierStack, traj: Trajectory) -> list[float]:
    if len(traj.slit_choice) != len(stack.barriers):
        raise ValueError("trajectory must pick one slit per barrier")
    pos = [stack.source]
    for barrier, k in zip(stack.barriers, traj.slit_choice):
        if not 0 <= k < len(barrier):
            raise ValueError(f"slit index {k} out of range")
        pos.append(barrier[k])
    pos.append(stack.detector)
    return pos


def segment_lengths(stack: BarrierStack, traj: Trajectory) -> np.ndarray:
    pos = _plane_positions(stack, traj)
    return np.array(
        [path_length(pos[j], pos[j + 1], h) for j, h in enumerate(stack.gaps)]
    )


def trajectory_amplitude(stack: BarrierStack, traj: Trajectory, n) -> complex:
    n = stack.full_indices(n)
    if n.ndim != 1:
        raise ValueError("expected a single input vector")
    lengths = segment_lengths(stack, traj)
    phase = 2 * math.pi / stack.wavelength * float(np.dot(n, lengths))
    return complex(np.exp(1j * phase) / np.prod(lengths))


def neuron_view(stack: BarrierStack, traj: Trajectory) -> tuple[np.ndarray, float]:
    """Real weights ``w_j = 2*pi*l_j/lambda`` and threshold ``theta = ln prod l_j``.

    The trajectory amplitude equals ``exp(-theta) * exp(1j * w @ n)``.
    """
    lengths = segment_lengths(stack, traj)
    weights = 2 * math.pi / stack.wavelength * lengths
    return weights, float(np.sum(np.log(lengths)))


def trajectories(stack: BarrierStack):
    for idx in _index_grid(stack.slit_counts):
        yield Trajectory(tuple(int(k) for k in idx))


@lru_cache(maxsize=64)
def _index_grid(counts: tuple[int, ...]) -> np.ndarray:
    grid = np.indices(counts).reshape(len(counts), -1).T
    grid.setflags(write=False)
    return grid


def _segment_matrix(stack: BarrierStack, idx: np.ndarray, dtype=float) -> np.ndarray:
    """Segment lengths, shape ``(T, d)``, for the trajectories in ``idx``."""
    planes = [np.full(len(idx), stack.source, dtype=dtype)]
    for j, barrier in enumerate(stack.barriers):
        planes.append(np.asarray(barrier, dtype=dtype)[idx[:, j]])
    planes.append(np.full(len(idx), stack.detector, dtype=dtype))
    gaps = np.asarray(stack.gaps, dtype=dtype)
    dr = np.diff(np.stack(planes, axis=1), axis=1)
    return np.sqrt(gaps**2 + dr**2)


def _check_path_count(stack: BarrierStack) -> None:
    if stack.path_count > MAX_TRAJECTORIES:
        raise ValueError(
            f"{stack.path_count} trajectories exceeds the limit of {MAX_TRAJECTORIES}"
        )


def detector_amplitudes(stack: BarrierStack, inputs) -> np.ndarray:
    """Total detector amplitude for a batch of inputs, shape ``(P,)``.

    Lengths, phases and the running sum are kept in extended precision. When
    most paths cancel, the relative error of the probability is roughly the
    absolute phase error times ``sum |a| / |sum a|``, and phases of hundreds
    of radians carry ~1e-13 rad of rounding in plain doubles. Where
    ``np.longdouble`` is just a double this reduces to ordinary precision.
    """
    _check_path_count(stack)
    n = np.atleast_2d(stack.full_indices(inputs)).astype(_EXT)
    k = _TWO_PI_EXT / _EXT(stack.wavelength)
    grid = _index_grid(stack.slit_counts)
    step = max(1, _CHUNK // len(n))
    re = np.zeros(len(n), dtype=_EXT)
    im = np.zeros(len(n), dtype=_EXT)
    for start in range(0, len(grid), step):
        seg = _segment_matrix(stack, grid[start : start + step], _EXT)
        phase = k * (n @ seg.T)
        weight = 1 / np.prod(seg, axis=1)
        re += (np.cos(phase) * weight).sum(axis=1)
        im += (np.sin(phase) * weight).sum(axis=1)
    return re.astype(float) + 1j * im.astype(float)


def detection_probabilities(stack: BarrierStack, inputs) -> np.ndarray:
    z = detector_amplitudes(stack, inputs)
    return z.real**2 + z.imag**2


def detection_probability(stack: BarrierStack, n) -> float:
    n = np.asarray(n, dtype=float)
    if n.ndim != 1:
        raise ValueError("expected a single input vector")
    return float(detection_probabilities(stack, n[None, :])[0])


def modulus_sum(stack: BarrierStack) -> float:
    """``sum_k |a_k|``: the detector amplitude when every path is in phase."""
    _check_path_count(stack)
    seg = _segment_matrix(stack, _index_grid(stack.slit_counts))
    return float(np.sum(1.0 / np.prod(seg, axis=1)))


def xor_stack(r2: float, h: float, wavelength: float) -> BarrierStack:
    """Young double slit tuned so the detector computes XOR of two indices.

    Slit 2 sits at ``r2``; slit 1 is displaced so each of its two segments is
    longer by roughly ``3*wavelength/4`` (first order in ``wavelength/h``).
    Source and detector sit on the axis.
    """
    if not (r2 > 0 and h > 0 and wavelength > 0):
        raise ValueError("r2, h and wavelength must be positive")
    if h < 1e3 * wavelength:
        raise ValueError("xor_stack needs h >= 1000 * wavelength")
    r1 = r2 + math.sqrt(1 + h * h / (r2 * r2)) * 0.75 * wavelength
    return BarrierStack(wavelength=wavelength, gaps=(h, h), barriers=((r1, r2),))


def xor_path_difference(stack: BarrierStack) -> float:
    """``l_1^1 + l_1^2 - l_2^1 - l_2^2`` for a two-slit, one-barrier stack."""
    l1 = segment_lengths(stack, Trajectory((0,)))
    l2 = segment_lengths(stack, Trajectory((1,)))
    return float(l1.sum() - l2.sum())


def xor_closed_form(n1: float, n2: float) -> float:
    """Two-path approximation in units of the prefactor ``A``.

    Uses per-segment path differences of ``3*lambda/4`` each, so the phase
    ``2*pi/lambda * (n1 + n2) * 3*lambda/4`` does not depend on lambda.
    """
    return abs(1 + math.cos(1.5 * math.pi * (n1 + n2))) ** 2


def brute_force_probability(stack: BarrierStack, n) -> float:
    """Scalar path-by-path evaluation, kept for cross-checks."""
    return probability(
        amplitude_sum(trajectory_amplitude(stack, t, n) for t in trajectories(stack))
    )


class SlitNeuron:
    """Trainable view of a stack.

    Source, slit and detector positions, the gaps and an output gain move;
    the wavelength and the bias region are fixed.

    The output is ``gain * P / (sum_k |a_k|)**2``: the detection probability
    relative to its in-phase maximum (which does not depend on the input,
    because refraction only shifts phases), times a calibration gain
    ``>= 1``. With ``gain = 1`` the output lies in ``[0, 1]``.
    """

    def __init__(self, stack: BarrierStack, gain: float = 1.0):
        if not gain >= 1:
            raise ValueError("gain must be >= 1")
        _check_path_count(stack)
        self._template = stack
        self._stack = stack
        counts = stack.slit_counts
        self._n_slits = int(sum(counts))
        offsets = np.concatenate([[1], 1 + np.cumsum(counts)[:-1]]).astype(int)
        # transverse plane coordinates of every trajectory, as indices into
        # the flat parameter vector: source, slits..., detector
        grid = _index_grid(counts) + offsets
        self._slot = np.hstack([
            np.zeros((len(grid), 1), dtype=int), grid,
            np.full((len(grid), 1), self._n_slits + 1),
        ])
        self._left, self._right = self._slot[:, :-1], self._slot[:, 1:]
        self._params = np.append(self.parameters_of(stack), float(gain))
        self._seg = None
        # shared by every copy made with with_parameters
        self._validated = [None, None]

    @staticmethod
    def parameters_of(stack: BarrierStack) -> np.ndarray:
        """``[source, slit positions..., detector, gaps...]``."""
        slits = [r for b in stack.barriers for r in b]
        return np.array([stack.source, *slits, stack.detector, *stack.gaps], dtype=float)

    @property
    def stack(self) -> BarrierStack:
        if self._stack is None:
            t, v = self._template, self._params
            barriers, i = [], 1
            for count in t.slit_counts:
                barriers.append(tuple(v[i : i + count]))
                i += count
            self._stack = BarrierStack(t.wavelength, tuple(v[self._n_slits + 2 : -1]),
                                       tuple(barriers), v[0], v[self._n_slits + 1],
                                       t.bias_region)
        return self._stack

    @property
    def gain(self) -> float:
        return float(self._params[-1])

    @property
    def arity(self) -> int:
        return self._template.input_arity

    def parameters(self) -> np.ndarray:
        return self._params.copy()

    def with_parameters(self, vector) -> "SlitNeuron":
        vector = np.array(vector, dtype=float)
        if vector.shape != self._params.shape:
            raise ValueError("parameter vector has the wrong length")
        gaps = vector[self._n_slits + 2 : -1]
        np.maximum(gaps, _LENGTH_FLOOR, out=gaps)
        vector[-1] = max(vector[-1], 1.0)
        out = object.__new__(SlitNeuron)
        out.__dict__.update(self.__dict__)
        out._params, out._stack, out._seg = vector, None, None
        return out

    def segments(self) -> np.ndarray:
        """Segment lengths of every trajectory, shape ``(T, d)``."""
        if self._seg is None:
            v = self._params
            dr = v[self._right] - v[self._left]
            self._seg = np.sqrt(v[self._n_slits + 2 : -1] ** 2 + dr * dr)
        return self._seg

    def _indices(self, inputs) -> np.ndarray:
        cell = self._validated
        if inputs is not cell[0]:
            cell[0], cell[1] = inputs, np.atleast_2d(self._template.full_indices(inputs))
        return cell[1]

    def outputs(self, inputs) -> np.ndarray:
        n = self._indices(inputs)
        seg = self.segments()
        prod = seg[:, 0].copy()
        for j in range(1, seg.shape[1]):
            prod *= seg[:, j]
        moduli = 1.0 / prod
        phase = (2 * math.pi / self._template.wavelength) * (n @ seg.T)
        re, im = np.cos(phase) @ moduli, np.sin(phase) @ moduli
        total = moduli.sum()
        return self._params[-1] * (re * re + im * im) / (total * total)

    def output(self, n) -> float:
        return float(self.outputs(np.asarray(n, dtype=float)[None, :])[0])

    def path_spread(self) -> float:
        """Largest minus smallest total geometric path length."""
        total = self.segments().sum(axis=1)
        return float(total.max() - total.min())

    def to_dict(self) -> dict:
        return {**self.stack.to_dict(), "gain": self.gain}

    @classmethod
    def from_dict(cls, data: dict) -> "SlitNeuron":
        return cls(BarrierStack.from_dict(data), data.get("gain", 1.0))


def random_slit_neuron(
    rng: np.random.Generator,
    slits: int = 4,
    wavelength: float = 1.0,
    gap: float = 20.0,
    spread: float = 5.0,
) -> SlitNeuron:
    """Single barrier with ``slits`` randomly placed slits, on-axis source/detector."""
    positions = tuple(rng.uniform(-spread, spread, size=slits))
    return SlitNeuron(BarrierStack(wavelength, (gap, gap), (positions,)))
