"""Complex-amplitude helpers shared by every neuron model.

Amplitudes are plain Python ``complex`` values; the interference of several
alternatives is their sum, and the observable is the squared modulus.
"""

from __future__ import annotations

import cmath
from collections.abc import Iterable

ComplexAmplitude = complex


def _check_finite(z: complex) -> None:
    if not cmath.isfinite(z):
        raise ValueError(f"non-finite amplitude: {z!r}")


def probability(z: ComplexAmplitude) -> float:
    """Squared modulus ``|z|**2``."""
    z = complex(z)
    return z.real * z.real + z.imag * z.imag


def amplitude_sum(zs: Iterable[ComplexAmplitude]) -> ComplexAmplitude:
    """Sum amplitudes in input order. An empty input gives ``0j``."""
    total = 0j
    for z in zs:
        z = complex(z)
        _check_finite(z)
        total += z
    return total


def modsq_gap_bound(z: ComplexAmplitude, z1: ComplexAmplitude) -> float:
    """Upper bound on ``| |z|^2 - |z1|^2 |``.

    Uses ``|a^2 - b^2| = |a - b| |a + b|`` with ``|a| - |b| <= |z - z1|``,
    giving ``|z - z1| * (|z| + |z1|)``.
    """
    z, z1 = complex(z), complex(z1)
    _check_finite(z)
    _check_finite(z1)
    return abs(z - z1) * (abs(z) + abs(z1))


def delta_for_budget(radius: float, budget: float) -> float:
    """Largest ``delta`` with ``delta * (2 * radius + delta) <= budget``.

    If ``|w| <= radius`` and ``|w - v| < delta`` then ``||w|^2 - |v|^2|`` stays
    below ``delta * (2 * radius + delta)``.
    """
    if radius < 0 or budget <= 0:
        raise ValueError("radius must be >= 0 and budget > 0")
    # delta = -R + sqrt(R^2 + b), written to avoid cancellation for large R
    return budget / (radius + (radius * radius + budget) ** 0.5)
