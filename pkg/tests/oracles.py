"""High-precision reference implementations used as test oracles."""

import itertools

import mpmath as mp


def path_sum_probability(stack, n, dps=40):
    """Detection probability by explicit path enumeration in ``dps`` digits.

    Plane coordinates, gaps and indices are taken as exact binary values, so
    the result is the true path sum for the stored geometry.
    """
    with mp.workdps(dps):
        k = 2 * mp.pi / mp.mpf(stack.wavelength)
        total = mp.mpc(0)
        for choice in itertools.product(*[range(len(b)) for b in stack.barriers]):
            coords = [stack.source, *(stack.barriers[j][c] for j, c in enumerate(choice)),
                      stack.detector]
            prod_l, phase = mp.mpf(1), mp.mpf(0)
            for j, h in enumerate(stack.gaps):
                seg = mp.sqrt(mp.mpf(h) ** 2 + (mp.mpf(coords[j + 1]) - mp.mpf(coords[j])) ** 2)
                prod_l *= seg
                phase += mp.mpf(n[j]) * seg
            total += mp.expj(k * phase) / prod_l
        return float(abs(total) ** 2)
