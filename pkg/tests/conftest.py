import itertools

import numpy as np
import pytest


def central_diff(f, p, multi_index, h=None):
    """5-point central finite differences of a scalar field of (t, x, y).

    Independent oracle for jet-extracted partial derivatives.  ``f`` takes
    three floats; mixed derivatives are built by nesting the 5-point stencil
    one axis at a time.  The default step balances stencil truncation
    against roundoff amplification for the requested derivative order.
    """
    i, j, k = multi_index
    if h is None:
        h = 1e-4 if i + j + k <= 2 else 4e-3

    def d1(g, axis, m):
        if m == 0:
            return g

        def dg(t, x, y):
            args = [t, x, y]

            def shift(s):
                a = list(args)
                a[axis] += s * h
                return g(*a)

            return (-shift(2) + 8 * shift(1) - 8 * shift(-1) + shift(-2)) / (12 * h)

        return d1(dg, axis, m - 1)

    g = d1(d1(d1(f, 0, i), 1, j), 2, k)
    return g(*p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def grid_points(tr, xr, yr, n):
    ts = np.linspace(*tr, n)
    xs = np.linspace(*xr, n)
    ys = np.linspace(*yr, n)
    return [(t, x, y) for t, x, y in itertools.product(ts, xs, ys)]


def relerr(a, b):
    return abs(a - b) / (1.0 + abs(b))
