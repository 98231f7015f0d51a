"""Adaptive Gauss-Kronrod quadrature and jet-valued line integrals.

One shared engine backs every quadrature in the package: the coordinate
conversions, the (u,v) Laplace transformation, and the solution families
whose closed forms contain an antiderivative.  Integrands may be scalar-
or vector-valued; the error estimate is the usual |K15 - G7| panel bound.

:func:`integrate_field_along` lifts an axis-parallel line integral of a
jet-evaluable field to a jet: the coefficients that carry powers of the
integration axis follow from the fundamental theorem of calculus, and the
remaining slice is integrated coefficient-wise.
"""

from __future__ import annotations

import numpy as np

from .jets import Jet3, JetMap, Point, jet_size, _tables

__all__ = ["QuadratureError", "gauss_kronrod_15", "adaptive_quadrature",
           "integrate_field_along"]


class QuadratureError(ArithmeticError):
    """Adaptive subdivision failed to reach the requested tolerance."""


# 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def gauss_kronrod_15(f, a: float, b: float):
    """One GK15 panel: returns (K15 value, |K15 - G7| error estimate)."""
    h = 0.5 * (b - a)
    c = 0.5 * (a + b)
    fc = np.asarray(f(c), dtype=float)
    resk = _WGK[7] * fc
    resg = _WG[3] * fc
    for j in range(7):
        x = h * _XGK[j]
        f1 = np.asarray(f(c - x), dtype=float)
        f2 = np.asarray(f(c + x), dtype=float)
        resk = resk + _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg = resg + _WG[j // 2] * (f1 + f2)
    err = np.max(np.abs(resk - resg)) * abs(h)
    return resk * h, err


def adaptive_quadrature(f, a: float, b: float, tol: float = 1e-10,
                        max_panels: int = 2000):
    """Integrate ``f`` (scalar- or vector-valued) from a to b.

    Raises :class:`QuadratureError` when the panel budget is exhausted or
    a panel shrinks below floating-point resolution (the usual symptom of
    an integrand pole inside the interval).
    """
    if a == b:
        probe = np.asarray(f(a), dtype=float)
        return probe * 0.0
    val, err = gauss_kronrod_15(f, a, b)
    panels = [(err, a, b, val)]
    width_floor = 1e-14 * (1.0 + abs(a) + abs(b))
    while sum(p[0] for p in panels) > tol:
        if len(panels) >= max_panels:
            raise QuadratureError("panel budget exhausted")
        worst = max(range(len(panels)), key=lambda i: panels[i][0])
        err, lo, hi, _ = panels.pop(worst)
        if abs(hi - lo) < width_floor:
            raise QuadratureError(
                f"panel [{lo}, {hi}] below width floor with error {err:g}")
        mid = 0.5 * (lo + hi)
        panels.append((*_panel(f, lo, mid),))
        panels.append((*_panel(f, mid, hi),))
    total = panels[0][3] * 0.0
    for _, _, _, v in panels:
        total = total + v
    return total


def _panel(f, lo, hi):
    v, e = gauss_kronrod_15(f, lo, hi)
    return e, lo, hi, v


_AXIS_NUM = {"t": 0, "x": 1, "y": 2}


def integrate_field_along(field: JetMap, axis: str, lower: float,
                          p: Point, order: int, tol: float = 1e-10) -> Jet3:
    """Jet of ``F(p) = integral of field along one axis from lower to p.axis``.

    The integrand is a jet-evaluable field g; the result F satisfies
    dF/d(axis) = g, so coefficients with a positive power of the axis come
    from g's jet at ``p``, while the axis-free slice is a vector quadrature
    of g's jets along the integration segment.
    """
    ax = _AXIS_NUM[axis]
    upper = p[ax]
    tab = _tables(order)
    g_at_p = field(p, order)
    out = np.zeros(jet_size(order))

    slice_idx = [m for m, e in enumerate(tab.exps) if e[ax] == 0]

    def slice_values(s: float) -> np.ndarray:
        q = Point(*(s if i == ax else p[i] for i in range(3)))
        jp = field(q, order)
        return jp.coeffs[slice_idx]

    sliced = adaptive_quadrature(slice_values, lower, upper, tol=tol)
    for pos, m in enumerate(slice_idx):
        out[m] = sliced[pos]

    for m, e in enumerate(tab.exps):
        k = e[ax]
        if k == 0:
            continue
        src = list(e)
        src[ax] = k - 1
        out[m] = g_at_p.coeffs[_tables(order).index[tuple(src)]] / k
    return Jet3(p, order, out)
