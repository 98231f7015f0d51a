"""Tour of the solution-family catalog.

Every family in blp.catalog builds a pair (u, v) of jet-evaluable maps
that solve

    u_ty = (u^2 - u_x)_xy + 2 v_xxx,
    v_t  = v_xx + 2 u v_x

exactly.  The residual checker extracts all derivatives from one
truncated Taylor jet per field per point, so "exact" is verified to
floating-point accuracy rather than asserted.
"""

import numpy as np

from blp import catalog
from blp.jets import Point
from blp.system import residual_report

rng = np.random.default_rng(1)

print(f"{'family':24s} {'constraint':28s} {'sup residual':>12s}")
for desc in catalog.list_families():
    bindings = catalog.sample_bindings(desc.id, rng)
    field = catalog.instantiate(desc.id, bindings)
    (tr, xr, yr) = catalog.default_box(desc.id)
    grid = [Point(t, x, y)
            for t in np.linspace(*tr, 3)
            for x in np.linspace(*xr, 3)
            for y in np.linspace(*yr, 3)]
    rep = residual_report(field, grid)
    print(f"{desc.id:24s} {desc.constraint_tag:28s} "
          f"{max(rep.r1_max, rep.r2_max):12.2e}")

print()
print("A closer look at the two-dimensional Hopf-Cole family: any")
print("superposition of heat-equation solutions with y-dependent")
print("coefficients produces a solution.")
w = catalog.combine_witnesses(
    [catalog.heat_witness_library("plane_exp", k=1.0),
     catalog.heat_witness_library("heat_polynomial", n=3)],
    ["1+0.5*y^2", "cos(y)"])
field = catalog.instantiate("F_HOPFCOLE2D", {"Phi": w})
p = Point(0.4, 0.2, 0.7)
print("u(0.4, 0.2, 0.7) =", field.u(p, 0).value)
print("v(0.4, 0.2, 0.7) =", field.v(p, 0).value)
rep = residual_report(field, [p])
print("residual:", rep.r1_max, rep.r2_max)
