"""Divergence-free currents as solution detectors.

Five families of conserved currents (F0, F1, F2 weighted by functions of
t; F4, F5 by functions of y) have vanishing total divergence

    D_t F^t + D_x F^x + D_y F^y = 0

on every solution.  Perturbing a solution makes the divergence jump by
orders of magnitude, which is what makes the currents useful as
independent detectors alongside the raw residual.
"""

from blp import catalog
from blp.exprdsl import parse
from blp.jets import Point
from blp.system import conserved_current_divergence, perturb_v

field = catalog.instantiate(
    "F_HOPFCOLE2D",
    {"Phi": catalog.combine_witnesses(
        [catalog.heat_witness_library("plane_exp", k=1.0)],
        [parse("1+y", "y")])})
bad = perturb_v(field, eps=0.05)

p = Point(0.6, 0.4, 0.5)
print(f"{'current':8s} {'parameter':10s} {'on solution':>14s} "
      f"{'perturbed':>14s}")
for cid, par_src, var in [("F0", "t^2", "t"), ("F1", "1", "t"),
                          ("F2", "sin(t)", "t"), ("F4", "y^2", "y"),
                          ("F5", "y", "y")]:
    par = parse(par_src, var) if par_src != "1" else 1.0
    good = conserved_current_divergence(cid, par, field, p)
    fired = conserved_current_divergence(cid, par, bad, p)
    print(f"{cid:8s} {par_src:10s} {good:14.2e} {fired:14.2e}")
