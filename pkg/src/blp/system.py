"""The Boiti-Leon-Pempinelli system: residuals, currents, conversions.

The system for u(t,x,y), v(t,x,y) is

    u_ty = (u^2 - u_x)_xy + 2 v_xxx,
    v_t  = v_xx + 2 u v_x.

Equivalent forms use w = v_x (the (u,w) form) or the potential q with
q_y = v_x (the (u,q) form, in which the Lax pair is usually written):

    u_t  = (u^2 - u_x)_x + 2 q_xx,
    q_ty = (q_xy + 2 u q_y)_x.

Everything here consumes jet-evaluable fields, so no derivative is ever
hand-expanded: a single order-4 jet per field per point feeds each check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from . import jets
from .exprdsl import Expr
from .jets import DomainError, Jet3, JetMap, Point
from .quadrature import integrate_field_along

__all__ = [
    "SolutionField", "ResidualReport", "GaugeError",
    "residual", "residual_uq", "covering_residual",
    "conserved_current_divergence", "convert", "residual_report",
    "perturb_v",
]


class GaugeError(RuntimeError):
    """A conversion path crossed a validity hole of the field."""


@dataclass(frozen=True)
class SolutionField:
    """An immutable pair of jet-evaluable maps with family metadata.

    ``coords`` is one of ``"UV"``, ``"UQ"``, ``"UW"``; the second
    component holds v, q or w accordingly.
    """
    u: JetMap
    v: JetMap
    coords: str
    family_id: str = ""
    params: Mapping[str, object] = field(default_factory=dict)
    validity: Callable[[Point], bool] = lambda p: True

    @property
    def q(self) -> JetMap:
        if self.coords != "UQ":
            raise ValueError("field is not in (u,q) coordinates")
        return self.v

    @property
    def w(self) -> JetMap:
        if self.coords != "UW":
            raise ValueError("field is not in (u,w) coordinates")
        return self.v

    def with_meta(self, **kw) -> "SolutionField":
        data = dict(u=self.u, v=self.v, coords=self.coords,
                    family_id=self.family_id, params=self.params,
                    validity=self.validity)
        data.update(kw)
        return SolutionField(**data)


@dataclass
class ResidualReport:
    family: str
    params: dict
    grid_spec: dict
    r1_max: float
    r2_max: float
    r1_rms: float
    r2_rms: float
    skipped: int

    def to_json(self) -> str:
        payload = {
            "family": self.family,
            "params": self.params,
            "grid_spec": self.grid_spec,
            "r1_max": self.r1_max,
            "r2_max": self.r2_max,
            "r1_rms": self.r1_rms,
            "r2_rms": self.r2_rms,
            "skipped": self.skipped,
        }
        return json.dumps(payload, sort_keys=True)


def residual(s: SolutionField, p: Point, order: int = 4) -> tuple[float, float]:
    """Residuals (r1, r2) of the two equations at one point, in UV coords."""
    if s.coords != "UV":
        raise ValueError("residual expects a field in (u,v) coordinates")
    u = s.u(p, order)
    v = s.v(p, order)
    w = (u * u).truncate(order - 1) - u.derive("x")  # u^2 - u_x
    r1 = (u.extract((1, 0, 1))
          - w.extract((0, 1, 1))
          - 2.0 * v.extract((0, 3, 0)))
    r2 = (v.extract((1, 0, 0))
          - v.extract((0, 2, 0))
          - 2.0 * u.value * v.extract((0, 1, 0)))
    return r1, r2


def residual_uq(s: SolutionField, p: Point, order: int = 4) -> tuple[float, float]:
    """Residuals of the (u,q) form at one point."""
    if s.coords != "UQ":
        raise ValueError("residual_uq expects a field in (u,q) coordinates")
    u = s.u(p, order)
    q = s.v(p, order)
    w = (u * u).truncate(order - 1) - u.derive("x")
    r1 = (u.extract((1, 0, 0))
          - w.extract((0, 1, 0))
          - 2.0 * q.extract((0, 2, 0)))
    inner = (q.derive("x").derive("y")
             + 2.0 * (u.truncate(order - 1) * q.derive("y")).truncate(order - 2))
    r2 = q.extract((1, 0, 1)) - inner.extract((0, 1, 0))
    return r1, r2


def covering_residual(s: SolutionField, psi: JetMap, p: Point,
                      order: int = 3) -> tuple[float, float]:
    """Residuals of the auxiliary linear system in (u,q) coordinates:

        psi_xy + u psi_y + q_y psi = 0,
        psi_t + psi_xx + 2 q_x psi = 0.
    """
    if s.coords != "UQ":
        raise ValueError("covering_residual expects (u,q) coordinates")
    u = s.u(p, order)
    q = s.v(p, order)
    f = psi(p, order)
    c1 = (f.extract((0, 1, 1))
          + u.value * f.extract((0, 0, 1))
          + q.extract((0, 0, 1)) * f.value)
    c2 = (f.extract((1, 0, 0))
          + f.extract((0, 2, 0))
          + 2.0 * q.extract((0, 1, 0)) * f.value)
    return c1, c2


# ----------------------------------------------------------------------
# conserved currents
# ----------------------------------------------------------------------

def _param_jet(param, which: str, p: Point, order: int) -> Jet3:
    if isinstance(param, Expr):
        from .exprdsl import eval_jet
        return eval_jet(param, which, p, order)
    return Jet3.constant(float(param), p, order)


def conserved_current_divergence(current_id: str, param, s: SolutionField,
                                 p: Point, order: int = 5) -> float:
    """Total divergence D_t F^t + D_x F^x + D_y F^y of one conserved current.

    ``current_id`` is one of F0, F1, F2 (parameter a function of t) or
    F4, F5 (parameter a function of y).  Vanishes on solutions.
    """
    if s.coords != "UV":
        raise ValueError("currents are stated in (u,v) coordinates")
    u = s.u(p, order)
    v = s.v(p, order)
    no = order - 2  # common order for component assembly

    def tr(j: Jet3) -> Jet3:
        return j.truncate(no)

    x = jets.lift_variable("x", p, no)
    uj, vj = tr(u), tr(v)
    u_t, u_x, u_y = tr(u.derive("t")), tr(u.derive("x")), tr(u.derive("y"))
    u_xy = tr(u.derive("x").derive("y"))
    u_xx = tr(u.derive("x").derive("x"))
    v_x = tr(v.derive("x"))
    v_xx = tr(v.derive("x").derive("x"))
    if current_id in ("F0", "F1", "F2"):
        h = _param_jet(param, "t", p, no)
        ut_term = u_t - 2.0 * uj * u_x + u_xx
        weight = {"F0": 1.0 + 0.0 * x, "F1": x, "F2": x * x}[current_id]
        if current_id == "F0":
            fx = -2.0 * h * v_xx
        elif current_id == "F1":
            fx = -2.0 * h * (x * v_xx - v_x)
        else:
            fx = -2.0 * h * (x * x * v_xx - 2.0 * x * v_x + 2.0 * vj)
        fy = h * weight * ut_term
        return fx.extract((0, 1, 0)) + fy.extract((0, 0, 1))
    if current_id in ("F4", "F5"):
        g = _param_jet(param, "y", p, no)
        if current_id == "F4":
            ft = g * u_y
            fx = g * (u_xy - 2.0 * uj * u_y - 2.0 * v_xx)
        else:
            ft = g * vj * u_y
            fx = g * (vj * u_xy - u_y * v_x - 2.0 * vj * uj * u_y
                      - 2.0 * vj * v_xx + v_x * v_x)
        return ft.extract((1, 0, 0)) + fx.extract((0, 1, 0))
    raise ValueError(f"unknown current {current_id!r}")


def perturb_v(s: SolutionField, eps: float = 0.05) -> SolutionField:
    """Return a detector copy with v replaced by v + eps*x^3 (a non-solution)."""
    def v2(p: Point, n: int) -> Jet3:
        x = jets.lift_variable("x", p, n)
        return s.v(p, n) + eps * x * x * x

    return s.with_meta(v=v2, family_id=s.family_id + "+perturbation")


# ----------------------------------------------------------------------
# coordinate conversions
# ----------------------------------------------------------------------

def convert(s: SolutionField, to: str, basepoint: Point,
            tol: float = 1e-10) -> SolutionField:
    """Convert among the UV / UQ / UW forms.

    Quadrature-based reconstructions integrate along axis-parallel paths
    anchored at ``basepoint``; the potentials carry the gauge
    q(t,x,y0) = 0 (UV->UQ) and v fixed up to a function of y (UQ->UV).
    """
    if to == s.coords:
        return s
    u0, second = s.u, s.v

    def guard(fn):
        def wrapped(p: Point, n: int) -> Jet3:
            try:
                return fn(p, n)
            except DomainError as exc:
                raise GaugeError(f"validity hole on integration path: {exc}") \
                    from exc
        return wrapped

    if s.coords == "UV" and to == "UW":
        def w(p: Point, n: int) -> Jet3:
            return second(p, n + 1).derive("x")
        return s.with_meta(v=w, coords="UW")

    if s.coords == "UQ" and to == "UW":
        def w(p: Point, n: int) -> Jet3:
            return second(p, n + 1).derive("y")
        return s.with_meta(v=w, coords="UW")

    if s.coords == "UV" and to == "UQ":
        def q(p: Point, n: int) -> Jet3:
            def v_x(pp: Point, nn: int) -> Jet3:
                return second(pp, nn + 1).derive("x")
            return integrate_field_along(guard(v_x), "y", basepoint.y, p, n,
                                         tol=tol)
        return s.with_meta(v=q, coords="UQ")

    if s.coords in ("UQ", "UW") and to == "UV":
        if s.coords == "UQ":
            def w_map(pp: Point, nn: int) -> Jet3:
                return second(pp, nn + 1).derive("y")
        else:
            w_map = second

        def v(p: Point, n: int) -> Jet3:
            # v = int_x0^x w dx' + int_t0^t (w_x + 2 u w)|_(t',x0,y) dt'
            x_part = integrate_field_along(guard(w_map), "x", basepoint.x,
                                           p, n, tol=tol)

            def t_integrand(pp: Point, nn: int) -> Jet3:
                pc = Point(pp.t, basepoint.x, pp.y)
                wj = w_map(pc, nn + 1)
                uj = u0(pc, nn)
                g = wj.derive("x") + 2.0 * (uj * wj.truncate(nn))
                # restriction to x = x0: drop coefficients carrying x-powers
                out = g.coeffs.copy()
                for m, e in enumerate(jets._tables(nn).exps):
                    if e[1] != 0:
                        out[m] = 0.0
                return Jet3(pp, nn, out)

            t_part = integrate_field_along(guard(t_integrand), "t",
                                           basepoint.t, p, n, tol=tol)
            return x_part + t_part

        return s.with_meta(v=v, coords="UV")

    if s.coords == "UW" and to == "UQ":
        def q(p: Point, n: int) -> Jet3:
            return integrate_field_along(guard(second), "y", basepoint.y,
                                         p, n, tol=tol)
        return s.with_meta(v=q, coords="UQ")

    raise ValueError(f"unsupported conversion {s.coords} -> {to}")


# ----------------------------------------------------------------------
# grid reports
# ----------------------------------------------------------------------

def residual_report(s: SolutionField, grid: list[Point],
                    order: int = 4) -> ResidualReport:
    r1s, r2s, skipped = [], [], 0
    for p in grid:
        if not s.validity(p):
            skipped += 1
            continue
        try:
            r1, r2 = residual(s, p, order)
        except DomainError:
            skipped += 1
            continue
        r1s.append(abs(r1))
        r2s.append(abs(r2))
    def _mx(a):
        return max(a) if a else 0.0
    def _rms(a):
        return math.sqrt(sum(x * x for x in a) / len(a)) if a else 0.0
    return ResidualReport(
        family=s.family_id, params={k: str(v) for k, v in s.params.items()},
        grid_spec={"n": len(grid)},
        r1_max=_mx(r1s), r2_max=_mx(r2s),
        r1_rms=_rms(r1s), r2_rms=_rms(r2s), skipped=skipped)
