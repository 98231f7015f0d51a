import math

import numpy as np
import pytest

from blp import catalog, jets, transforms
from blp.jets import Jet3, Point
from blp.system import SolutionField, convert, residual, residual_uq
from blp.transforms import (
    CoveringEigenfunction, InverseMapError, PointSymmetry,
    UndefinedTransform, apply_symmetry, covering_solutions_for_constraint,
    d_transform, darboux, darboux_iterated, darboux_psi, i_transform,
    identity_symmetry, laplace_forward_uq, laplace_forward_uv,
    laplace_inverse_uq, laplace_inverse_uv, p_transform, s_transform,
    uq_seed, z_transform,
)

PTS = [Point(0.7, 0.3, 0.45), Point(1.0, 0.6, 0.8), Point(1.3, -0.2, 0.6)]


def jmap(fn):
    def m(p, n):
        t, x, y = jets.coordinate_jets(p, n)
        return fn(t, x, y)
    return m


ZERO_UQ = SolutionField(u=lambda p, n: Jet3.constant(0.0, p, n),
                        v=lambda p, n: Jet3.constant(0.0, p, n),
                        coords="UQ", family_id="zero")


@pytest.fixture(scope="module")
def ueqv():
    return catalog.instantiate("F_UEQV", {"alpha": "4+sin(y)"})


def random_elementary(rng):
    k = rng.integers(0, 5)
    if k == 0:
        return d_transform(f"t + {float(rng.uniform(0.2, 0.6))}*sin(t)")
    if k == 1:
        return s_transform(f"y + {float(rng.uniform(0.3, 0.8))}*sin(y)")
    if k == 2:
        return p_transform(f"{float(rng.uniform(-0.5, 0.5))}*t^2")
    if k == 3:
        return z_transform(f"{float(rng.uniform(-1, 1))}*cos(y)")
    return i_transform(-1)


def test_identity(ueqv):
    out = apply_symmetry(identity_symmetry(), ueqv)
    for p in PTS:
        assert out.u(p, 2).value == pytest.approx(ueqv.u(p, 2).value,
                                                  abs=1e-12)
        assert out.v(p, 2).value == pytest.approx(ueqv.v(p, 2).value,
                                                  abs=1e-12)


def test_scaling_on_trivial_field():
    triv = catalog.instantiate("F_UY0_TRIV", {})
    out = apply_symmetry(s_transform("2*y"), triv)
    p = Point(1.0, 0.8, 1.2)
    assert out.v(p, 2).value == pytest.approx(p.x / 2, abs=1e-12)
    assert residual(out, p) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_monotonicity_validation():
    with pytest.raises(ValueError):
        d_transform("-t")          # T_t < 0
    with pytest.raises(ValueError):
        s_transform("y^2")         # Y_y changes sign on the window


def test_inverse_map_error_outside_window():
    g = d_transform("t")
    out = apply_symmetry(g, catalog.instantiate("F_UY0_TRIV", {}))
    with pytest.raises(InverseMapError):
        out.u(Point(100.0, 0.0, 0.0), 1)


def test_group_action_and_residual(ueqv, rng):
    worst_law, worst_res = 0.0, 0.0
    for _ in range(10):
        g1 = random_elementary(rng)
        g2 = random_elementary(rng)
        combined = apply_symmetry(g2.compose(g1), ueqv)
        sequential = apply_symmetry(g2, apply_symmetry(g1, ueqv))
        for p in PTS:
            if not (combined.validity(p) and sequential.validity(p)):
                continue
            worst_law = max(
                worst_law,
                abs(combined.u(p, 2).value - sequential.u(p, 2).value),
                abs(combined.v(p, 2).value - sequential.v(p, 2).value))
            r1, r2 = residual(combined, p)
            worst_res = max(worst_res, abs(r1), abs(r2))
    assert worst_law < 1e-9
    assert worst_res < 1e-7


class _PhiW:
    """Forward witness e^(x+t) + y, nonseparable in (x, y)."""
    @staticmethod
    def Phi(p, n):
        t, x, y = jets.coordinate_jets(p, n)
        return jets.exp(x + t) + y


class _PhiB:
    """Backward witness e^(x-t) + x*y."""
    @staticmethod
    def Phi(p, n):
        t, x, y = jets.coordinate_jets(p, n)
        return jets.exp(x - t) + x * y


def test_forward_chain_recursion():
    seed = uq_seed(_PhiW, constraint="u_y=q_y")
    stepped = laplace_forward_uq(seed)

    def phi1(p, n):
        f = _PhiW.Phi(p, n + 2)
        return (f.truncate(n) * f.derive("x").derive("y")
                - f.derive("x").truncate(n) * f.derive("y").truncate(n))

    for p in PTS:
        assert max(map(abs, residual_uq(stepped, p))) < 1e-10
        f1 = phi1(p, 1)
        f0 = _PhiW.Phi(p, 1)
        want_u = f1.derive("x").value / f1.value \
            - f0.derive("x").value / f0.value
        assert stepped.u(p, 0).value == pytest.approx(want_u, abs=1e-8)
        assert stepped.v(p, 0).value == pytest.approx(
            f1.derive("x").value / f1.value, abs=1e-8)


def test_inverse_chain_on_qy0_seed():
    seed = uq_seed(_PhiB, constraint="q_y=0")
    inv1 = laplace_inverse_uq(seed)
    for p in PTS:
        assert max(map(abs, residual_uq(inv1, p))) < 1e-10
        f0 = _PhiB.Phi(p, 3)
        s1 = f0.derive("x") / f0.truncate(2)
        f1 = f0.truncate(1) * s1.derive("y").truncate(1)
        assert inv1.u(p, 0).value == pytest.approx(
            -f1.derive("x").value / f1.value, abs=1e-9)


def test_forward_undefined_on_qy0():
    seed = uq_seed(_PhiB, constraint="q_y=0")
    bad = laplace_forward_uq(seed)
    with pytest.raises(UndefinedTransform):
        bad.u(PTS[0], 0)
    assert not bad.validity(PTS[0])


def test_inverse_undefined_on_uyqy():
    seed = uq_seed(_PhiW, constraint="u_y=q_y")
    bad = laplace_inverse_uq(seed)
    with pytest.raises(UndefinedTransform):
        bad.u(PTS[0], 0)


def test_forward_then_inverse_uq_returns_u():
    seed = uq_seed(_PhiW, constraint="u_y=q_y")
    back = laplace_inverse_uq(laplace_forward_uq(seed))
    for p in PTS:
        assert back.u(p, 1).value == pytest.approx(seed.u(p, 1).value,
                                                   abs=1e-8)
        # q is recovered exactly as well for this map pair
        assert back.v(p, 1).value == pytest.approx(seed.v(p, 1).value,
                                                   abs=1e-8)


def test_theta_shift_self_map():
    # forward Laplace shifts the theta parameter of the quadrature family;
    # the path base stays off the family's x = 0 pole line.  The
    # u-component matches pointwise for any beta; the v-component matches
    # modulo an additive function of y once the y-rescaling gauge is
    # trivial (beta_y = 0), since a nonconstant beta re-enters v through
    # the leading coefficient and is removed by a y-reparameterization.
    base = Point(1.0, 0.5, 0.0)
    s0 = catalog.instantiate(
        "F_VXXX_2", {"beta": "2+cos(y)", "theta": "t", "t0": 1.0})
    s1 = catalog.instantiate(
        "F_VXXX_2", {"beta": "2+cos(y)", "theta": "t+1", "t0": 1.0})
    fwd = laplace_forward_uv(s0, base)
    pts = [Point(1.1, 0.7, 0.4), Point(1.3, 0.9, 0.8), Point(0.9, 1.2, 0.5)]
    for p in pts:
        assert fwd.u(p, 1).value == pytest.approx(s1.u(p, 1).value,
                                                  abs=1e-9)
    c0 = catalog.instantiate("F_VXXX_2",
                             {"beta": "2", "theta": "t", "t0": 1.0})
    c1 = catalog.instantiate("F_VXXX_2",
                             {"beta": "2", "theta": "t+1", "t0": 1.0})
    fwdc = laplace_forward_uv(c0, base)
    offs = []
    for (t, x) in [(1.0, 0.8), (1.2, 1.1), (1.4, 0.7)]:
        p = Point(t, x, 0.6)
        assert fwdc.u(p, 1).value == pytest.approx(c1.u(p, 1).value,
                                                   abs=1e-9)
        offs.append(fwdc.v(p, 1).value - c1.v(p, 1).value)
    assert np.ptp(offs) < 1e-7


FWD_IMAGE_CASES = [
    ("F_VXXX_1",
     {"alpha": "sin(y)", "beta": "2+cos(y)", "gamma": "y", "delta": 1},
     "F_LAPLACE_IMG_FWD1",
     {"alpha": "sin(y)", "beta": "2+cos(y)", "gamma": "y"}),
    ("F_VXXX_4",
     {"alpha": "1+0.3*sin(y)", "gamma": "y/2"},
     "F_LAPLACE_IMG_FWD4",
     {"alpha": "1+0.3*sin(y)", "gamma": "y/2"}),
]


@pytest.mark.parametrize("src,srcb,img,imgb", FWD_IMAGE_CASES)
def test_forward_uv_matches_printed_image(src, srcb, img, imgb):
    base = Point(1.0, 0.0, 0.5)
    fwd = laplace_forward_uv(catalog.instantiate(src, srcb), base)
    closed = catalog.instantiate(img, imgb)
    pts = [Point(t, x, y) for t in (0.9, 1.2) for x in (0.4, 0.9)
           for y in (0.45, 0.8)]
    for p in pts:
        assert fwd.u(p, 1).value == pytest.approx(closed.u(p, 1).value,
                                                  abs=1e-7)
    for y in (0.45, 0.8):
        offs = [fwd.v(Point(t, x, y), 1).value
                - closed.v(Point(t, x, y), 1).value
                for t in (0.9, 1.2) for x in (0.4, 0.9)]
        assert np.ptp(offs) < 1e-7, y


def test_inverse_uv_matches_printed_image():
    base = Point(1.0, 0.2, 0.5)
    src = catalog.instantiate(
        "F_VXXX_3", {"alpha": "sin(y)", "beta": "2+cos(y)",
                     "gamma": "1+0.2*y"})
    inv = laplace_inverse_uv(src, base)
    closed = catalog.instantiate(
        "F_LAPLACE_IMG_INV3", {"alpha": "sin(y)", "beta": "2+cos(y)",
                               "gamma": "1+0.2*y"})
    pts = [Point(t, x, y) for t in (0.9, 1.2) for x in (0.5, 0.9)
           for y in (0.45, 0.7)]
    for p in pts:
        assert inv.u(p, 1).value == pytest.approx(closed.u(p, 1).value,
                                                  abs=1e-7)
    for y in (0.45, 0.7):
        offs = [inv.v(Point(t, x, y), 1).value
                - closed.v(Point(t, x, y), 1).value
                for t in (0.9, 1.2) for x in (0.5, 0.9)]
        assert np.ptp(offs) < 1e-7


def test_laplace_uv_output_is_solution(rng):
    base = Point(1.0, 0.0, 0.5)
    b = catalog.sample_bindings("F_VXXX_1", rng)
    b["delta"] = 1
    fwd = laplace_forward_uv(catalog.instantiate("F_VXXX_1", b), base)
    pts = [Point(t, x, y) for t in np.linspace(0.9, 1.3, 3)
           for x in np.linspace(0.3, 1.0, 3)
           for y in np.linspace(0.4, 0.9, 3)]
    used = 0
    for p in pts:
        if not fwd.validity(p):
            continue
        used += 1
        r1, r2 = residual(fwd, p)
        assert abs(r1) < 1e-6 and abs(r2) < 1e-6
    assert used > 15


# ----------------------------------------------------------------------
# Darboux
# ----------------------------------------------------------------------

def test_dt1_hand_example():
    phi = CoveringEigenfunction(phi=jmap(lambda t, x, y: x + y),
                                attached_to=ZERO_UQ)
    out = darboux("DT1", ZERO_UQ, phi)
    for p in PTS:
        assert out.u(p, 0).value == pytest.approx(-1.0 / (p.x + p.y),
                                                  abs=1e-12)
        assert out.v(p, 0).value == pytest.approx(0.0, abs=1e-12)
        assert max(map(abs, residual_uq(out, p))) < 1e-10


def test_dt2_hand_example():
    phi = CoveringEigenfunction(phi=jmap(lambda t, x, y: jets.exp(x - t)),
                                attached_to=ZERO_UQ)
    out = darboux("DT2", ZERO_UQ, phi)
    for p in PTS:
        assert out.u(p, 0).value == pytest.approx(0.0, abs=1e-12)
        assert out.v(p, 0).value == pytest.approx(1.0, abs=1e-12)


def test_eigenfunction_probe_rejects_non_solution():
    with pytest.raises(ValueError):
        CoveringEigenfunction(phi=jmap(lambda t, x, y: x * y),
                              attached_to=ZERO_UQ)


@pytest.fixture(scope="module")
def rich_seed():
    class W:
        @staticmethod
        def Phi(p, n):
            t, x, y = jets.coordinate_jets(p, n)
            return jets.exp(x + t) + 0.3 * y + 0.1

    seed = uq_seed(W, constraint="u_y=q_y")
    th1 = jmap(lambda t, x, y: jets.exp(x - t))
    th2 = jmap(lambda t, x, y: jets.exp(2.0 * x - 4.0 * t))
    phi1 = covering_solutions_for_constraint(
        "u_y=q_y", seed, W, theta=th1,
        zeta=lambda yj: 1.0 + 0.2 * yj * yj)
    phi2 = covering_solutions_for_constraint(
        "u_y=q_y", seed, W, theta=th2, zeta=lambda yj: yj)
    return seed, phi1, phi2


def test_dt_outputs_solve_uq(rich_seed):
    seed, phi1, phi2 = rich_seed
    for kind in ("DT1", "DT2"):
        out = darboux(kind, seed, phi1)
        for p in PTS:
            assert max(map(abs, residual_uq(out, p))) < 1e-8, kind


def test_dt2_preserves_uy_equals_qy(rich_seed):
    seed, phi1, _ = rich_seed
    out = darboux("DT2", seed, phi1)
    for p in PTS:
        u = out.u(p, 2)
        q = out.v(p, 2)
        assert abs(u.extract((0, 0, 1)) - q.extract((0, 0, 1))) < 1e-9


def test_iterated_collapse_n1(rich_seed):
    seed, phi1, _ = rich_seed
    xy = CoveringEigenfunction(phi=jmap(lambda t, x, y: x + y),
                               attached_to=ZERO_UQ)
    single = darboux("DT1", ZERO_UQ, xy)
    once = darboux_iterated("DT1", ZERO_UQ, [xy])
    for p in PTS:
        assert once.u(p, 1).value == pytest.approx(single.u(p, 1).value,
                                                   abs=1e-10)
        assert once.v(p, 1).value == pytest.approx(single.v(p, 1).value,
                                                   abs=1e-10)
    single2 = darboux("DT2", seed, phi1)
    once2 = darboux_iterated("DT2", seed, [phi1])
    for p in PTS:
        assert once2.u(p, 1).value == pytest.approx(single2.u(p, 1).value,
                                                    abs=1e-9)
        assert once2.v(p, 1).value == pytest.approx(single2.v(p, 1).value,
                                                    abs=1e-9)


def test_iterated_n2_equals_composition(rich_seed):
    seed, phi1, phi2 = rich_seed
    for kind in ("DT1", "DT2"):
        once = darboux(kind, seed, phi1)
        psi2 = darboux_psi(kind, phi1.phi, phi2.phi)
        twice = darboux(kind, once,
                        CoveringEigenfunction(phi=psi2, attached_to=once))
        both = darboux_iterated(kind, seed, [phi1, phi2])
        for p in PTS:
            assert both.u(p, 0).value == pytest.approx(
                twice.u(p, 0).value, abs=1e-7)
            assert both.v(p, 0).value == pytest.approx(
                twice.v(p, 0).value, abs=1e-7)
            assert max(map(abs, residual_uq(both, p))) < 1e-8


def test_iterated_dt1_order_swap(rich_seed):
    seed, phi1, phi2 = rich_seed
    ab = darboux_iterated("DT1", seed, [phi1, phi2])
    ba = darboux_iterated("DT1", seed, [phi2, phi1])
    for p in PTS:
        assert ab.u(p, 0).value == pytest.approx(ba.u(p, 0).value,
                                                 abs=1e-9)
        assert ab.v(p, 0).value == pytest.approx(ba.v(p, 0).value,
                                                 abs=1e-9)


def test_commutation_identities(rich_seed):
    seed, phi1, phi2 = rich_seed

    def at(field, p):
        return (field.u(p, 0).value, field.v(p, 0).value)

    # DT1[DT1[p1]p2] o DT1[p1] = DT1[DT1[p2]p1] o DT1[p2]
    lhs = darboux("DT1", darboux("DT1", seed, phi1),
                  CoveringEigenfunction(
                      phi=darboux_psi("DT1", phi1.phi, phi2.phi),
                      attached_to=darboux("DT1", seed, phi1)))
    rhs = darboux("DT1", darboux("DT1", seed, phi2),
                  CoveringEigenfunction(
                      phi=darboux_psi("DT1", phi2.phi, phi1.phi),
                      attached_to=darboux("DT1", seed, phi2)))
    for p in PTS:
        assert at(lhs, p) == pytest.approx(at(rhs, p), abs=1e-7)

    # DT2[DT1[p1]p2] o DT2[p1] = DT2[DT1[p2]p1] o DT2[p2]
    lhs = darboux("DT2", darboux("DT2", seed, phi1),
                  CoveringEigenfunction(
                      phi=darboux_psi("DT2", phi1.phi, phi2.phi),
                      attached_to=darboux("DT2", seed, phi1)))
    rhs = darboux("DT2", darboux("DT2", seed, phi2),
                  CoveringEigenfunction(
                      phi=darboux_psi("DT2", phi2.phi, phi1.phi),
                      attached_to=darboux("DT2", seed, phi2)))
    for p in PTS:
        assert at(lhs, p) == pytest.approx(at(rhs, p), abs=1e-7)

    # DT2[DT1[p1]p2] o DT1[p1] = DT1[DT1[p2]p1] o DT2[p2]
    lhs = darboux("DT2", darboux("DT1", seed, phi1),
                  CoveringEigenfunction(
                      phi=darboux_psi("DT1", phi1.phi, phi2.phi),
                      attached_to=darboux("DT1", seed, phi1)))
    rhs = darboux("DT1", darboux("DT2", seed, phi2),
                  CoveringEigenfunction(
                      phi=darboux_psi("DT2", phi2.phi, phi1.phi),
                      attached_to=darboux("DT2", seed, phi2)))
    for p in PTS:
        assert at(lhs, p) == pytest.approx(at(rhs, p), abs=1e-7)


def test_covering_solution_examples():
    # constraint q_y=0 with Phi = 1, zeta = 1, theta = 0: psi = y - y0
    class One:
        @staticmethod
        def Phi(p, n):
            return Jet3.constant(1.0, p, n)

    seed = uq_seed(One, constraint="q_y=0")
    base = Point(1.0, 0.0, 0.0)
    phi = covering_solutions_for_constraint(
        "q_y=0", seed, One, zeta=lambda yj: 1.0 + 0.0 * yj, base=base)
    for p in PTS:
        assert phi.phi(p, 1).value == pytest.approx(p.y, abs=1e-10)

    # constraint u_y=q_y with zeta alone: psi = zeta(y)/Phi
    class W:
        @staticmethod
        def Phi(p, n):
            t, x, y = jets.coordinate_jets(p, n)
            return jets.exp(x + t) + 0.2 * y

    seed2 = uq_seed(W, constraint="u_y=q_y")
    phi2 = covering_solutions_for_constraint(
        "u_y=q_y", seed2, W, zeta=lambda yj: 2.0 + jets.sin(yj), base=base)
    for p in PTS:
        want = (2.0 + math.sin(p.y)) / W.Phi(p, 0).value
        assert phi2.phi(p, 1).value == pytest.approx(want, abs=1e-9)


def test_convert_roundtrip_on_catalog_family():
    base = Point(1.0, 0.3, 0.4)
    s = catalog.instantiate("F_VXXX_1", {"alpha": "sin(y)",
                                         "beta": "2+cos(y)",
                                         "gamma": "y", "delta": 1})
    uq = convert(s, "UQ", base)
    back = convert(uq, "UV", base)
    pts = [Point(0.9, 0.5, 0.5), Point(1.2, 0.8, 0.7)]
    for p in pts:
        r1, r2 = residual(back, p)
        assert abs(r1) < 1e-7 and abs(r2) < 1e-7
        assert back.u(p, 1).value == pytest.approx(s.u(p, 1).value,
                                                   abs=1e-8)


def test_dt1_preserves_qy0():
    seed = uq_seed(_PhiB, constraint="q_y=0")
    base = Point(1.0, 0.0, 0.0)
    phi = covering_solutions_for_constraint(
        "q_y=0", seed, _PhiB, zeta=lambda yj: 1.0 + 0.3 * yj, base=base)
    out = darboux("DT1", seed, phi)
    for p in PTS:
        q = out.v(p, 1)
        assert abs(q.extract((0, 0, 1))) < 1e-9
        assert max(map(abs, residual_uq(out, p))) < 1e-8


def test_inverse_uv_matches_printed_image_family5():
    base = Point(1.0, 0.2, 0.5)
    src = catalog.instantiate(
        "F_VXXX_5", {"alpha": "sin(y)", "beta": "4+cos(y)"})
    inv = laplace_inverse_uv(src, base)
    closed = catalog.instantiate(
        "F_LAPLACE_IMG_INV5", {"alpha": "sin(y)", "beta": "4+cos(y)"})
    pts = [Point(t, x, y) for t in (0.9, 1.2) for x in (0.5, 0.9)
           for y in (0.45, 0.7)]
    for p in pts:
        assert inv.u(p, 1).value == pytest.approx(closed.u(p, 1).value,
                                                  abs=1e-7)
    for y in (0.45, 0.7):
        offs = [inv.v(Point(t, x, y), 1).value
                - closed.v(Point(t, x, y), 1).value
                for t in (0.9, 1.2) for x in (0.5, 0.9)]
        assert np.ptp(offs) < 1e-7


def test_discrete_involutions():
    # the two sign-flip involutions: x-reflection and y-reflection
    s = catalog.instantiate("F_UEQV", {"alpha": "4+sin(y)"})
    refl_x = apply_symmetry(i_transform(-1), s)
    refl_y = apply_symmetry(s_transform("-y"), s)
    for p in PTS:
        q = Point(p.t, -p.x, p.y)
        assert refl_x.u(q, 1).value == pytest.approx(-s.u(p, 1).value,
                                                     abs=1e-10)
        assert refl_x.v(q, 1).value == pytest.approx(s.v(p, 1).value,
                                                     abs=1e-10)
        r = Point(p.t, p.x, -p.y)
        assert refl_y.u(r, 1).value == pytest.approx(s.u(p, 1).value,
                                                     abs=1e-10)
        assert refl_y.v(r, 1).value == pytest.approx(-s.v(p, 1).value,
                                                     abs=1e-10)
        assert max(map(abs, residual(refl_y, r))) < 1e-9
        # each involution squares to the identity
    twice = apply_symmetry(s_transform("-y"), refl_y)
    p = PTS[0]
    assert twice.v(p, 1).value == pytest.approx(s.v(p, 1).value, abs=1e-10)


def test_convert_gauge_error_on_invalid_path():
    from blp.system import GaugeError
    base = Point(1.0, 0.0, 0.0)   # x0 = 0 sits on the family's pole line
    s = catalog.instantiate("F_VXXX_2",
                            {"beta": "2+cos(y)", "theta": "t", "t0": 1.0})
    uq = convert(s, "UQ", base)
    back = convert(uq, "UV", base)
    with pytest.raises(GaugeError):
        back.v(Point(1.2, 0.8, 0.5), 1)


@pytest.mark.parametrize("fid,bindings", [
    ("F_UY0_QA", {"zeta": "cos(y)"}),
    ("F_VXXX_4", {"alpha": "sin(y)", "gamma": "y"}),
    ("F_VXXX_5", {"alpha": "sin(y)", "beta": "3+cos(y)"}),
    ("F_UEQV", {"alpha": "4+sin(y)"}),
])
def test_convert_roundtrip_families(fid, bindings):
    base = Point(1.0, 0.3, 0.4)
    s = catalog.instantiate(fid, bindings)
    back = convert(convert(s, "UQ", base), "UV", base)
    for p in [Point(0.9, 0.6, 0.5), Point(1.2, 0.8, 0.7)]:
        if not s.validity(p):
            continue
        assert back.u(p, 1).value == pytest.approx(s.u(p, 1).value,
                                                   abs=1e-8)
        # v agrees up to an additive function of y: slopes match
        assert back.v(p, 2).extract((0, 1, 0)) == pytest.approx(
            s.v(p, 2).extract((0, 1, 0)), abs=1e-7)
        r1, r2 = residual(back, p)
        assert abs(r1) < 1e-6 and abs(r2) < 1e-6, fid
