import math

import numpy as np
import pytest

from blp import jets
from blp.jets import Point
from blp.specfun import (
    DegenerateError, EllipticInvariants, NegativeRadicand, NotDegenerate,
    PoleError, QuarticODE, degenerate_solutions, invariants_from_quartic,
    quartic_particular_solution, weierstrass_p, weierstrass_series,
)


def quartic_from_reduction(C0, delta, C2):
    """F(phi) = phi^4 + 2 C0 phi^2 + 4 delta phi + C2 in normalized form."""
    return QuarticODE(1.0, 0.0, C0 / 3.0, delta, C2)


def test_invariants_example():
    inv = invariants_from_quartic(QuarticODE(1, 0, 1, 1, 2))
    assert inv.g2 == 5.0
    assert inv.g3 == 0.0
    assert inv.discriminant == 125.0


def test_invariants_zero():
    inv = invariants_from_quartic(QuarticODE(0, 0, 0, 0, 0))
    assert (inv.g2, inv.g3, inv.discriminant) == (0.0, 0.0, 0.0)


def test_invariants_reduction_identity(rng):
    # g2 = C2 + C0^2/3, g3 = C0 C2/3 - C0^3/27 - delta^2
    for _ in range(50):
        C0, delta, C2 = rng.uniform(-3, 3, size=3)
        inv = invariants_from_quartic(quartic_from_reduction(C0, delta, C2))
        assert inv.g2 == pytest.approx(C2 + C0 ** 2 / 3.0, abs=1e-12)
        assert inv.g3 == pytest.approx(
            C0 * C2 / 3.0 - C0 ** 3 / 27.0 - delta ** 2, abs=1e-12)


def test_p_equianharmonic_degenerate_zero():
    # g2 = g3 = 0 collapses P to 1/z^2
    inv = EllipticInvariants(0.0, 0.0)
    p, dp, zeta = weierstrass_p(2.0, inv)
    assert p == pytest.approx(0.25, abs=1e-12)
    assert dp == pytest.approx(-0.25, abs=1e-12)
    assert zeta == pytest.approx(-0.5, abs=1e-12)


def test_p_defining_ode_residual():
    inv = EllipticInvariants(5.0, 0.0)
    for z in np.linspace(0.05, 2.5, 100):
        try:
            p, dp, _ = weierstrass_p(float(z), inv)
        except PoleError:
            continue
        res = dp * dp - (4.0 * p ** 3 - inv.g2 * p - inv.g3)
        assert abs(res) < 1e-9 * (1.0 + abs(p) ** 3)


def test_p_laurent_structure():
    # P(z) - 1/z^2 - g2 z^2/20 - g3 z^4/28 = O(z^6)
    inv = EllipticInvariants(1.7, -0.6)
    z = 1e-2
    p, _, _ = weierstrass_p(z, inv)
    rem = p - 1.0 / z ** 2 - inv.g2 * z ** 2 / 20.0 - inv.g3 * z ** 4 / 28.0
    assert abs(rem) < 1e-11


def test_p_even_zeta_odd():
    inv = EllipticInvariants(2.2, 0.7)
    for z in np.linspace(0.1, 3.0, 24):
        try:
            p1, dp1, z1 = weierstrass_p(float(z), inv)
            p2, dp2, z2 = weierstrass_p(float(-z), inv)
        except PoleError:
            continue
        assert p1 == pytest.approx(p2, abs=1e-10 * (1 + abs(p1)))
        assert z1 == pytest.approx(-z2, abs=1e-10 * (1 + abs(z1)))
        assert dp1 == pytest.approx(-dp2, abs=1e-10 * (1 + abs(dp1)))


def test_degenerate_limit_to_inverse_square():
    inv = EllipticInvariants(1e-6, 0.0)
    p, _, _ = weierstrass_p(1.0, inv)
    assert p == pytest.approx(1.0, abs=1e-4)


def test_zeta_prime_is_p():
    # h large enough that the ~1e-11 evaluation noise stays below truncation
    inv = EllipticInvariants(3.0, 0.4)
    h = 1e-4
    for z in [0.3, 0.9, 1.4]:
        _, _, zp = weierstrass_p(z + h, inv)
        _, _, zm = weierstrass_p(z - h, inv)
        p, _, _ = weierstrass_p(z, inv)
        assert (zp - zm) / (2 * h) == pytest.approx(p, rel=1e-6, abs=1e-6)


def test_weierstrass_series_consistency():
    inv = EllipticInvariants(2.0, -0.3)
    z0, dz = 0.8, 0.02
    pser, zser = weierstrass_series(z0, inv, 8)
    p_direct, dp_direct, zeta_direct = weierstrass_p(z0 + dz, inv)
    p_series = sum(pser[k] * dz ** k for k in range(9))
    z_series = sum(zser[k] * dz ** k for k in range(9))
    assert p_series == pytest.approx(p_direct, rel=1e-9)
    assert z_series == pytest.approx(zeta_direct, rel=1e-9)


def test_particular_solution_satisfies_ode():
    # phi' extracted from a jet evaluation; phi'^2 = F(phi) is the oracle
    q = quartic_from_reduction(1.0, 1.0, 3.0)
    phi = quartic_particular_solution(q, 0.0)
    checked = 0
    for z in np.linspace(0.1, 2.4, 50):
        p = Point(0.0, float(z), 0.0)
        try:
            out = phi(jets.lift_variable("x", p, 2))
        except PoleError:
            continue
        val = out.value
        d = out.extract((0, 1, 0))
        if abs(val) > 20:
            continue
        checked += 1
        assert d * d == pytest.approx(
            q.F(val), rel=1e-7, abs=1e-7), z
    assert checked > 30


def test_particular_solution_float_jet_agree():
    q = quartic_from_reduction(1.0, 1.0, 3.0)
    phi = quartic_particular_solution(q, 0.0)
    for z in np.linspace(0.15, 2.3, 40):
        p = Point(0.0, float(z), 0.0)
        try:
            fl = phi(float(z))
            out = phi(jets.lift_variable("x", p, 2))
        except PoleError:
            continue
        if abs(fl) > 20:
            continue
        assert fl == pytest.approx(out.value, rel=1e-8, abs=1e-8)


def test_particular_solution_simplified_form():
    # C2 >= 0, a = 0 must reduce to the simple P, P' expression
    C0, delta, C2 = 0.7, 1.0, 2.0
    q = quartic_from_reduction(C0, delta, C2)
    inv = invariants_from_quartic(q)
    phi = quartic_particular_solution(q, 0.0)
    for z in [0.3, 0.8, 1.7]:
        p, dp, _ = weierstrass_p(z, inv)
        simple = 6.0 * (3.0 * math.sqrt(C2) * dp + delta * (6.0 * p - C0)) \
            / ((6.0 * p - C0) ** 2 - 9.0 * C2)
        assert phi(z) == pytest.approx(simple, rel=1e-10)


def test_particular_solution_jet_argument():
    q = quartic_from_reduction(1.0, 1.0, 3.0)
    phi = quartic_particular_solution(q, 0.0)
    p = Point(0.0, 0.4, 0.35)
    zj = jets.lift_variable("x", p, 3) + jets.lift_variable("y", p, 3)
    out = phi(zj)
    h = 1e-4
    w = 0.75
    d1 = (phi(w + h) - phi(w - h)) / (2 * h)
    assert out.value == pytest.approx(phi(w), rel=1e-11)
    assert out.extract((0, 1, 0)) == pytest.approx(d1, rel=1e-6)


def test_negative_radicand():
    # F(phi) = phi^4 - 1 is negative at 0
    q = QuarticODE(1.0, 0.0, 0.0, 0.0, -1.0)
    with pytest.raises(NegativeRadicand):
        quartic_particular_solution(q, 0.0)


def test_degenerate_rejected_by_particular_solution():
    # (phi^2 - 1)^2 has double roots: discriminant 0
    q = QuarticODE(1.0, 0.0, -1.0 / 3.0, 0.0, 1.0)
    assert invariants_from_quartic(q).discriminant == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(DegenerateError):
        quartic_particular_solution(q, 2.0)


def test_degenerate_inverse_linear_only():
    # c = b = 0, a = 1, lam = 0: F = phi^4
    q = QuarticODE(1.0, 0.0, 0.0, 0.0, 0.0)
    branches = degenerate_solutions(q, 0.0)
    assert [b.name for b in branches] == ["inverse_linear"]
    phi = branches[0]
    for z in [0.5, 1.0, 2.0]:
        assert phi(z) == pytest.approx(1.0 / z)


def test_degenerate_branches_satisfy_ode():
    h = 1e-5
    cases = []
    # triple root at 1/2: the quartic behind the first elementary 2.9 branch
    cases.append((quartic_from_reduction(-0.75, 0.25, -3.0 / 16.0), 0.5))
    # double root pair: F = (phi^2-1)^2, lam = 1 -> c > 0 exponential branch
    cases.append((QuarticODE(1.0, 0.0, -1.0 / 3.0, 0.0, 1.0), 1.0))
    # c < 0 with D > 0: F = phi^4 - phi^2 = phi^2 (phi^2 - 1), lam = 0,
    # whose branch is phi = -eps/sin(z)
    cases.append((QuarticODE(1.0, 0.0, -1.0 / 6.0, 0.0, 0.0), 0.0))
    found_names = set()
    for q, lam in cases:
        branches = degenerate_solutions(q, lam)
        assert branches, (q, lam)
        for br in branches:
            found_names.add(br.name)
            checked = 0
            for z in np.linspace(-2.0, 2.7, 50):
                try:
                    val = br(float(z))
                    d = (br(z + h) - br(z - h)) / (2 * h)
                except (ArithmeticError, ZeroDivisionError, OverflowError):
                    continue
                if abs(val) > 1e4:
                    continue
                checked += 1
                assert d * d == pytest.approx(
                    q.F(val), rel=2e-6, abs=1e-8), (br.name, z)
            assert checked > 10, br.name
    assert {"rational", "exponential", "trigonometric"} <= found_names


def test_simple_root_not_degenerate():
    q = quartic_from_reduction(1.0, 1.0, 3.0)
    # phi = 1 is not even a root
    with pytest.raises(NotDegenerate):
        degenerate_solutions(q, 1.0)


def test_homogeneity_law():
    # P(lam z; g2/lam^4, g3/lam^6) = P(z; g2, g3)/lam^2, and zeta scales
    # by 1/lam: an independent structural identity of the lattice scaling
    base = EllipticInvariants(2.4, -0.7)
    for lam in (0.5, 1.3, 2.0):
        scaled = EllipticInvariants(base.g2 / lam ** 4, base.g3 / lam ** 6)
        for z in (0.35, 0.8, 1.4):
            p1, dp1, z1 = weierstrass_p(z, base)
            p2, dp2, z2 = weierstrass_p(lam * z, scaled)
            assert p2 == pytest.approx(p1 / lam ** 2, rel=1e-9, abs=1e-10)
            assert dp2 == pytest.approx(dp1 / lam ** 3, rel=1e-9, abs=1e-10)
            assert z2 == pytest.approx(z1 / lam, rel=1e-9, abs=1e-10)


def test_addition_theorem():
    # P(u+v) = ((P'(u)-P'(v))/(2(P(u)-P(v))))^2 - P(u) - P(v) for u != v
    inv = EllipticInvariants(3.1, 0.6)
    for (u, v) in [(0.3, 0.5), (0.45, 0.9), (0.25, 1.1)]:
        pu, du, _ = weierstrass_p(u, inv)
        pv, dv, _ = weierstrass_p(v, inv)
        ps, _, _ = weierstrass_p(u + v, inv)
        rhs = ((du - dv) / (2.0 * (pu - pv))) ** 2 - pu - pv
        assert ps == pytest.approx(rhs, rel=1e-8, abs=1e-9)
