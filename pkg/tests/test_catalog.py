import numpy as np
import pytest

from blp import catalog, jets
from blp.catalog import (
    BadBinding, HeatWitness, UnknownFamily, WitnessViolation,
    combine_witnesses, heat_witness_library, instantiate, list_families,
    sample_bindings, sinh_gordon_kink,
)
from blp.exprdsl import parse
from blp.jets import Point
from blp.system import residual, residual_report


def grid_for(family_id, n=3):
    (tr, xr, yr) = catalog.default_box(family_id)
    return [Point(float(t), float(x), float(y))
            for t in np.linspace(*tr, n)
            for x in np.linspace(*xr, n)
            for y in np.linspace(*yr, n)]


def test_listing_contains_required_ids():
    ids = [d.id for d in list_families()]
    assert len(ids) >= 22
    assert ids == sorted(set(ids), key=ids.index)  # stable, unique
    assert "F_HOPFCOLE2D" in ids
    for k in range(1, 6):
        assert f"F_VXXX_{k}" in ids
    for fid in ("F_VX0", "F_STATLIOUVILLE", "F_UY0_TRIV", "F_UY0_QA",
                "F_UY0_QB", "F_UXXV4X_A", "F_UXXV4X_B", "F_UXX_BERNOULLI",
                "F_UEQV", "F_R29_ELLIPTIC", "F_R29_ELEM_1", "F_R29_ELEM_2",
                "F_R29_ELEM_3", "F_R22_ELEM_1", "F_R22_ELEM_2",
                "F_R22_ELEM_3", "F_R24_PAINLEVE4", "F_R29_PAINLEVE2",
                "F_SINHGORDON", "F_LAPLACE_IMG_FWD1", "F_LAPLACE_IMG_FWD4",
                "F_LAPLACE_IMG_INV3", "F_LAPLACE_IMG_INV3X",
                "F_LAPLACE_IMG_INV5"):
        assert fid in ids, fid


def test_descriptor_params():
    desc = {d.id: d for d in list_families()}
    assert desc["F_HOPFCOLE2D"].required_params == (
        ("Phi", "heat_witness_forward"),)
    assert desc["F_VXXX_1"].required_params[-1] == ("delta", "flag01")


def test_unknown_family_and_bad_binding():
    with pytest.raises(UnknownFamily):
        instantiate("F_NOPE", {})
    with pytest.raises(BadBinding):
        instantiate("F_UY0_TRIV", {"bogus": 1})
    with pytest.raises(BadBinding):
        instantiate("F_VXXX_1", {"delta": 2})


def test_hopf_cole_example():
    # Phi = e^(x+t) (1+y): u = 1, v = 1/(1+y)
    w = combine_witnesses([heat_witness_library("plane_exp", k=1.0)],
                          [parse("1+y", "y")])
    s = instantiate("F_HOPFCOLE2D", {"Phi": w})
    p = Point(0.4, 0.2, 0.7)
    assert s.u(p, 2).value == pytest.approx(1.0, abs=1e-12)
    assert s.v(p, 2).value == pytest.approx(1.0 / 1.7, abs=1e-12)
    assert residual(s, p) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_vxxx4_example():
    s = instantiate("F_VXXX_4", {"alpha": "y", "gamma": "0"})
    p = Point(0.7, 0.4, 0.8)
    e = p.x + 2.0 * p.y * p.t
    assert s.u(p, 2).value == pytest.approx(p.y)
    assert s.v(p, 2).value == pytest.approx(p.y * e * e - p.x)
    rep = residual_report(s, grid_for("F_VXXX_4"))
    assert max(rep.r1_max, rep.r2_max) < 1e-10


def test_r29_elem1_example():
    s = instantiate("F_R29_ELEM_1", {})
    p = Point(0.2, 0.4, 0.3)
    w = 0.7
    assert s.u(p, 2).value == pytest.approx(1 / (w - 1) - 1 / (w + 1) + 0.5)
    assert s.v(p, 2).value == pytest.approx(1 / (w - 1) + (w + 0.2) / 4)
    r1, r2 = residual(s, p)
    assert abs(r1) < 1e-12 and abs(r2) < 1e-12


def test_heat_witness_polynomial():
    w = heat_witness_library("heat_polynomial", n=2)
    p = Point(0.5, 0.3, 0.0)
    f = w.Phi(p, 2)
    assert f.value == pytest.approx(p.x ** 2 + 2 * p.t)
    assert w.probe([p]) < 1e-12


def test_heat_witness_plane_exp_directions():
    fw = heat_witness_library("plane_exp", k=1.0)
    bw = heat_witness_library("plane_exp", k=1.0, direction="backward")
    assert fw.probe(catalog._PROBE_GRID) < 1e-10
    assert bw.probe(catalog._PROBE_GRID) < 1e-10


def test_heat_witness_gaussian():
    w = heat_witness_library("gaussian", t0=1.0, direction="backward")
    pts = [Point(t, x, 0.0) for t in np.linspace(0.2, 0.8, 4)
           for x in (-0.4, 0.3)]
    assert w.probe(pts) < 1e-10
    fwd = heat_witness_library("gaussian", t0=1.0)
    pts = [Point(t, x, 0.0) for t in np.linspace(1.1, 2.0, 4)
           for x in (-0.4, 0.3)]
    assert fwd.probe(pts) < 1e-10


def test_witness_direction_mismatch_rejected():
    fw = heat_witness_library("plane_exp", k=1.0)
    with pytest.raises(BadBinding):
        instantiate("F_VX0", {"Phi": fw})


def test_witness_violation_detected():
    def bogus(p, n):
        t, x, _ = jets.coordinate_jets(p, n)
        return jets.exp(x + 2.0 * t)
    bad = HeatWitness(Phi=bogus, H=0, direction="forward", label="bogus")
    with pytest.raises(WitnessViolation):
        instantiate("F_HOPFCOLE2D", {"Phi": bad})


def test_sinh_gordon_probe_rejects_wrong_theta():
    def theta(p, n):
        t, x, y = jets.coordinate_jets(p, n)
        return x * y
    with pytest.raises(WitnessViolation):
        instantiate("F_SINHGORDON", {"theta": theta})


CONSTRAINT_CASES = [
    ("F_VX0", {}),
    ("F_HOPFCOLE2D", {}),
    ("F_UY0_QA", {}),
    ("F_UY0_QB", {}),
    ("F_VXXX_1", {}),
    ("F_VXXX_4", {}),
    ("F_UXXV4X_A", {}),
    ("F_UEQV", {}),
]


@pytest.mark.parametrize("fid,b", CONSTRAINT_CASES)
def test_constraint_tags_are_live(fid, b):
    rng = np.random.default_rng(5)
    bindings = b or sample_bindings(fid, rng)
    s = instantiate(fid, bindings)
    pts = [p for p in grid_for(fid) if s.validity(p)][:8]
    assert pts
    for p in pts:
        u = s.u(p, 4)
        v = s.v(p, 4)
        if fid == "F_VX0":
            assert abs(v.extract((0, 1, 0))) < 1e-10
        elif fid == "F_HOPFCOLE2D":
            assert abs(u.extract((0, 0, 1)) - v.extract((0, 1, 0))) < 1e-10
        elif fid.startswith("F_UY0"):
            assert abs(u.extract((0, 0, 1))) < 1e-10
        elif fid.startswith("F_VXXX"):
            assert abs(v.extract((0, 3, 0))) < 1e-9
        elif fid.startswith("F_UXXV4X"):
            assert abs(u.extract((0, 2, 0))) < 1e-9
            assert abs(v.extract((0, 4, 0))) < 1e-7
        elif fid == "F_UEQV":
            assert u.value == v.value


def test_elliptic_profile_satisfies_quartic():
    rng = np.random.default_rng(11)
    b = sample_bindings("F_R29_ELLIPTIC", rng)
    s = instantiate("F_R29_ELLIPTIC", b)
    from blp.specfun import QuarticODE, quartic_particular_solution
    q = QuarticODE(1.0, 0.0, b["C0"] / 3.0, b["delta"], b["C2"])
    phi = quartic_particular_solution(q, 0.0)
    for w in np.linspace(0.4, 1.2, 9):
        out = phi(jets.lift_variable("x", Point(0, float(w), 0), 1))
        res = out.extract((0, 1, 0)) ** 2 - q.F(out.value)
        assert abs(res) < 1e-7 * (1.0 + abs(q.F(out.value)))


def test_universal_residual_gate(rng):
    worst = {}
    for d in list_families():
        for trial in range(2):
            b = sample_bindings(d.id, rng)
            s = instantiate(d.id, b)
            rep = residual_report(s, grid_for(d.id))
            assert rep.skipped < 20, (d.id, rep.skipped)
            quad = d.id in ("F_VXXX_2", "F_SINHGORDON", "F_R29_ELLIPTIC",
                            "F_UXX_BERNOULLI", "F_R24_PAINLEVE4",
                            "F_R29_PAINLEVE2")
            bound = 1e-6 if quad else 1e-8
            assert max(rep.r1_max, rep.r2_max) < bound, \
                (d.id, rep.r1_max, rep.r2_max)
            worst[d.id] = max(rep.r1_max, rep.r2_max)
    assert len(worst) >= 22


def test_perturbation_detector_every_family(rng):
    # adding 0.05 x^3 to v must push the first-equation residual above
    # 1e-2 (its third x-derivative alone contributes 0.6)
    from blp.system import perturb_v
    for d in list_families():
        field = perturb_v(
            instantiate(d.id, sample_bindings(d.id, rng)), eps=0.05)
        hit = 0.0
        for p in grid_for(d.id, 2):
            if not field.validity(p):
                continue
            try:
                r1, r2 = residual(field, p)
            except Exception:
                continue
            hit = max(hit, abs(r1), abs(r2))
            if hit > 1e-2:
                break
        assert hit > 1e-2, d.id
