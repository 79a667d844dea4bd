import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmc_forge.catalog import REFERENCE_POINTS, reference_instance
from cmc_forge.errors import (
    BasePointOffQuadric,
    ContractError,
    DomainError,
    DomainExceeded,
    FamilyMismatch,
    OutOfRange,
    Unattainable,
)
from cmc_forge.immersion_families import (
    CYLINDERS,
    DESCRIPTORS,
    cylinder,
    cylinder_mean_curvature,
    instantiate,
    lambda_mu,
    sample_u_domain,
    solve_cylinder_radius,
    write_instance_jsonl,
)
from cmc_forge.profile_ode import ProfilePolynomial, positive_roots, solve_periodic, solve_unbounded
from cmc_forge.pseudo_euclidean import inner, quadric_residual, sample_base
from oracles import golden_min

FAMILIES = sorted(DESCRIPTORS)
PROFILE_FAMILIES = [f for f in FAMILIES if f not in CYLINDERS]

# sign of r^2 lam^2 on the left, right-hand side as a function of r
IDENTITIES = {
    "S1": (-1, lambda r: 1 - r * r),
    "S2": (-1, lambda r: -1 - r * r),
    "S3": (-1, lambda r: 1 - r * r),
    "S4": (+1, lambda r: 1 - r * r),
    "H1": (-1, lambda r: 1 + r * r),
    "H2": (-1, lambda r: -1 + r * r),
    "H3": (-1, lambda r: -1 + r * r),
    "H4": (+1, lambda r: r * r - 1),
    "H5": (+1, lambda r: r * r + 1),
    "E1": (+1, lambda r: 1.0),
    "E2": (+1, lambda r: 1.0),
    "E3": (-1, lambda r: 1.0),
    "E4": (-1, lambda r: -1.0),
}

_CACHE = {}


def ref(fid):
    if fid not in _CACHE:
        _CACHE[fid] = reference_instance(fid)
    return _CACHE[fid]


def grid(inst, nu=9):
    lo, hi = sample_u_domain(inst, nu, margin=0.05)
    return np.linspace(lo, hi, nu)


def base_points(inst, count=4):
    return sample_base(inst.descriptor.base(inst.n, inst.k), 5, count)


def test_lambda_mu_example():
    lam, mu = lambda_mu(1.0, 0.3, 4)
    assert lam == pytest.approx(1.3) and mu == pytest.approx(-2.7)
    assert 3 * lam + mu == pytest.approx(1.2)


def test_lambda_mu_limit_and_domain():
    lam, mu = lambda_mu(1e8, 0.4, 3)
    assert lam == pytest.approx(0.4, abs=1e-15) and mu == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(DomainError):
        lambda_mu(0.0, 0.1, 2)
    with pytest.raises(DomainError):
        lambda_mu(np.array([1.0, -1.0]), 0.1, 2)


@settings(max_examples=300)
@given(g=st.floats(0.05, 50), h=st.floats(-10, 10), n=st.integers(2, 10))
def test_lambda_mu_trace_identity(g, h, n):
    lam, mu = lambda_mu(g, h, n)
    scale = abs(n * h) + n * abs(lam) + abs(mu) + 1.0
    assert abs((n - 1) * lam + mu - n * h) <= 1e-14 * scale


def test_descriptor_table_shape():
    assert len(DESCRIPTORS) == 17
    assert set(CYLINDERS) <= set(DESCRIPTORS)
    for d in DESCRIPTORS.values():
        assert d.flat == d.id.startswith("E")
        assert d.theta_denominator is None if d.flat else d.theta_denominator in {"r^2-1", "r^2+1", "1-r^2"}
    s1 = DESCRIPTORS["S1"]
    assert (s1.c_sign, s1.g_constraint, s1.frame, s1.radial, s1.normal_norm, s1.ambient_level) == (
        1, "gt", "cosh_sinh", "r2m1", -1, 1)
    assert s1.frame_slots(3, 1) == (1, 2)
    assert DESCRIPTORS["H1"].frame_slots(4, 2) == (1, 2)
    assert DESCRIPTORS["S2"].frame_slots(3, 1) == (4, 5)


@pytest.mark.parametrize("fid", [f for f in PROFILE_FAMILIES if REFERENCE_POINTS[f].kind != "arc"])
def test_theta_zero_and_odd(fid):
    inst = ref(fid)
    assert inst.phase(0.0) == 0.0
    for u in grid(inst, 5)[1:]:
        u = min(u, 0.9 * inst.u_range[1])
        assert inst.phase(-u) == pytest.approx(-inst.phase(u), abs=1e-12 * (1 + abs(inst.phase(u))))


def test_s4_theta_period_doubling():
    inst = ref("S4")
    T = inst.solution.period
    assert inst.theta(T) == pytest.approx(2 * inst.theta(T / 2), rel=1e-12)
    assert inst.theta_advance == pytest.approx(inst.theta(T), rel=1e-12)
    assert inst.theta(T + 0.3) == pytest.approx(inst.theta(T) + inst.theta(0.3), rel=1e-12)


def test_cylinder_theta_is_linear():
    inst = cylinder("SCyl1", 3, 1, math.sqrt(2))
    lam0 = 1 / math.sqrt(2) * 1.0  # f / r0 with f = 1
    slope = math.sqrt(2) * lam0 / (2 - 1)
    for u in (0.0, 0.5, -1.25, 3.0):
        assert inst.theta(u) == pytest.approx(slope * u, abs=1e-15)


def test_height_zero_and_fd():
    inst = ref("E1")
    assert inst.height(0.0) == 0.0
    s = 1e-4
    for u in grid(inst, 6):
        fd = (inst.height(u + s) - inst.height(u - s)) / (2 * s)
        assert fd == pytest.approx(float(inst.rate(u)), abs=1e-8)


def test_height_minimal_euc_p():
    # h = 0, n = 2: R' = r g^-2 with r = g / sqrt(c)
    prof = ProfilePolynomial("euc-p", 0.0, 1.0, 2)
    sol = solve_unbounded(prof, positive_roots(prof)[0].t, t_horizon=8.0)
    inst = instantiate("E1", 2, 1, 0.0, 1.0, sol)
    s = 1e-4
    for u in np.linspace(-3, 3, 7):
        g = float(sol.g(u))
        fd = (inst.height(u + s) - inst.height(u - s)) / (2 * s)
        assert float(inst.rate(u)) == pytest.approx(1.0 / g, rel=1e-12)
        assert fd == pytest.approx(1.0 / g, abs=1e-8)


def test_cylinder_height_linear_in_flat_variant_free_case():
    inst = cylinder("SCyl2", 2, 1, 1.0)
    r0, lam0 = 1.0, math.sqrt(2)
    assert inst.theta(2.0) == pytest.approx(2.0 * r0 * lam0 / (r0 * r0 + 1), abs=1e-15)


def test_scyl1_evaluate_example():
    inst = cylinder("SCyl1", 3, 1, math.sqrt(2))
    y = np.zeros(5)
    y[2] = 1.0
    phi = inst.evaluate(y, 0.0)
    expect = math.sqrt(2) * y
    expect[0] = 1.0
    assert np.allclose(phi, expect, atol=1e-15)
    sig = inst.descriptor.signature(3, 1)
    assert inner(phi, phi, sig) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("fid", FAMILIES)
def test_membership_and_normal(fid):
    inst = ref(fid)
    d = inst.descriptor
    sig = d.signature(inst.n, inst.k)
    amb = d.ambient(inst.n, inst.k)
    for y, _ in base_points(inst):
        for u in grid(inst):
            phi = inst.evaluate(y, u)
            nu = inst.gauss_map(y, u)
            if amb is not None:
                assert abs(quadric_residual(phi, amb).value) <= 1e-10 * (1 + phi @ phi)
                assert abs(inner(nu, phi, sig)) <= 1e-10 * (1 + np.linalg.norm(nu) * np.linalg.norm(phi))
            assert abs(inner(nu, nu, sig) - d.normal_norm) <= 1e-10 * (1 + nu @ nu)


@pytest.mark.parametrize("fid", FAMILIES)
def test_profile_direction_norm(fid):
    inst = ref(fid)
    sig = inst.descriptor.signature(inst.n, inst.k)
    y, _ = base_points(inst, 1)[0]
    s = 1e-5
    for u in grid(inst, 5):
        o = inst.phase(u)
        dphi = (inst.evaluate(y, u + s, o) - inst.evaluate(y, u - s, o)) / (2 * s)
        assert inner(dphi, dphi, sig) == pytest.approx(inst.descriptor.profile_norm, abs=1e-8)


@pytest.mark.parametrize("fid", sorted(IDENTITIES))
def test_family_identity_literal(fid):
    inst = ref(fid)
    sign, rhs = IDENTITIES[fid]
    for u in grid(inst, 17):
        r, rp, lam, _ = (float(x) for x in inst.state(u))
        assert rp * rp + sign * r * r * lam * lam - rhs(r) == pytest.approx(0.0, abs=1e-8)
        assert float(inst.identity_residual(u)) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("fid", PROFILE_FAMILIES)
def test_r_lambda_derivative(fid):
    inst = ref(fid)
    s = 2e-5
    for u in grid(inst, 7):
        r1, _, l1, _ = inst.state(u - s)
        r2, _, l2, _ = inst.state(u + s)
        _, rp, _, mu = inst.state(u)
        fd = (r2 * l2 - r1 * l1) / (2 * s)
        assert abs(float(fd - mu * rp)) <= 1e-6 * (1 + abs(float(mu * rp)))


def test_cylinder_mean_curvature_minimum():
    val = cylinder_mean_curvature(math.sqrt(2), 3, "SCyl1")
    assert val == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-15)
    r_min, v_min = golden_min(lambda r: cylinder_mean_curvature(r, 3, "SCyl1"), 1.0001, 10.0)
    assert r_min == pytest.approx(math.sqrt(2), abs=1e-6)
    assert v_min == pytest.approx(0.9428090415820634, abs=1e-12)


def test_cylinder_mean_curvature_n2_and_scyl2():
    vals = [cylinder_mean_curvature(r, 2, "SCyl1") for r in (10.0, 100.0, 1000.0)]
    assert all(v > 1 for v in vals) and vals[0] > vals[1] > vals[2]
    assert vals[-1] == pytest.approx(1.0, abs=1e-6)
    assert cylinder_mean_curvature(1.0, 2, "SCyl2") == pytest.approx(1 / (2 * math.sqrt(2)) + math.sqrt(2) / 2)
    assert cylinder_mean_curvature(1.0, 2, "SCyl2") == pytest.approx(1.06066, abs=1e-5)


def test_hcyl_values():
    f = math.sqrt(0.75)
    assert cylinder_mean_curvature(0.5, 3, "HCyl1") == pytest.approx(2 * f / (3 * 0.5) - 0.5 / (3 * f))
    f = math.sqrt(3.0)
    assert cylinder_mean_curvature(2.0, 3, "HCyl2") == pytest.approx(2 * f / 6 + 2 / (3 * f))


@pytest.mark.parametrize("variant,r0", [("SCyl1", 0.9), ("HCyl1", 1.0), ("HCyl1", 0.0), ("HCyl2", 1.0), ("SCyl2", 0.0)])
def test_cylinder_radius_out_of_range(variant, r0):
    with pytest.raises(OutOfRange):
        cylinder_mean_curvature(r0, 3, variant)


def test_solve_cylinder_radius_examples():
    (r,) = solve_cylinder_radius(2 * math.sqrt(2) / 3, 3, "SCyl1")
    assert r == pytest.approx(math.sqrt(2), abs=1e-6)
    # the right branch tends to 1 from below, so two radii need h < 1
    two = solve_cylinder_radius(0.97, 3, "SCyl1")
    assert len(two) == 2 and two[0] < math.sqrt(2) < two[1]
    for r in two:
        assert cylinder_mean_curvature(r, 3, "SCyl1") == pytest.approx(0.97, abs=1e-10)
    (one,) = solve_cylinder_radius(1.0, 3, "SCyl1")
    assert one < math.sqrt(2)
    assert cylinder_mean_curvature(one, 3, "SCyl1") == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(Unattainable):
        solve_cylinder_radius(1.0, 2, "SCyl1")


@settings(max_examples=30, deadline=None)
@given(r0=st.floats(1.05, 20.0), n=st.integers(2, 6))
def test_solve_cylinder_radius_roundtrip(r0, n):
    h = cylinder_mean_curvature(r0, n, "SCyl1")
    found = solve_cylinder_radius(h, n, "SCyl1")
    assert any(abs(r - r0) <= 1e-7 * r0 for r in found)
    for r in found:
        assert cylinder_mean_curvature(r, n, "SCyl1") == pytest.approx(h, abs=1e-10)


def test_base_point_off_quadric():
    inst = cylinder("SCyl1", 3, 1, math.sqrt(2))
    y = np.array([0.0, 0, 1.0, 0.1, 0])
    with pytest.raises(BasePointOffQuadric):
        inst.evaluate(y, 0.0)
    leak = np.array([0.1, 0, 1.0, 0, 0])
    with pytest.raises(BasePointOffQuadric):
        inst.gauss_map(leak, 0.0)


def test_family_mismatch():
    with pytest.raises(FamilyMismatch):
        ref("E1").theta(0.1)
    with pytest.raises(FamilyMismatch):
        ref("S4").height(0.1)


def test_domain_exceeded():
    inst = ref("E4")
    y, _ = base_points(inst, 1)[0]
    with pytest.raises(DomainExceeded):
        inst.evaluate(y, inst.u_range[1] * 1.5)


def test_instantiate_contracts():
    prof = ProfilePolynomial("sphere-p", 0.0, 2.5, 2)
    sol = solve_periodic(prof, math.sqrt(0.5), math.sqrt(2.0))
    with pytest.raises(ContractError):
        instantiate("S1", 2, 1, 0.0, 2.5, sol)  # wrong profile family
    with pytest.raises(ContractError):
        instantiate("S4", 2, 3, 0.0, 2.5, sol)  # k out of range
    with pytest.raises(ContractError):
        instantiate("SCyl1", 2, 1, 0.0, 2.5, sol)
    with pytest.raises(ContractError):
        cylinder("S1", 2, 1, 2.0)


def test_instance_jsonl(tmp_path):
    path = tmp_path / "inst.jsonl"
    write_instance_jsonl(ref("S4"), path, count=11)
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(rows) == 11
    assert set(rows[0]) == {"u", "r", "lambda", "mu", "theta_or_R"}
    assert rows[0]["theta_or_R"] == 0.0
