"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import dataclasses
import math
import time

import numpy as np
import pytest

from cmc_forge.catalog import reference_instance
from cmc_forge.curvature_verify import _central, shape_operator_spherical, verify_instance
from cmc_forge.immersion_families import DESCRIPTORS, cylinder_mean_curvature, lambda_mu, sample_u_domain
from cmc_forge.moduli_classify import (
    PERIODIC,
    UNBOUNDED,
    build_instance,
    classify,
    closed_desitter_point,
    closure_residual,
    embedded_window,
    hyperbolic_cylinder_range,
    match_angle,
    theta_of_c,
    _minimize_cylinder,
)
from cmc_forge.profile_ode import ProfilePolynomial, critical_points, periodic_window, thresholds
from cmc_forge.pseudo_euclidean import inner, sample_base
from oracles import bisect, dq1

STRUCTURAL = ("membership", "unit_normal", "normal_position", "normal_profile", "normal_base", "profile_speed")


@pytest.fixture
def report(capsys):
    """Call with (criterion, ok, detail); prints the line, then asserts."""
    def emit(number, title, ok, detail, elapsed, budget):
        in_time = elapsed <= budget
        status = "PASS" if ok and in_time else "FAIL"
        with capsys.disabled():
            print(f"\n[criterion {number}] {status} {title}: {detail} ({elapsed:.2f}s, budget {budget:g}s)")
        assert ok, detail
        assert in_time, f"runtime {elapsed:.2f}s over budget {budget}s"
    return emit


def test_criterion_1_trace_identity(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    N = 10_000
    g = rng.uniform(0.05, 20.0, N)
    h = rng.uniform(-10.0, 10.0, N)
    n = rng.integers(2, 12, N)
    worst = 0.0
    for ni in np.unique(n):
        sel = n == ni
        lam, mu = lambda_mu(g[sel], h[sel], int(ni))
        scale = np.abs(ni * h[sel]) + ni * np.abs(lam) + np.abs(mu)
        worst = max(worst, float(np.max(np.abs((ni - 1) * lam + mu - ni * h[sel]) / scale)))
    # scalar path, same identity
    for i in range(0, N, 50):
        lam, mu = lambda_mu(float(g[i]), float(h[i]), int(n[i]))
        scale = abs(n[i] * h[i]) + n[i] * abs(lam) + abs(mu)
        worst = max(worst, abs((n[i] - 1) * lam + mu - n[i] * h[i]) / scale)
    elapsed = time.perf_counter() - t0
    report(1, "trace identity", worst <= 1e-13, f"max relative error {worst:.2e} over {N} samples", elapsed, 1.0)


def test_criterion_2_closed_form_constants(report):
    t0 = time.perf_counter()
    worst_v = worst_c = 0.0
    for n in range(3, 9):
        lo, hi = periodic_window(n)
        for h in np.linspace(lo, hi, 14)[1:-1]:
            h = float(h)
            cps = critical_points(ProfilePolynomial("sphere-q", h, 1.0, n))
            assert len(cps) == 2
            f = dq1(h, n)
            # one sign change of q_1' on each side of the midpoint
            mid = 0.5 * (cps[0] + cps[1])
            oracle = [bisect(f, 0.3 * cps[0], mid), bisect(f, mid, 3.0 * cps[1])]
            worst_v = max(worst_v, max(abs(a - b) for a, b in zip(cps, oracle)))
            th = thresholds(h, n)
            v1 = oracle[1]
            shift = v1**2 - v1**2 * (h + v1 ** (-n)) ** 2
            worst_c = max(worst_c, abs(th.c1 - shift))
    th = thresholds(-0.95, 3)
    ratio = (th.v1 / math.sqrt(th.c1)) ** 2
    n3 = round(th.v1, 4) == 1.8821 and round(th.c1, 4) == 1.2752 and round(ratio, 3) == 2.778 and ratio > 1
    elapsed = time.perf_counter() - t0
    ok = worst_v <= 1e-10 and worst_c <= 1e-10 and n3
    detail = (f"max |v - oracle| {worst_v:.1e}, max |c1 - shift| {worst_c:.1e}; n=3 h=-0.95: "
              f"v1={th.v1:.4f} c1={th.c1:.4f} ratio={ratio:.3f}")
    report(2, "closed-form constants", ok, detail, elapsed, 1.0)


PERIODIC_POINTS = [
    ("S4", 2, 1, 0.0, 2.5), ("S4", 2, 1, 0.8, 5.0), ("S4", 2, 1, 0.8, 10.0), ("S4", 2, 1, 0.8, 22.3),
    ("S4", 3, 1, 0.3, 4.0),
    ("E1", 2, 1, 0.5, 3.0), ("E1", 2, 1, 0.5, 6.0), ("E1", 2, 1, -0.5, 1.0), ("E1", 2, 1, -0.5, 3.0),
    ("E1", 2, 1, 1.0, 6.0),
    ("E2", 2, 2, 0.5, 4.0), ("E2", 2, 2, -0.5, 6.0), ("E2", 2, 2, -0.5, 2.0), ("E2", 2, 2, 0.5, 10.0),
    ("E2", 2, 2, 1.0, 8.0),
]


def test_criterion_3_period_agreement(report):
    t0 = time.perf_counter()
    recs = [classify(*p, with_theta=False) for p in PERIODIC_POINTS]
    recs += [closed_desitter_point(h, 3) for h in (-0.99, -0.98, -0.97, -0.96, -0.95)]
    worst_t = worst_e = 0.0
    ok = len(recs) == 20 and all(r.solution_class == PERIODIC for r in recs)
    for rec in recs:
        sol = build_instance(rec).solution
        worst_t = max(worst_t, abs(sol.period - sol.period_ode) / sol.period)
        us = np.linspace(0, sol.period, 401)
        worst_e = max(worst_e, float(np.max(np.abs(sol.energy_residual(us)))), sol.max_energy_residual)
    elapsed = time.perf_counter() - t0
    ok = ok and worst_t <= 1e-8 and worst_e <= 1e-8
    report(3, "period two-method agreement", ok,
           f"{len(recs)} instances, max relative T gap {worst_t:.1e}, max energy residual {worst_e:.1e}", elapsed, 30.0)


def _structural_ok(rep):
    return all(rep.residuals[k] <= 1e-8 for k in STRUCTURAL) and rep.residuals["mean_curvature"] <= 1e-5


def test_criterion_4_all_families_verify(report):
    t0 = time.perf_counter()
    failed, worst_h = [], 0.0
    for fid in DESCRIPTORS:
        rep = verify_instance(reference_instance(fid))
        worst_h = max(worst_h, rep.residuals["mean_curvature"])
        if not (rep.passed and _structural_ok(rep)):
            failed.append(fid)
    elapsed = time.perf_counter() - t0
    detail = f"{len(DESCRIPTORS) - len(failed)}/17 pass on 8x32 grids, max |h_est - h| {worst_h:.1e}"
    if failed:
        detail += f"; failed {failed}"
    report(4, "CMC verification of all families", not failed, detail, elapsed, 120.0)


def test_criterion_5_desitter_realizability(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for h in (-1.0, -0.99, -0.97, -0.95):
        rec = closed_desitter_point(h, 3)
        closed = rec.closed_flag or (rec.solution_class == UNBOUNDED and rec.constraint_margin > 0)
        rep = verify_instance(build_instance(rec))
        ok = ok and closed and rep.passed and _structural_ok(rep)
        parts.append(f"h={h}: {rec.solution_class} c={rec.c:.6f} {'pass' if rep.passed else 'fail'}")
    elapsed = time.perf_counter() - t0
    report(5, "de Sitter realizability", ok, "; ".join(parts), elapsed, 60.0)


def test_criterion_6_cylinder_range(report):
    t0 = time.perf_counter()
    worst, spread = 0.0, 0.0
    for n in (3, 4, 5, 6):
        target = 2 * math.sqrt(n - 1) / n
        runs = _minimize_cylinder(n, "SCyl1")
        worst = max(worst, max(abs(v - target) for v, _ in runs))
        rs = [r for _, r in runs]
        spread = max(spread, max(rs) - min(rs))
        assert hyperbolic_cylinder_range(n).lo == pytest.approx(target, abs=1e-15)
    v2 = cylinder_mean_curvature(1e3, 2, "SCyl1")
    above = all(cylinder_mean_curvature(r, 2, "SCyl1") > 1 for r in np.geomspace(1.001, 1e3, 200))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and spread <= 1e-4 and abs(v2 - 1) <= 1e-5 and above
    report(6, "cylinder range", ok,
           f"max |min - 2sqrt(n-1)/n| {worst:.1e}, r0 spread {spread:.1e}; n=2 at r0=1e3: {v2 - 1:.2e} above 1",
           elapsed, 1.0)


def test_criterion_7_zm_embedding(report):
    t0 = time.perf_counter()
    n, m, h = 2, 3, 0.8
    window = embedded_window(n, m)
    target = 2 * math.pi / m
    c = match_angle(n, h, target, (16.6, 45.8))
    err = abs(theta_of_c("S4", n, 1, h, c) - target)
    inst = build_instance(classify("S4", n, 1, h, c))
    res = closure_residual(inst, m)
    elapsed = time.perf_counter() - t0
    ok = window.contains(h) and err <= 1e-8 and res["max"] <= 1e-6
    report(7, "Z_m embedding search", ok,
           f"c={c:.12f}, |Theta - 2pi/3|={err:.1e}, closure residual {res['max']:.1e}", elapsed, 60.0)


def test_criterion_8_negative_controls(report):
    t0 = time.perf_counter()
    missed = []
    worst_theta = worst_h = math.inf
    for fid in DESCRIPTORS:
        inst = reference_instance(fid)
        bad = verify_instance(dataclasses.replace(inst, theta_scale=1.01), base_count=3, u_count=8)
        top = max(bad.residuals.values())
        worst_theta = min(worst_theta, top)
        if bad.passed or top <= 1e-4:
            missed.append(f"{fid}/theta")
        bad_h = verify_instance(inst, base_count=3, u_count=8, h_target=inst.h + 1e-3)
        top = max(bad_h.residuals.values())
        worst_h = min(worst_h, top)
        if bad_h.passed or top <= 1e-4:
            missed.append(f"{fid}/h")
    elapsed = time.perf_counter() - t0
    detail = f"smallest worst residual: theta x1.01 {worst_theta:.1e}, h+1e-3 {worst_h:.1e}"
    if missed:
        detail += f"; not detected {missed}"
    report(8, "negative controls", not missed, detail, elapsed, 30.0)


def _eigen_errors(inst, step):
    u = float(np.mean(sample_u_domain(inst, 3, margin=0.1)))
    (y, v), = sample_base(inst.descriptor.base(inst.n, inst.k), 7, 1)
    sig = inst.descriptor.signature(inst.n, inst.k)
    _, _, lam, mu = (float(x) for x in inst.state(u))
    origin = inst.phase(u)
    lam_est, _ = shape_operator_spherical(inst, y, u, v, step=step, richardson=False)
    dnu = _central(lambda s: inst.gauss_map(y, s, origin), u, step, False)
    dphi = _central(lambda s: inst.evaluate(y, s, origin), u, step, False)
    mu_est = -inner(dnu, dphi, sig) / inner(dphi, dphi, sig)
    return abs(lam_est - lam), abs(mu_est - mu)


def test_criterion_9_fd_convergence(report):
    t0 = time.perf_counter()
    steps = [4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3]
    ok, parts = True, []
    for fid in ("S1", "H2", "E4"):
        inst = reference_instance(fid)
        errs = [_eigen_errors(inst, s) for s in steps]
        ratios = []
        for which in (0, 1):
            for a, b in zip(errs, errs[1:]):
                if a[which] <= 1e-8:
                    break
                ratios.append(a[which] / max(b[which], 1e-300))
        worst = min(ratios) if ratios else math.inf
        ok = ok and bool(ratios) and worst >= 3.0
        parts.append(f"{fid} min ratio {worst:.2f}")
    elapsed = time.perf_counter() - t0
    report(9, "finite-difference convergence", ok, ", ".join(parts), elapsed, 10.0)
