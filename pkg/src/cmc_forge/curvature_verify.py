"""Finite-difference check that an immersion has constant mean curvature h.

Eigenvalues of the shape operator come only from differences of the Gauss
map along curves on the hypersurface, never from the lambda/mu tables, so
the check is independent of the formulas it is validating.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import BoundaryU, NonTangent
from .immersion_families import ImmersionInstance, sample_u_domain
from .pseudo_euclidean import inner, sample_base

TOLERANCES = {
    "membership": 1e-8,
    "unit_normal": 1e-8,
    "normal_position": 1e-8,
    "normal_profile": 1e-8,
    "normal_base": 1e-8,
    "profile_speed": 1e-8,
    "identity": 1e-8,
    "spherical_eigen": 1e-6,
    "profile_eigen": 1e-6,
    "mean_curvature": 1e-5,
}
SPHERICAL_STEP = 1e-4
PROFILE_STEP = 1e-3


def _central(fun, x0, step, richardson):
    d1 = (fun(x0 + step) - fun(x0 - step)) / (2 * step)
    if not richardson:
        return d1
    half = 0.5 * step
    d2 = (fun(x0 + half) - fun(x0 - half)) / (2 * half)
    return (4 * d2 - d1) / 3


def _base_curve(y, v, eps_y, eps_v):
    if eps_v == eps_y:
        return lambda t: math.cos(t) * y + math.sin(t) * v
    return lambda t: math.cosh(t) * y + math.sinh(t) * v


def shape_operator_spherical(inst: ImmersionInstance, y, u, v, step=SPHERICAL_STEP, richardson=True, origin=None):
    """Eigenvalue of -dnu along a base tangent v, from nu along a base curve.

    Returns ``(lam_est, residual)`` with residual the sup-norm of
    ``dnu(beta')/r + lam_est v``.
    """
    sig = inst.descriptor.signature(inst.n, inst.k)
    base = inst.descriptor.base(inst.n, inst.k)
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    eps_v = inner(v, v, sig)
    leak = max((abs(v[s - 1]) for s in base.zeroed_slots), default=0.0)
    if abs(abs(eps_v) - 1) > 1e-10 or abs(inner(v, y, sig)) > 1e-10 or leak > 1e-12:
        raise NonTangent(f"<v,v>={eps_v:.3e}, <v,y>={inner(v, y, sig):.3e}, slot leak {leak:.1e}")
    eps_v = math.copysign(1.0, eps_v)
    curve = _base_curve(y, v, float(base.level), eps_v)
    r = float(inst.state(u)[0])
    origin = inst.phase(u) if origin is None else origin
    dnu = _central(lambda t: inst.gauss_map(curve(t), u, origin), 0.0, step, richardson)
    lam_est = -inner(dnu, v, sig) / (r * eps_v)
    resid = float(np.max(np.abs(dnu / r + lam_est * v)))
    return lam_est, resid


def _profile_derivs(inst, y, u, step, richardson, origin=None):
    # Differences are taken in the frame recentred at u: the shift is an
    # ambient isometry, and it keeps boosted frames from growing like e^theta.
    lo, hi = inst.u_range
    if u - step < lo or u + step > hi:
        raise BoundaryU(f"stencil around u={u} leaves [{lo}, {hi}]")
    origin = inst.phase(u) if origin is None else origin
    dnu = _central(lambda s: inst.gauss_map(y, s, origin), u, step, richardson)
    dphi = _central(lambda s: inst.evaluate(y, s, origin), u, step, richardson)
    return dnu, dphi


def shape_operator_profile(inst: ImmersionInstance, y, u, step=PROFILE_STEP, richardson=True):
    """Eigenvalue of -dnu along d(phi)/du: ``(mu_est, residual)``."""
    sig = inst.descriptor.signature(inst.n, inst.k)
    y = np.asarray(y, dtype=float)
    dnu, dphi = _profile_derivs(inst, y, u, step, richardson)
    mu_est = -inner(dnu, dphi, sig) / inner(dphi, dphi, sig)
    resid = float(np.max(np.abs(dnu + mu_est * dphi)))
    return mu_est, resid


def rlam_identity_residual(inst: ImmersionInstance, u, step=PROFILE_STEP):
    """(r lam)' - mu r' with the derivative of r lam taken by differences."""
    def rl(s):
        r, _, lam, _ = inst.state(s)
        return float(r * lam)

    d = _central(rl, u, step, True)
    _, rp, _, mu = (float(x) for x in inst.state(u))
    return d - mu * rp


@dataclass
class VerificationReport:
    instance_id: str
    grid: dict
    residuals: dict
    tolerances: dict
    h: float
    h_est_range: tuple
    passed: bool
    failures: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def summary(self) -> str:
        worst = ", ".join(f"{k}={v:.2e}" for k, v in self.residuals.items())
        return f"{'PASS' if self.passed else 'FAIL'} {self.instance_id}: {worst}"


def _u_grid(inst: ImmersionInstance, count: int, step: float):
    lo, hi = sample_u_domain(inst, count)
    if inst.solution is not None and inst.solution.kind == "periodic":
        return np.linspace(lo, hi, count, endpoint=False)
    lo_b, hi_b = inst.u_range
    lo = max(lo, lo_b + 2 * step)
    hi = min(hi, hi_b - 2 * step)
    return np.linspace(lo, hi, count)


def verify_instance(
    inst: ImmersionInstance,
    base_count: int = 8,
    u_count: int = 32,
    seed: int = 0,
    tolerances: Optional[dict] = None,
    h_target: Optional[float] = None,
    spherical_step: float = SPHERICAL_STEP,
    profile_step: float = PROFILE_STEP,
) -> VerificationReport:
    """Aggregate structural and curvature residuals over a (base, u) grid.

    ``h_target`` defaults to the instance's h; pass a different value to
    test the oracle's sensitivity.
    """
    tol = dict(TOLERANCES)
    tol.update(tolerances or {})
    d = inst.descriptor
    n = inst.n
    h = inst.h if h_target is None else float(h_target)
    sig = d.signature(n, inst.k)
    amb = d.ambient(n, inst.k)
    base_pts = sample_base(d.base(n, inst.k), seed, base_count)
    us = _u_grid(inst, u_count, profile_step)
    worst = dict.fromkeys(tol, 0.0)
    h_ests = []
    for u in us:
        u = float(u)
        if not d.cylinder:
            worst["identity"] = max(worst["identity"], abs(float(inst.identity_residual(u))))
        for y, v in base_pts:
            origin = inst.phase(u)
            phi = inst.evaluate(y, u, origin)
            nu = inst.gauss_map(y, u, origin)
            dnu, dphi = _profile_derivs(inst, y, u, profile_step, True, origin)
            nphi, nnu = np.linalg.norm(phi), np.linalg.norm(nu)
            if amb is not None:
                worst["membership"] = max(worst["membership"], abs(inner(phi, phi, sig) - amb.level))
                worst["normal_position"] = max(worst["normal_position"], abs(inner(nu, phi, sig)) / max(1.0, nnu * nphi))
            worst["unit_normal"] = max(worst["unit_normal"], abs(inner(nu, nu, sig) - d.normal_norm))
            worst["normal_profile"] = max(
                worst["normal_profile"], abs(inner(nu, dphi, sig)) / max(1.0, nnu * np.linalg.norm(dphi))
            )
            worst["normal_base"] = max(worst["normal_base"], abs(inner(nu, v, sig)) / max(1.0, nnu))
            worst["profile_speed"] = max(worst["profile_speed"], abs(inner(dphi, dphi, sig) - d.profile_norm))
            lam_est, res_s = shape_operator_spherical(inst, y, u, v, spherical_step, origin=origin)
            mu_est = -inner(dnu, dphi, sig) / inner(dphi, dphi, sig)
            res_p = float(np.max(np.abs(dnu + mu_est * dphi)))
            lam_scale = 1.0 + abs(lam_est)
            worst["spherical_eigen"] = max(worst["spherical_eigen"], res_s / lam_scale)
            worst["profile_eigen"] = max(worst["profile_eigen"], res_p / (1.0 + abs(mu_est)) / max(1.0, np.linalg.norm(dphi)))
            h_est = ((n - 1) * lam_est + mu_est) / n
            h_ests.append(h_est)
            worst["mean_curvature"] = max(worst["mean_curvature"], abs(h_est - h))
    failures = [k for k in tol if worst[k] > tol[k]]
    grid = {
        "base_count": base_count,
        "u_count": u_count,
        "seed": seed,
        "u_min": float(us[0]),
        "u_max": float(us[-1]),
        "spherical_step": spherical_step,
        "profile_step": profile_step,
    }
    return VerificationReport(
        inst.id, grid, {k: float(v) for k, v in worst.items()}, tol, h,
        (float(min(h_ests)), float(max(h_ests))), not failures, failures,
    )
