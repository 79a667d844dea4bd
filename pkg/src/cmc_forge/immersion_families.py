"""Data-driven evaluation of the seventeen CMC immersion families.

Every family writes the hypersurface as

    phi(y, u) = r(u) y + f(r(u)) B2(theta(u))          (space forms)
    phi(y, u) = r(u) y + R(u) B2                         (flat ambient)

with y on a base quadric, a two-slot frame B2/B3 = dB2/dtheta, and the
Gauss map

    nu = -r lam y + s2 r^2 lam / f B2 + s3 r' / f B3     (space forms)
    nu = -r lam y + sB r' B2                             (flat ambient)

The families differ only in the ODE, signs, frame slots and the radial
factor f, so they are rows of a table rather than separate code paths.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from . import profile_ode
from .errors import (
    BasePointOffQuadric,
    ContractError,
    FamilyMismatch,
    OutOfRange,
    SingularDenominator,
    Unattainable,
)
from .profile_ode import Family, ProfilePolynomial, ProfileSolution
from .pseudo_euclidean import AmbientSignature, QuadricSpec, quadric_residual

CONSTRAINT_MARGIN = 1e-6
DENOMINATOR_MARGIN = 1e-8


@dataclass(frozen=True)
class FamilyDescriptor:
    """Static recipe for one immersion family.

    ``slots`` is a code resolved against (n, k): ``"k"`` means slots (k, k+1),
    ``"top"`` means (n+1, n+2) for space forms and n+1 for flat ambient,
    ``"bottom"`` means (1, 2) or slot 1.
    """

    id: str
    ode_family: Family
    c_sign: int
    g_constraint: str  # "gt" (g > sqrt|c|), "lt" (g < sqrt|c|), "pos"
    k_min: int
    base_level: int
    slots: str
    frame: str  # cosh_sinh | sinh_cosh | trig | axis
    radial: str  # r2m1 | r2p1 | 1mr2 | height
    nu_signs: tuple
    normal_norm: int
    profile_norm: int = 1
    ambient_level: Optional[int] = None  # None: flat R_k^{n+1}
    cylinder: bool = False
    parent: Optional[str] = None
    tag: str = ""

    @property
    def flat(self) -> bool:
        return self.ambient_level is None

    @property
    def theta_denominator(self) -> Optional[str]:
        return None if self.flat else {"r2m1": "r^2-1", "r2p1": "r^2+1", "1mr2": "1-r^2"}[self.radial]

    def k_range(self, n: int) -> tuple[int, int]:
        return self.k_min, n

    def ambient_dim(self, n: int) -> int:
        return n + 1 if self.flat else n + 2

    def frame_slots(self, n: int, k: int) -> tuple[int, ...]:
        if self.flat:
            return (n + 1,) if self.slots == "top" else (1,)
        return {"k": (k, k + 1), "top": (n + 1, n + 2), "bottom": (1, 2)}[self.slots]

    def signature(self, n: int, k: int) -> AmbientSignature:
        return AmbientSignature(self.ambient_dim(n), k)

    def base(self, n: int, k: int) -> QuadricSpec:
        return QuadricSpec(self.signature(n, k), self.base_level, self.frame_slots(n, k))

    def ambient(self, n: int, k: int) -> Optional[QuadricSpec]:
        if self.flat:
            return None
        return QuadricSpec(self.signature(n, k), self.ambient_level, ())


def _d(id, ode, c_sign, gc, k_min, base_level, slots, frame, radial, nu, nn, amb, **kw):
    return FamilyDescriptor(id, Family(ode), c_sign, gc, k_min, base_level, slots, frame, radial,
                            nu, nn, ambient_level=amb, **kw)


DESCRIPTORS: dict[str, FamilyDescriptor] = {
    d.id: d
    for d in [
        # de Sitter-type ambient S_k^{n+1}
        _d("S1", "sphere-q", +1, "gt", 1, +1, "k", "cosh_sinh", "r2m1", (-1, -1), -1, +1, tag="sphere-q/c>0/g>sqrt(c)"),
        _d("S2", "sphere-q", -1, "pos", 1, -1, "top", "trig", "r2p1", (-1, -1), -1, +1, tag="sphere-q/c<0"),
        _d("S3", "sphere-q", +1, "lt", 1, +1, "k", "sinh_cosh", "1mr2", (+1, -1), -1, +1, tag="sphere-q/c>0/g<sqrt(c)"),
        _d("S4", "sphere-p", +1, "lt", 0, +1, "top", "trig", "1mr2", (+1, +1), +1, +1, tag="sphere-p/c>0/g<sqrt(c)"),
        _d("SCyl1", "sphere-q", +1, "gt", 1, +1, "k", "cosh_sinh", "r2m1", (-1, -1), -1, +1,
           cylinder=True, parent="S1", tag="hyperbolic cylinder r0>1"),
        _d("SCyl2", "sphere-q", -1, "pos", 1, -1, "top", "trig", "r2p1", (-1, -1), -1, +1,
           cylinder=True, parent="S2", tag="cylinder over H, any r0"),
        # anti-de Sitter-type ambient H_{k-1}^{n+1}
        _d("H1", "hyp-q", +1, "pos", 2, +1, "bottom", "trig", "r2p1", (-1, -1), -1, -1, tag="hyp-q/c>0"),
        _d("H2", "hyp-q", -1, "lt", 2, -1, "k", "cosh_sinh", "1mr2", (+1, -1), -1, -1, tag="hyp-q/c<0/g<sqrt(-c)"),
        _d("H3", "hyp-q", -1, "gt", 2, -1, "k", "sinh_cosh", "r2m1", (-1, -1), -1, -1, tag="hyp-q/c<0/g>sqrt(-c)"),
        _d("H4", "hyp-p", -1, "gt", 1, -1, "top", "trig", "r2m1", (-1, +1), +1, -1, tag="hyp-p/c<0/g>sqrt(-c)"),
        _d("H5", "hyp-p", +1, "pos", 1, +1, "k", "cosh_sinh", "r2p1", (-1, +1), +1, -1, tag="hyp-p/c>0"),
        _d("HCyl1", "hyp-q", -1, "lt", 2, -1, "k", "cosh_sinh", "1mr2", (+1, -1), -1, -1,
           cylinder=True, parent="H2", tag="cylinder 0<|r0|<1"),
        _d("HCyl2", "hyp-q", -1, "gt", 2, -1, "k", "sinh_cosh", "r2m1", (-1, -1), +1, -1,
           profile_norm=-1, cylinder=True, parent="H3", tag="Lorentzian cylinder r0^2>1"),
        # flat ambient R_k^{n+1}
        _d("E1", "euc-p", +1, "pos", 0, +1, "top", "axis", "height", (+1,), +1, None, tag="euc-p/c>0/S base"),
        _d("E2", "euc-p", +1, "pos", 2, -1, "bottom", "axis", "height", (+1,), -1, None,
           profile_norm=-1, tag="euc-p/c>0/H base"),
        _d("E3", "euc-q", +1, "pos", 1, +1, "bottom", "axis", "height", (-1,), -1, None, tag="euc-q/c>0"),
        _d("E4", "euc-q", -1, "pos", 1, -1, "top", "axis", "height", (-1,), -1, None, tag="euc-q/c<0"),
    ]
}

CYLINDERS = ("SCyl1", "SCyl2", "HCyl1", "HCyl2")


def descriptor(family_id: str) -> FamilyDescriptor:
    try:
        return DESCRIPTORS[family_id]
    except KeyError:
        raise ContractError(f"unknown family {family_id!r}; choose from {sorted(DESCRIPTORS)}") from None


# -- scalar pieces -------------------------------------------------------------


def lambda_mu(g, h: float, n: int):
    """Principal curvatures ``lam = h + g^-n`` and ``mu = h - (n-1) g^-n``."""
    g = np.asarray(g, dtype=float)
    if np.any(g <= 0):
        raise profile_ode.DomainError("g must be positive")
    gn = g ** (-n)
    lam, mu = h + gn, h - (n - 1) * gn
    if lam.ndim == 0:
        return float(lam), float(mu)
    return lam, mu


def radial_factor(kind: str, r):
    r = np.asarray(r, dtype=float)
    if kind == "r2m1":
        return np.sqrt(r * r - 1.0)
    if kind == "r2p1":
        return np.sqrt(r * r + 1.0)
    if kind == "1mr2":
        return np.sqrt(1.0 - r * r)
    raise ContractError(f"no radial factor for {kind!r}")


def radial_denominator(kind: str, r):
    r = np.asarray(r, dtype=float)
    return {"r2m1": r * r - 1.0, "r2p1": r * r + 1.0, "1mr2": 1.0 - r * r}[kind]


def frame(kind: str, theta: float, slots, dim: int):
    """B2(theta) and B3(theta) = dB2/dtheta placed in the given 1-based slots."""
    B2, B3 = np.zeros(dim), np.zeros(dim)
    if kind == "axis":
        B2[slots[0] - 1] = 1.0
        return B2, B3
    p, q = slots[0] - 1, slots[1] - 1
    if kind == "cosh_sinh":
        B2[p], B2[q] = math.cosh(theta), math.sinh(theta)
        B3[p], B3[q] = math.sinh(theta), math.cosh(theta)
    elif kind == "sinh_cosh":
        B2[p], B2[q] = math.sinh(theta), math.cosh(theta)
        B3[p], B3[q] = math.cosh(theta), math.sinh(theta)
    elif kind == "trig":
        B2[p], B2[q] = math.cos(theta), math.sin(theta)
        B3[p], B3[q] = -math.sin(theta), math.cos(theta)
    else:
        raise ContractError(f"unknown frame {kind!r}")
    return B2, B3


# -- cylinders -----------------------------------------------------------------


def _cyl_f(variant: str, r0: float) -> float:
    d = descriptor(variant)
    return float(radial_factor(d.radial, r0))


def _check_cylinder_radius(variant: str, r0: float):
    ok = {
        "SCyl1": r0 > 1,
        "SCyl2": r0 != 0,
        "HCyl1": 0 < abs(r0) < 1,
        "HCyl2": r0 * r0 > 1,
    }
    if variant not in ok:
        raise ContractError(f"{variant!r} is not a cylinder family")
    if not ok[variant]:
        raise OutOfRange(f"r0={r0} outside the validity range of {variant}")


def cylinder_mean_curvature(r0: float, n: int, variant: str) -> float:
    """Mean curvature of the constant-radius example.

    Principal curvatures are ``f/r0`` (multiplicity n-1) and ``+-r0/f``; the
    second one is negative only for ``HCyl1``, where the double root of the
    hyperbolic profile forces ``lam * mu = -1``.
    """
    _check_cylinder_radius(variant, r0)
    f = _cyl_f(variant, r0)
    other = -r0 / f if variant == "HCyl1" else r0 / f
    return (n - 1) * f / (n * r0) + other / n


_CYL_DOMAINS = {
    "SCyl1": [(1.0, math.inf)],
    "SCyl2": [(-math.inf, 0.0), (0.0, math.inf)],
    "HCyl1": [(-1.0, 0.0), (0.0, 1.0)],
    "HCyl2": [(-math.inf, -1.0), (1.0, math.inf)],
}


def _interval_map(lo, hi):
    """Map s in (0, 1) onto (lo, hi), logarithmically toward infinite ends."""
    if math.isinf(hi) and not math.isinf(lo):
        return lambda s: lo + s / (1.0 - s)
    if math.isinf(lo) and not math.isinf(hi):
        return lambda s: hi - (1.0 - s) / s
    return lambda s: lo + (hi - lo) * s


def solve_cylinder_radius(h: float, n: int, variant: str, grid: int = 4001) -> list[float]:
    """All r0 whose cylinder has mean curvature h."""
    _check_cylinder_radius(variant, {"SCyl1": 2.0, "SCyl2": 1.0, "HCyl1": 0.5, "HCyl2": 2.0}[variant])
    out = []
    for lo, hi in _CYL_DOMAINS[variant]:
        m = _interval_map(lo, hi)

        def F(s):
            return cylinder_mean_curvature(m(s), n, variant) - h

        ss = np.linspace(0.0, 1.0, grid)[1:-1]
        vals = np.array([F(s) for s in ss])
        for i in range(len(ss) - 1):
            if vals[i] == 0.0:
                out.append(m(ss[i]))
            elif vals[i] * vals[i + 1] < 0:
                s = optimize.brentq(F, ss[i], ss[i + 1], xtol=1e-15, rtol=1e-15)
                out.append(m(s))
        # tangential solutions at interior extrema
        for i in range(1, len(ss) - 1):
            a, b, c = vals[i - 1], vals[i], vals[i + 1]
            if (b - a) * (c - b) < 0 and abs(b) < 1e-3 * max(1.0, abs(h)):
                res = optimize.minimize_scalar(lambda s: abs(F(s)), bracket=(ss[i - 1], ss[i], ss[i + 1]),
                                               method="golden", tol=1e-12)
                if abs(F(res.x)) < 1e-10 * max(1.0, abs(h)):
                    r = m(res.x)
                    if all(abs(r - o) > 1e-6 for o in out):
                        out.append(r)
    out = sorted(out)
    merged = []
    for r in out:
        if not merged or abs(r - merged[-1]) > 1e-7 * max(1.0, abs(r)):
            merged.append(r)
    if not merged:
        raise Unattainable(f"no {variant} cylinder with mean curvature {h} for n={n}")
    return merged


# -- instances -----------------------------------------------------------------


def _check_constraint(desc: FamilyDescriptor, r: np.ndarray):
    if desc.g_constraint == "gt":
        margin = float(np.min(r)) - 1.0
    elif desc.g_constraint == "lt":
        margin = 1.0 - float(np.max(r))
    else:
        margin = float(np.min(r))
    if not margin > CONSTRAINT_MARGIN:
        raise ContractError(f"{desc.id}: constraint {desc.g_constraint} violated (margin {margin:.3e})")
    return margin


@dataclass(frozen=True)
class ImmersionInstance:
    """A family bound to (n, k, h, c) and a profile solution or a radius r0."""

    descriptor: FamilyDescriptor
    n: int
    k: int
    h: float
    c: Optional[float] = None
    solution: Optional[ProfileSolution] = None
    r0: Optional[float] = None
    theta_scale: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def id(self) -> str:
        if self.descriptor.cylinder:
            return f"{self.descriptor.id}(n={self.n},k={self.k},r0={self.r0:.17g})"
        return f"{self.descriptor.id}(n={self.n},k={self.k},h={self.h:.17g},c={self.c:.17g})"

    @property
    def sqrt_c(self) -> float:
        return math.sqrt(abs(self.c))

    @property
    def lambda0(self) -> float:
        return _cyl_f(self.descriptor.id, self.r0) / self.r0

    @property
    def u_range(self) -> tuple[float, float]:
        if self.descriptor.cylinder:
            return -math.inf, math.inf
        return self.solution.u_min, self.solution.u_max

    def state(self, u):
        """``(r, r', lam, mu)`` at parameter u (arc length along the profile)."""
        if self.descriptor.cylinder:
            lam = self.lambda0
            u = np.asarray(u, dtype=float)
            one = np.ones_like(u)
            return self.r0 * one, 0.0 * one, lam * one, (self.n * self.h - (self.n - 1) * lam) * one
        g, gp = self.solution(u)
        lam, mu = lambda_mu(g, self.h, self.n)
        return g / self.sqrt_c, gp / self.sqrt_c, lam, mu

    def rate(self, u):
        """Integrand of theta (space forms) or of the height R (flat)."""
        r, _, lam, _ = self.state(u)
        if self.descriptor.flat:
            return r * lam
        return r * lam / radial_denominator(self.descriptor.radial, r)

    def _half_integral(self, w: float, origin: float = 0.0) -> float:
        key = (origin, w)
        if key not in self._cache:
            val = integrate.quad(lambda s: float(self.rate(s)), origin, w, epsabs=1e-14,
                                 epsrel=1e-13, limit=400)[0] if w != origin else 0.0
            self._cache[key] = val
        return self._cache[key]

    @property
    def theta_advance(self) -> float:
        """theta(T) - theta(0) over one profile period."""
        sol = self.solution
        if sol is None or sol.kind != "periodic":
            raise ContractError("theta advance is defined for periodic profiles only")
        return 2.0 * self._half_integral(0.5 * sol.period)

    def _cumulative(self, u: float) -> float:
        if self.descriptor.cylinder:
            return u * float(self.rate(u))
        sol = self.solution
        if sol.kind == "periodic":
            T = sol.period
            j = math.floor(u / T)
            w = u - j * T
            adv = self.theta_advance
            if w <= 0.5 * T:
                return j * adv + self._half_integral(w)
            return (j + 1) * adv - self._half_integral(T - w)
        if sol.kind == "unbounded":
            # rate is even in u, so the integral is odd
            return math.copysign(1.0, u) * self._half_integral(abs(u))
        return self._half_integral(u)

    def theta(self, u: float) -> float:
        if self.descriptor.flat:
            raise FamilyMismatch(f"{self.descriptor.id} has a height function, not theta")
        return self.theta_scale * self._cumulative(float(u))

    def height(self, u: float) -> float:
        if not self.descriptor.flat:
            raise FamilyMismatch(f"{self.descriptor.id} is not a flat-ambient family")
        return self.theta_scale * self._cumulative(float(u))

    def _check_base(self, y):
        y = np.asarray(y, dtype=float)
        q = self.descriptor.base(self.n, self.k)
        res = quadric_residual(y, q)
        if abs(res.value) > 1e-10 or res.zeroed_max > 1e-12:
            raise BasePointOffQuadric(f"base residual {res.value:.3e}, slot leak {res.zeroed_max:.3e}")
        return y

    def phase(self, u: float) -> float:
        """theta(u) or R(u), whichever the family carries."""
        return self.theta_scale * self._cumulative(float(u))

    def _parts(self, u, origin=0.0):
        d = self.descriptor
        r, rp, lam, mu = (float(x) for x in self.state(u))
        dim = d.ambient_dim(self.n)
        slots = d.frame_slots(self.n, self.k)
        if d.flat:
            B2, B3 = frame("axis", 0.0, slots, dim)
            return r, rp, lam, mu, B2, B3, self.height(u) - origin, None
        th = self.theta(u) - origin
        B2, B3 = frame(d.frame, th, slots, dim)
        return r, rp, lam, mu, B2, B3, th, float(radial_factor(d.radial, r))

    def evaluate(self, y, u: float, origin: float = 0.0) -> np.ndarray:
        """Point of the hypersurface; a nonzero ``origin`` applies the ambient
        isometry that shifts theta (or R) by ``-origin``."""
        y = self._check_base(y)
        r, rp, lam, mu, B2, B3, th, f = self._parts(u, origin)
        if self.descriptor.flat:
            return r * y + th * B2
        return r * y + f * B2

    def gauss_map(self, y, u: float, origin: float = 0.0) -> np.ndarray:
        y = self._check_base(y)
        d = self.descriptor
        r, rp, lam, mu, B2, B3, th, f = self._parts(u, origin)
        if d.flat:
            return -r * lam * y + d.nu_signs[0] * rp * B2
        s2, s3 = d.nu_signs
        return -r * lam * y + s2 * r * r * lam / f * B2 + s3 * rp / f * B3

    def identity_residual(self, u):
        """(r')^2 - s r^2 lam^2 - (sign(c) + a r^2): zero along the profile."""
        r, rp, lam, _ = self.state(u)
        prof = ProfilePolynomial(self.descriptor.ode_family, self.h, self.c, self.n)
        return rp**2 - prof.s * r * r * lam * lam - (math.copysign(1.0, self.c) + prof.a * r * r)

    def table(self, count: int = 65):
        """Rows ``(u, r, lam, mu, theta_or_R)`` over the fundamental domain."""
        lo, hi = sample_u_domain(self, count, margin=0.0)
        us = np.linspace(lo, hi, count)
        rows = []
        for u in us:
            r, _, lam, mu = (float(x) for x in self.state(u))
            rows.append((float(u), r, lam, mu, self._cumulative(float(u)) * self.theta_scale))
        return rows


def sample_u_domain(inst: ImmersionInstance, count: int, margin: float = 1e-2):
    """Interval of u covered by verification grids and exports."""
    if inst.descriptor.cylinder:
        return 0.0, 4.0
    sol = inst.solution
    if sol.kind == "periodic":
        return 0.0, sol.period
    span = margin * (sol.u_max - sol.u_min)
    return sol.u_min + span, sol.u_max - span


def instantiate(family_id: str, n: int, k: int, h: float, c: float, solution: ProfileSolution) -> ImmersionInstance:
    desc = descriptor(family_id)
    if desc.cylinder:
        raise ContractError("use cylinder() for constant-radius families")
    lo, hi = desc.k_range(n)
    if not lo <= k <= hi:
        raise ContractError(f"{family_id} needs {lo} <= k <= {hi}, got k={k}")
    if c == 0 or (c > 0) != (desc.c_sign > 0):
        raise ContractError(f"{family_id} needs c with sign {desc.c_sign:+d}, got {c}")
    if solution.profile.family is not desc.ode_family or solution.profile.h != h or solution.profile.c != c:
        raise ContractError("solution does not belong to this family's profile")
    if solution.kind == "constant":
        raise ContractError("constant profiles are the cylinder families")
    r = solution.samples[:, 1] / math.sqrt(abs(c))
    _check_constraint(desc, r)
    if not desc.flat:
        den = np.abs(radial_denominator(desc.radial, r))
        if np.min(den) < DENOMINATOR_MARGIN:
            raise SingularDenominator(f"theta denominator reaches {np.min(den):.3e}")
    return ImmersionInstance(desc, n, k, float(h), float(c), solution)


def cylinder(variant: str, n: int, k: int, r0: float) -> ImmersionInstance:
    desc = descriptor(variant)
    if not desc.cylinder:
        raise ContractError(f"{variant} is not a cylinder family")
    _check_cylinder_radius(variant, r0)
    lo, hi = desc.k_range(n)
    if not lo <= k <= hi:
        raise ContractError(f"{variant} needs {lo} <= k <= {hi}, got k={k}")
    h = cylinder_mean_curvature(r0, n, variant)
    return ImmersionInstance(desc, n, k, h, None, None, float(r0))


def write_instance_jsonl(inst: ImmersionInstance, path, count: int = 65) -> None:
    with open(path, "w") as fh:
        for u, r, lam, mu, tr in inst.table(count):
            fh.write(json.dumps({"u": u, "r": r, "lambda": lam, "mu": mu, "theta_or_R": tr}) + "\n")
