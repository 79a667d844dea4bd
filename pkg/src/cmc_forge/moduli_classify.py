"""Moduli classification: which (family, n, k, h, c) give periodic, unbounded
or constant profiles, the closed and complete cases, and the Z_m angle search.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .errors import (
    CMCError,
    ContractError,
    NoSignChange,
    OutOfRange,
    OutOfValidity,
)
from .immersion_families import (
    ImmersionInstance,
    cylinder_mean_curvature,
    descriptor,
    frame,
    instantiate,
    radial_factor,
    radial_denominator,
)
from .profile_ode import (
    ODE_ATOL,
    ODE_RTOL,
    ProfilePolynomial,
    periodic_window,
    positive_roots,
    solve_periodic,
    solve_unbounded,
    thresholds,
)
from .pseudo_euclidean import sample_base

PERIODIC, UNBOUNDED, CONSTANT, NONE = "Periodic", "Unbounded", "Constant", "None"
CLASSES = (PERIODIC, UNBOUNDED, CONSTANT, NONE)
CONSTRAINT_MARGIN = 1e-6
CYLINDER_OF = {"S1": "SCyl1", "S2": "SCyl2", "H2": "HCyl1", "H3": "HCyl2"}


# -- serialization -------------------------------------------------------------


def fmt17(x) -> str:
    """JSON text for x with every float written to 17 significant digits."""
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return f"{x:.17g}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {fmt17(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(fmt17(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def csv17(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


# -- records -------------------------------------------------------------------


@dataclass
class ClassificationRecord:
    family: str
    n: int
    k: int
    h: float
    c: float
    solution_class: str
    bracket: Optional[tuple] = None
    root: Optional[float] = None
    period: Optional[float] = None
    theta_advance: Optional[float] = None
    min_g: Optional[float] = None
    constraint_margin: Optional[float] = None
    closed_flag: bool = False
    spacelike_complete_flag: bool = False
    theorem_tag: str = ""
    cylinder: Optional[str] = None
    notes: list = field(default_factory=list)

    @property
    def key(self) -> tuple:
        return (self.family, self.n, self.k, f"{self.h:.17g}", f"{self.c:.17g}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return fmt17(self.to_dict())

    CSV_COLUMNS = ("family", "n", "k", "h", "c", "class", "T", "theta_advance", "closed", "theorem_tag")

    def csv_row(self) -> list[str]:
        vals = (self.family, self.n, self.k, self.h, self.c, self.solution_class, self.period,
                self.theta_advance, self.closed_flag, self.theorem_tag)
        return [csv17(v) for v in vals]


def record_from_dict(d: dict) -> ClassificationRecord:
    d = dict(d)
    if d.get("bracket") is not None:
        d["bracket"] = tuple(d["bracket"])
    return ClassificationRecord(**d)


# -- validity ------------------------------------------------------------------


def check_validity(family: str, n: int, k: int, c: float):
    try:
        desc = descriptor(family)
    except ContractError as exc:
        raise OutOfValidity(str(exc)) from None
    if desc.cylinder:
        raise OutOfValidity(f"{family} has no c parameter; classify its parent {desc.parent}")
    if int(n) != n or n < 2:
        raise OutOfValidity(f"n must be an integer >= 2, got {n}")
    lo, hi = desc.k_range(n)
    if not lo <= k <= hi:
        raise OutOfValidity(f"{family} needs {lo} <= k <= {hi}, got k={k}")
    if c == 0 or (c > 0) != (desc.c_sign > 0):
        raise OutOfValidity(f"{family} needs c with sign {desc.c_sign:+d}, got c={c}")
    return desc


def _margin(desc, g_lo: float, g_hi: float, c: float) -> float:
    """Relative margin of [g_lo, g_hi] inside the family's g-constraint."""
    s = math.sqrt(abs(c))
    if desc.g_constraint == "gt":
        return g_lo / s - 1.0
    if desc.g_constraint == "lt":
        return 1.0 - g_hi / s
    return g_lo / s


def _riemannian(desc, n: int, k: int) -> bool:
    return desc.base(n, k).tangent_index == 0 and desc.profile_norm == 1


def _embedded_m(h: float, n: int, m_max: int = 64) -> Optional[int]:
    for m in range(2, m_max + 1):
        w = embedded_window(n, m)
        if w.contains(h):
            return m
    return None


def _theorem_tag(desc, n: int, h: float, c: float, cls: str) -> str:
    fid = desc.id
    if fid == "S1" and n >= 3:
        lo, hi = periodic_window(n)
        if cls == PERIODIC and lo < h < hi:
            return "desitter-closed-periodic"
        if cls == UNBOUNDED and h == -1.0:
            return "desitter-closed-hminus1"
    if fid == "S2" and abs(h) > 1 and cls == UNBOUNDED:
        return "desitter-closed-embedded" if h > 1 else "desitter-closed-outer"
    if fid == "S4" and cls == PERIODIC and _embedded_m(h, n) is not None:
        return f"zm-window(m={_embedded_m(h, n)})"
    if fid in ("H4", "H5") and h >= 0:
        return "hyperbolic-embedded"
    if fid == "E4" and h != 0 and cls == UNBOUNDED:
        return "minkowski-closed"
    return ""


def _finish(rec: ClassificationRecord, desc) -> ClassificationRecord:
    strict = rec.constraint_margin is not None and rec.constraint_margin > CONSTRAINT_MARGIN
    rec.closed_flag = rec.solution_class == PERIODIC and strict
    bounded_away = rec.min_g is not None and rec.min_g > 0
    rec.spacelike_complete_flag = (
        rec.k == 1
        and _riemannian(desc, rec.n, rec.k)
        and rec.solution_class in (PERIODIC, UNBOUNDED)
        and strict
        and bounded_away
    )
    rec.theorem_tag = _theorem_tag(desc, rec.n, rec.h, rec.c, rec.solution_class)
    return rec


def _scan(prof: ProfilePolynomial, margin_of, notes: list):
    """Walk the certified roots of q in preference order.

    ``margin_of(lo, hi)`` is the constraint margin of the g-range [lo, hi].
    Returns ``(class, detail, margin)`` where detail is the bracket, the
    unbounded root or the double root.
    """
    roots = positive_roots(prof)
    simple = [r.t for r in roots if not r.double]
    for t1, t2 in zip(simple, simple[1:]):
        mid = 0.5 * (t1 + t2)
        if not (prof.derivative(t1) > 0 and prof.derivative(t2) < 0 and prof(mid) > 0):
            continue
        margin = margin_of(t1, t2)
        if margin <= CONSTRAINT_MARGIN:
            notes.append(f"bracket ({t1:.17g}, {t2:.17g}) violates the g-constraint")
            continue
        return PERIODIC, (t1, t2), margin
    if simple:
        a = simple[-1]
        later_double = [r for r in roots if r.double and r.t > a]
        coercive = prof.lead > 1e-14 or (abs(prof.lead) <= 1e-14 and prof.c > 0)
        if prof.derivative(a) > 0 and coercive and not later_double:
            margin = margin_of(a, math.inf)
            if margin > CONSTRAINT_MARGIN:
                if abs(prof.lead) <= 1e-14:
                    notes.append("q tends to c: linear growth")
                return UNBOUNDED, a, margin
            notes.append(f"unbounded branch from {a:.17g} violates the g-constraint")
    for r in roots:
        if r.double:
            margin = margin_of(r.t, r.t)
            if margin > CONSTRAINT_MARGIN:
                return CONSTANT, r.t, margin
    if not roots:
        notes.append("q has no positive roots")
    return NONE, None, None


def classify_profile(prof: ProfilePolynomial) -> tuple:
    """Profile class ignoring any family constraint beyond g > 0."""
    notes: list = []
    cls, detail, _ = _scan(prof, lambda lo, hi: lo, notes)
    return cls, detail, notes


def classify(family: str, n: int, k: int, h: float, c: float, with_theta: bool = True) -> ClassificationRecord:
    """Decide the profile class for one parameter point.

    Preference order: a simple-root bracket inside the g-constraint gives a
    periodic profile; otherwise a coercive largest root gives an unbounded
    one; a double root inside the constraint gives a constant profile.
    """
    desc = check_validity(family, n, k, c)
    h, c = float(h), float(c)
    prof = ProfilePolynomial(desc.ode_family, h, c, n)
    rec = ClassificationRecord(family, n, k, h, c, NONE)
    cls, detail, margin = _scan(prof, lambda lo, hi: _margin(desc, lo, hi, c), rec.notes)
    rec.constraint_margin = margin
    if cls == PERIODIC:
        sol = solve_periodic(prof, *detail)
        rec.bracket = detail
        rec.period = sol.period
        rec.min_g = float(np.min(sol.samples[:, 1]))
        if with_theta:
            rec.theta_advance = instantiate(family, n, k, h, c, sol).theta_advance
    elif cls in (UNBOUNDED, CONSTANT):
        rec.root = rec.min_g = detail
        if cls == CONSTANT:
            rec.cylinder = CYLINDER_OF.get(family)
    rec.solution_class = cls
    return _finish(rec, desc)


def build_instance(rec: ClassificationRecord, t_horizon: Optional[float] = None) -> ImmersionInstance:
    """Immersion for a Periodic or Unbounded record."""
    prof = ProfilePolynomial(descriptor(rec.family).ode_family, rec.h, rec.c, rec.n)
    if rec.solution_class == PERIODIC:
        sol = solve_periodic(prof, *rec.bracket)
    elif rec.solution_class == UNBOUNDED:
        sol = solve_unbounded(prof, rec.root, t_horizon)
    else:
        raise ContractError(f"no immersion to build for class {rec.solution_class}")
    return instantiate(rec.family, rec.n, rec.k, rec.h, rec.c, sol)


# -- ranges --------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = False
    note: str = ""

    @property
    def is_empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.closed_lo and self.closed_hi)

    def contains(self, x: float) -> bool:
        if self.is_empty:
            return False
        above = x >= self.lo if self.closed_lo else x > self.lo
        below = x <= self.hi if self.closed_hi else x < self.hi
        return above and below

    def __str__(self) -> str:
        return f"{'[' if self.closed_lo else '('}{self.lo:.17g}, {self.hi:.17g}{']' if self.closed_hi else ')'}"


def realizable_range_closed_desitter(n: int) -> Interval:
    """Mean curvatures of closed S1-type examples: [-1, -2 sqrt(n-1)/n)."""
    if n < 3:
        raise OutOfValidity("the closed de Sitter construction needs n >= 3")
    lo, hi = periodic_window(n)
    return Interval(lo, hi, True, False,
                    "h=-1: unbounded-solution construction; (-1, hi): periodic construction")


def embedded_window(n: int, m: int) -> Interval:
    """Open interval between cot(pi/m) and (m^2-2) sqrt(n-1) / (n sqrt(m^2-1))."""
    if n < 2 or m < 2:
        raise OutOfValidity("need n >= 2 and m > 1")
    left = 0.0 if m == 2 else 1.0 / math.tan(math.pi / m)
    right = (m * m - 2) * math.sqrt(n - 1) / (n * math.sqrt(m * m - 1))
    return Interval(left, right)


def _minimize_cylinder(n: int, variant: str, restarts: int = 5):
    """Golden-section minimum of the cylinder curvature over r0 > 1 (or > 0)."""
    lo = 1.0 if variant == "SCyl1" else 0.0
    best = []
    for i in range(restarts):
        # map s in (0, 1) to r0 in (lo, inf); vary the initial bracket
        def F(s):
            return cylinder_mean_curvature(lo + s / (1 - s), n, variant)

        mid = 0.3 + 0.4 * i / max(1, restarts - 1)
        res = optimize.minimize_scalar(F, bracket=(1e-3, mid, 1 - 1e-3), method="golden", tol=1e-12)
        best.append((float(res.fun), lo + res.x / (1 - res.x)))
    return best


def hyperbolic_cylinder_range(n: int, variant: str = "SCyl1") -> Interval:
    """Mean curvatures attained by the constant-radius de Sitter examples (r0 > 0)."""
    if n < 2:
        raise OutOfValidity("n must be >= 2")
    if variant == "SCyl1":
        if n == 2:
            return Interval(1.0, math.inf, False, False, "infimum 1 approached as r0 -> infinity")
        target = 2 * math.sqrt(n - 1) / n
        vals = _minimize_cylinder(n, variant)
        if any(abs(v - target) > 1e-9 for v, _ in vals):
            raise ArithmeticError(f"numeric minimum {vals} disagrees with {target}")
        return Interval(target, math.inf, True, False, f"minimum at r0={math.sqrt(n / (n - 2)):.17g}")
    if variant == "SCyl2":
        return Interval(1.0, math.inf, False, False, "infimum 1 approached as r0 -> infinity")
    raise OutOfValidity(f"no range statement for {variant}")


# -- searches ------------------------------------------------------------------


def middle_root(h: float, n: int, c: float) -> Optional[tuple]:
    """(t1, t2) around v1 for q_1 just above c1, or None."""
    th = thresholds(h, n)
    prof = ProfilePolynomial("sphere-q", h, c, n)
    simple = [r.t for r in positive_roots(prof) if not r.double]
    below = [t for t in simple if t < th.v1]
    above = [t for t in simple if t > th.v1]
    if not below or not above:
        return None
    return below[-1], above[0]


def closed_epsilon(h: float, n: int, j_max: int = 40) -> dict:
    """Width of the c-window above c1 where t1(c) > sqrt(c).

    Expands c = c1 (1 + 2^-j) from j = j_max down to 1 until the condition
    fails, then bisects the boundary. Returns the search log with ``eps``.
    """
    th = thresholds(h, n)
    if th.c1 is None:
        raise OutOfRange(f"h={h} outside the periodic window for n={n}")
    c1 = th.c1

    def ok(c):
        br = middle_root(h, n, c)
        return br is not None and br[0] / math.sqrt(c) > 1.0

    good, bad, tried = None, None, []
    for j in range(j_max, 0, -1):
        c = c1 * (1 + 2.0**-j)
        passed = ok(c)
        tried.append((j, passed))
        if passed:
            good = c
        else:
            bad = c
            break
    if good is None:
        raise OutOfRange(f"no closed window detected above c1 for h={h}")
    if bad is None:
        return {"c1": c1, "eps": good - c1, "bounded": False, "tried": tried}
    for _ in range(80):
        mid = 0.5 * (good + bad)
        if ok(mid):
            good = mid
        else:
            bad = mid
        if bad - good < 1e-14 * c1:
            break
    return {"c1": c1, "eps": good - c1, "bounded": True, "tried": tried}


def closed_desitter_point(h: float, n: int, k: int = 1, j_max: int = 40) -> ClassificationRecord:
    """A closed S1-type record at mean curvature h in [-1, -2 sqrt(n-1)/n)."""
    rng = realizable_range_closed_desitter(n)
    if not rng.contains(h):
        raise OutOfValidity(f"h={h} outside {rng}")
    if h == -1.0:
        c0 = thresholds(h, n).c0_hminus1
        for j in range(1, j_max + 1):
            c = c0 * (1 - 2.0**-j)
            rec = classify("S1", n, k, h, c, with_theta=False)
            if rec.solution_class == UNBOUNDED:
                return rec
        raise OutOfRange("no unbounded S1 profile found below c0")
    info = closed_epsilon(h, n, j_max)
    c = info["c1"] + 0.5 * info["eps"]
    rec = classify("S1", n, k, h, c)
    rec.notes.append(f"c1={info['c1']:.17g} eps={info['eps']:.17g}")
    return rec


def theta_of_c(family: str, n: int, k: int, h: float, c: float) -> float:
    rec = classify(family, n, k, h, c)
    if rec.solution_class != PERIODIC:
        raise NoSignChange(f"c={c} gives class {rec.solution_class}, not periodic")
    return rec.theta_advance


def match_angle(n: int, h: float, target: float, c_bracket: tuple, family: str = "S4", k: int = 1,
                tol: float = 1e-8) -> float:
    """c with theta_advance(c) = target, by bracketed root finding on c."""
    a, b = (float(x) for x in c_bracket)
    try:
        fa = theta_of_c(family, n, k, h, a) - target
        fb = theta_of_c(family, n, k, h, b) - target
    except (CMCError, ContractError) as exc:
        raise NoSignChange(f"bracket endpoint not periodic: {exc}") from None
    if fa == 0:
        return a
    if fb == 0:
        return b
    if (fa < 0) == (fb < 0):
        raise NoSignChange(f"theta - target has sign {np.sign(fa):+.0f} at both ends of [{a}, {b}]")
    c = optimize.brentq(lambda x: theta_of_c(family, n, k, h, x) - target, a, b, xtol=1e-14, rtol=1e-15)
    err = abs(theta_of_c(family, n, k, h, c) - target)
    if err > tol:
        raise ArithmeticError(f"angle mismatch {err:.3e} after root finding")
    return c


def _rotation(theta: float, slots, dim: int, kind: str) -> np.ndarray:
    """Ambient isometry advancing the frame angle by theta."""
    R = np.eye(dim)
    p, q = slots[0] - 1, slots[1] - 1
    if kind == "trig":
        R[p, p] = R[q, q] = math.cos(theta)
        R[p, q], R[q, p] = -math.sin(theta), math.sin(theta)
    else:
        R[p, p] = R[q, q] = math.cosh(theta)
        R[p, q] = R[q, p] = math.sinh(theta)
    return R


def closure_residual(inst: ImmersionInstance, m: int, base_count: int = 4, u_count: int = 16, seed: int = 0) -> dict:
    """Closure of a periodic space-form instance after m profile periods.

    The profile and the frame angle are integrated together as one ODE
    over [0, m T], independent of the periodic extension. Reports
    ``wrap``: max |phi(y, mT) - phi(y, 0)|, and ``symmetry``: max
    |phi(y, u + T) - Rot(2 pi / m) phi(y, u)|.
    """
    d = inst.descriptor
    sol = inst.solution
    if d.flat or sol is None or sol.kind != "periodic":
        raise ContractError("closure needs a periodic space-form instance")
    prof = sol.profile
    sc = inst.sqrt_c
    T = sol.period

    def rhs(_u, y):
        g, gp, _ = y
        r = g / sc
        lam = inst.h + g ** (-inst.n)
        rate = inst.theta_scale * r * lam / float(radial_denominator(d.radial, r))
        return [gp, 0.5 * float(prof.derivative(g)), rate]

    aug = integrate.solve_ivp(rhs, (0.0, m * T), [sol.t1, 0.0, 0.0], method="DOP853",
                              rtol=ODE_RTOL, atol=ODE_ATOL * prof.scale, dense_output=True)
    n, k = inst.n, inst.k
    dim = d.ambient_dim(n)
    slots = d.frame_slots(n, k)

    def phi(y, u):
        g, _, th = aug.sol(u)
        r = g / sc
        B2, _ = frame(d.frame, th, slots, dim)
        return r * y + float(radial_factor(d.radial, r)) * B2

    R = _rotation(2 * math.pi / m, slots, dim, d.frame)
    wrap = sym = 0.0
    for y, _ in sample_base(d.base(n, k), seed, base_count):
        wrap = max(wrap, float(np.max(np.abs(phi(y, m * T) - phi(y, 0.0)))))
        for u in np.linspace(0.0, (m - 1) * T, u_count):
            sym = max(sym, float(np.max(np.abs(phi(y, u + T) - R @ phi(y, u)))))
    return {"wrap": wrap, "symmetry": sym, "max": max(wrap, sym), "theta_end": float(aug.sol(m * T)[2])}


def sweep(family: str, n: int, k: int, hs, cs):
    """Records over the product grid, in (h, c) order; invalid points skipped."""
    for h in hs:
        for c in cs:
            try:
                yield classify(family, n, k, float(h), float(c))
            except OutOfValidity:
                continue
