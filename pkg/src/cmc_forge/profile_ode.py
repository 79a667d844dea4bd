"""Profile right-hand sides ``q(t)`` and solutions of ``(g')^2 = q(g)``.

All six right-hand sides share the form

    q(t) = c + a t^2 + s t^2 (h + t^-n)^2

with ``(a, s)`` fixed by the family. Multiplying by ``t^(2n-2)`` gives the
degree-2n polynomial

    P(t) = (a + s h^2) t^(2n) + c t^(2n-2) + 2 s h t^n + s

which is what root isolation and the endpoint-regularized quadrature work
with. Critical points solve a quadratic in ``x = t^n`` because
``q'(t) = 2 t (a + s lambda mu)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from .errors import (
    BadRoot,
    ContractError,
    DomainError,
    DoubleRoot,
    InvalidBracket,
    NotCoercive,
    OutOfRange,
)

ODE_RTOL = 1e-12
ODE_ATOL = 1e-13
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-13
DOUBLE_ROOT_REL = 1e-9
PERIOD_AGREEMENT = 1e-8


class Family(str, Enum):
    SPHERE_Q = "sphere-q"
    SPHERE_P = "sphere-p"
    HYP_Q = "hyp-q"
    HYP_P = "hyp-p"
    EUC_Q = "euc-q"
    EUC_P = "euc-p"


# (a, s) in q = c + a t^2 + s t^2 (h + t^-n)^2
_SHAPE = {
    Family.SPHERE_Q: (-1.0, 1.0),
    Family.SPHERE_P: (-1.0, -1.0),
    Family.HYP_Q: (1.0, 1.0),
    Family.HYP_P: (1.0, -1.0),
    Family.EUC_Q: (0.0, 1.0),
    Family.EUC_P: (0.0, -1.0),
}


@dataclass(frozen=True)
class ProfilePolynomial:
    family: Family
    h: float
    c: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "c", float(self.c))
        if int(self.n) != self.n or self.n < 2:
            raise ContractError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.family in (Family.EUC_Q, Family.EUC_P) and self.c == 0.0:
            raise ContractError("Euclidean profiles need c != 0")

    @property
    def a(self) -> float:
        return _SHAPE[self.family][0]

    @property
    def s(self) -> float:
        return _SHAPE[self.family][1]

    @property
    def lead(self) -> float:
        """Coefficient of t^2 in the large-t behaviour of q."""
        return self.a + self.s * self.h**2

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.c), abs(self.h))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lam = self.h + t ** (-self.n)
        return self.c + self.a * t**2 + self.s * t**2 * lam**2

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        tn = t ** (-self.n)
        lam = self.h + tn
        mu = self.h - (self.n - 1) * tn
        return 2.0 * t * (self.a + self.s * lam * mu)

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        n = self.n
        tn = t ** (-n)
        lam = self.h + tn
        mu = self.h - (n - 1) * tn
        dlam = -n * tn / t
        dmu = n * (n - 1) * tn / t
        return 2.0 * (self.a + self.s * lam * mu) + 2.0 * t * self.s * (dlam * mu + lam * dmu)

    def cleared(self) -> Polynomial:
        """``t^(2n-2) q(t)`` as a polynomial in t."""
        n = self.n
        coef = np.zeros(2 * n + 1)
        coef[2 * n] += self.lead
        coef[2 * n - 2] += self.c
        coef[n] += 2.0 * self.s * self.h
        coef[0] += self.s
        return Polynomial(coef)


def eval(profile: ProfilePolynomial, t: float) -> tuple[float, float]:  # noqa: A001
    """``(q(t), q'(t))`` from the closed-form expressions."""
    if not t > 0:
        raise DomainError(f"profiles are defined for t > 0, got {t}")
    return float(profile(t)), float(profile.derivative(t))


# -- critical points and roots -------------------------------------------------


def _quadratic_roots(A: float, B: float, C: float) -> list[float]:
    """Real roots of A x^2 + B x + C, cancellation-free."""
    if A == 0.0:
        return [] if B == 0.0 else [-C / B]
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    qv = -0.5 * (B + math.copysign(sq, B)) if B != 0 else -0.5 * sq
    if qv == 0.0:
        return [0.0]
    return sorted({qv / A, C / qv})


def sphere_q_closed_form(h: float, n: int) -> list[float]:
    """Critical points of q_1 in the displayed closed forms (smaller first)."""
    disc = 4 - 4 * n + h * h * n * n
    if h * h == 1.0:
        if n == 2:
            return []
        x = (n - 1) / (h * (2 - n))
        return [x ** (1.0 / n)] if x > 0 else []
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    out = []
    for num in (h * (n - 2) + sq, h * (n - 2) - sq):
        ratio = num / (h * h - 1)
        if ratio > 0:
            out.append(2 ** (-1.0 / n) * ratio ** (1.0 / n))
    return sorted(out)


def critical_points(profile: ProfilePolynomial) -> list[float]:
    """Positive zeros of q'.

    With x = t^n the condition ``a + s lambda mu = 0`` reads
    ``lead x^2 + s h (2-n) x + s (1-n) = 0``.
    """
    p = profile
    if p.family is Family.SPHERE_Q:
        pts = sphere_q_closed_form(p.h, p.n)
    else:
        xs = _quadratic_roots(p.lead, p.s * p.h * (2 - p.n), p.s * (1 - p.n))
        pts = sorted(x ** (1.0 / p.n) for x in xs if x > 0)
    numeric = critical_points_numeric(p)
    if len(numeric) == len(pts):
        for v, w in zip(pts, numeric):
            if abs(v - w) > 1e-10 * max(1.0, v):
                raise ArithmeticError(f"closed-form critical point {v!r} disagrees with {w!r}")
    return pts


def _cauchy_bounds(poly: Polynomial) -> tuple[float, float]:
    """Positive bounds enclosing all nonzero real roots of ``poly``."""
    coef = np.trim_zeros(poly.coef, "b")
    if coef.size <= 1:
        return 1.0, 1.0
    lead = coef[-1]
    upper = 1.0 + np.max(np.abs(coef[:-1] / lead))
    low = np.trim_zeros(coef, "f")
    lower = 1.0 / (1.0 + np.max(np.abs(low[1:] / low[0]))) if low.size > 1 else upper
    return float(lower), float(upper)


def critical_points_numeric(profile: ProfilePolynomial, grid: int = 4000) -> list[float]:
    """Sign-change scan of q' on a geometric grid, refined by bisection."""
    n = profile.n
    dpoly = Polynomial(
        np.array([profile.s * (2 - 2 * n)] + [0.0] * (n - 1) + [2 * profile.s * profile.h * (2 - n)]
                 + [0.0] * (n - 1) + [2 * profile.lead])
    )
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        lo, hi = _cauchy_bounds(dpoly)
        ts = np.geomspace(max(lo * 0.5, 1.0 / T_CAP), min(hi * 2.0, T_CAP), grid)
        vals = dpoly(ts)
    out = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        out.append(_bisect(dpoly, ts[i], ts[i + 1]))
    return out


def _bisect(f, lo, hi, maxiter=200):
    flo = f(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


T_CAP = 1e100


class Root(NamedTuple):
    t: float
    double: bool


def positive_roots(profile: ProfilePolynomial, t_max: Optional[float] = None) -> list[Root]:
    """Certified positive roots of q on (0, t_max].

    The cleared polynomial is monotone between consecutive critical points,
    so the partition {Cauchy lower bound, critical points, Cauchy upper
    bound} has at most one sign change per cell. Roots beyond ``T_CAP``
    (only possible for |h| or |c| near underflow) are not reported.
    """
    P = profile.cleared()
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        lo, hi = _cauchy_bounds(P)
    lo = max(lo * 0.5, 1.0 / T_CAP)
    hi = min(hi * 2.0, T_CAP)
    if t_max is not None:
        hi = min(hi, float(t_max))
    crit = [v for v in critical_points(profile) if lo < v < hi]
    knots = [lo, *crit, hi]
    # q and the cleared polynomial share signs on t > 0; q does not overflow
    vals = [float(profile(t)) for t in knots]
    scale = profile.scale
    roots: list[Root] = []
    for v in crit:
        qv = float(profile(v))
        if abs(qv) <= 1e-12 * scale:
            roots.append(Root(v, True))
    for (t0, f0), (t1, f1) in zip(zip(knots, vals), zip(knots[1:], vals[1:])):
        if f0 == 0.0 or f1 == 0.0 or (f0 < 0) == (f1 < 0):
            continue
        r = optimize.brentq(profile, t0, t1, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        if any(abs(r - d.t) < 1e-9 * max(1.0, r) for d in roots):
            continue
        dq = abs(float(profile.derivative(r)))
        ddq = abs(float(profile.second_derivative(r)))
        roots.append(Root(r, dq < DOUBLE_ROOT_REL * max(1.0, ddq)))
    return sorted(roots)


# -- closed-form thresholds ----------------------------------------------------


@dataclass(frozen=True)
class Thresholds:
    h: float
    n: int
    c1: Optional[float] = None
    c0_hminus1: Optional[float] = None
    c0_outer: Optional[float] = None
    v0: Optional[float] = None
    v1: Optional[float] = None


def periodic_window(n: int) -> tuple[float, float]:
    """Open h-interval with two critical points of q_1 (n - 1 form)."""
    return -1.0, -2.0 * math.sqrt(n - 1) / n


def c1_closed(h: float, n: int) -> float:
    sq = math.sqrt(4 - 4 * n + h * h * n * n)
    return (
        (2 - 2 * h * h) ** ((n - 2) / n)
        * n
        * (-h * (n - 2) + sq) ** ((2 - 2 * n) / n)
        * (h * h * n - 2 - h * sq)
    )


def c0_outer_closed(h: float, n: int) -> float:
    sq = math.sqrt(4 - 4 * n + h * h * n * n)
    return (
        (2 * h * h - 2) ** ((n - 2) / n)
        * n
        * (h * (n - 2) + sq) ** ((2 - 2 * n) / n)
        * (h * h * n - 2 + h * sq)
    )


def c0_hminus1_closed(n: int) -> float:
    return n * (n - 2) ** ((n - 2) / n) * (n - 1) ** ((2 - 2 * n) / n)


def v1_over_sqrt_c1_squared(h: float, n: int) -> float:
    """Reduced expression for (v_1 / sqrt(c_1))^2."""
    return (2 + (-2 + h * h) * n + h * math.sqrt(4 + n * (-4 + h * h * n))) / (2 * (-1 + h * h) * n)


def _shift_oracle(v: float, h: float, n: int) -> float:
    # c enters q_1 additively: q_1(v) = c + (q_1(v) at c=0)
    return -(-(v**2) + v**2 * (h + v ** (-n)) ** 2)


def thresholds(h: float, n: int) -> Thresholds:
    """Threshold values of c for q_1 at mean curvature h.

    * ``c1``: q_1(v_1) = 0 at c = c1, for h in (-1, -2 sqrt(n-1)/n).
    * ``c0_hminus1``: q_1(v_0) = c - c0 at h = -1 (n >= 3).
    * ``c0_outer``: q_1(v_0) = c + c0 for |h| > 1.
    """
    if n < 2:
        raise OutOfRange("n must be >= 2")
    lo, hi = periodic_window(n)
    if lo < h < hi:
        v0, v1 = sphere_q_closed_form(h, n)
        c1 = c1_closed(h, n)
        _agree(c1, _shift_oracle(v1, h, n), "c1")
        return Thresholds(h, n, c1=c1, v0=v0, v1=v1)
    if h == -1.0:
        if n < 3:
            raise OutOfRange("c0 at h = -1 needs n >= 3")
        (v0,) = sphere_q_closed_form(h, n)
        c0 = c0_hminus1_closed(n)
        _agree(c0, _shift_oracle(v0, h, n), "c0 (h=-1)")
        return Thresholds(h, n, c0_hminus1=c0, v0=v0)
    if abs(h) > 1.0:
        (v0,) = sphere_q_closed_form(h, n)
        c0 = c0_outer_closed(h, n)
        _agree(c0, -_shift_oracle(v0, h, n), "c0 (|h|>1)")
        return Thresholds(h, n, c0_outer=c0, v0=v0)
    raise OutOfRange(f"no threshold constant defined for h={h}, n={n}")


def _agree(closed, oracle, name):
    if abs(closed - oracle) > 1e-10 * max(1.0, abs(oracle)):
        raise ArithmeticError(f"{name}: closed form {closed!r} vs substitution {oracle!r}")


# -- endpoint-regularized quadrature -------------------------------------------


def _shifted(profile: ProfilePolynomial, root: float, sign: float) -> Polynomial:
    """Coefficients of sigma -> P(root + sign*sigma) / sigma (constant term dropped)."""
    P = profile.cleared()
    shifted = P(Polynomial([root, sign]))
    return Polynomial(shifted.coef[1:]) if shifted.coef.size > 1 else Polynomial([0.0])


def singular_integral(
    profile: ProfilePolynomial,
    t1: float,
    t2: float,
    weight: Callable[[float], float] = lambda t: 1.0,
    left_root: bool = True,
    right_root: bool = True,
) -> float:
    """``int_{t1}^{t2} weight(t) / sqrt(q(t)) dt`` with inverse-sqrt endpoints.

    At a root endpoint the substitution t = t1 + s^2 (or t2 - s^2) turns the
    integrand into ``2 weight(t) t^(n-1) / sqrt(R(s^2))`` where R is the
    Taylor-shifted cleared polynomial divided by s^2, which is smooth.
    """
    n = profile.n
    mid = 0.5 * (t1 + t2)
    total = 0.0
    if left_root:
        RL = _shifted(profile, t1, 1.0)

        def fl(s):
            t = t1 + s * s
            return 2.0 * weight(t) * t ** (n - 1) / math.sqrt(RL(s * s))

        total += integrate.quad(fl, 0.0, math.sqrt(mid - t1), epsabs=QUAD_EPSABS,
                                epsrel=QUAD_EPSREL, limit=200)[0]
    else:
        total += integrate.quad(lambda t: weight(t) / math.sqrt(profile(t)), t1, mid,
                                epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)[0]
    if right_root:
        RR = _shifted(profile, t2, -1.0)

        def fr(s):
            t = t2 - s * s
            return 2.0 * weight(t) * t ** (n - 1) / math.sqrt(RR(s * s))

        total += integrate.quad(fr, 0.0, math.sqrt(t2 - mid), epsabs=QUAD_EPSABS,
                                epsrel=QUAD_EPSREL, limit=200)[0]
    else:
        total += integrate.quad(lambda t: weight(t) / math.sqrt(profile(t)), mid, t2,
                                epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)[0]
    return total


def half_period(profile: ProfilePolynomial, t1: float, t2: float) -> float:
    return singular_integral(profile, t1, t2)


# -- solutions -----------------------------------------------------------------


def _rhs(profile):
    def f(_u, y):
        return [y[1], 0.5 * float(profile.derivative(y[0]))]

    return f


@dataclass(frozen=True)
class ProfileSolution:
    """A solution of (g')^2 = q(g) with its extension rule.

    ``kind`` is one of ``periodic``, ``unbounded``, ``constant`` or ``arc``.
    ``samples`` holds rows ``(u, g, g')`` on the fundamental half-branch
    (the whole computed interval for arcs).
    """

    profile: ProfilePolynomial
    kind: str
    samples: np.ndarray
    t1: Optional[float] = None
    t2: Optional[float] = None
    period: Optional[float] = None
    period_ode: Optional[float] = None
    a: Optional[float] = None
    eps: Optional[float] = None
    linear_growth: bool = False
    t0: Optional[float] = None
    u_min: float = -math.inf
    u_max: float = math.inf
    _dense: tuple = field(default=(), repr=False, compare=False)

    def __call__(self, u):
        """Return ``(g(u), g'(u))`` on the extended domain."""
        u = np.asarray(u, dtype=float)
        if self.kind == "constant":
            return np.full_like(u, self.t0), np.zeros_like(u)
        if np.any(u < self.u_min - 1e-12) or np.any(u > self.u_max + 1e-12):
            from .errors import DomainExceeded

            raise DomainExceeded(f"u outside [{self.u_min}, {self.u_max}]")
        if self.kind == "periodic":
            T = self.period
            w = np.mod(u, T)
            refl = w > 0.5 * T
            w = np.where(refl, T - w, w)
            y = self._dense[0](w)
            return y[0], np.where(refl, -y[1], y[1])
        if self.kind == "unbounded":
            y = self._dense[0](np.abs(u))
            return y[0], np.sign(u) * y[1]
        fwd, bwd = self._dense
        y = np.where(u >= 0, fwd(np.maximum(u, 0.0)), bwd(np.minimum(u, 0.0)))
        return y[0], y[1]

    def g(self, u):
        return self(u)[0]

    def energy_residual(self, u=None):
        if u is None:
            u = self.samples[:, 0]
        g, gp = self(u)
        return gp**2 - self.profile(g)

    @property
    def max_energy_residual(self) -> float:
        return float(np.max(np.abs(self.energy_residual())))


def _energy_scale(profile, g):
    return max(1.0, float(np.max(np.abs(profile(g)))), abs(profile.c))


def _check_energy(profile, samples, tol=1e-8):
    res = samples[:, 2] ** 2 - profile(samples[:, 1])
    bound = tol * _energy_scale(profile, samples[:, 1])
    if np.max(np.abs(res)) > bound:
        raise ArithmeticError(f"energy residual {np.max(np.abs(res)):.3e} exceeds {bound:.1e}")


def solve_periodic(profile: ProfilePolynomial, t1: float, t2: float, n_samples: int = 257) -> ProfileSolution:
    """Periodic solution oscillating in [t1, t2] with g(0) = t1."""
    scale = profile.scale
    if not 0 < t1 < t2:
        raise InvalidBracket(f"need 0 < t1 < t2, got ({t1}, {t2})")
    q1, dq1 = eval(profile, t1)
    q2, dq2 = eval(profile, t2)
    for t, qv, dq in ((t1, q1, dq1), (t2, q2, dq2)):
        if abs(qv) > 1e-9 * scale:
            raise InvalidBracket(f"q({t}) = {qv:.3e} is not a root")
        if abs(dq) < DOUBLE_ROOT_REL * max(1.0, abs(float(profile.second_derivative(t)))):
            raise DoubleRoot(t)
    if not (dq1 > 0 and dq2 < 0):
        raise InvalidBracket(f"need q'(t1) > 0 > q'(t2), got {dq1:.3e}, {dq2:.3e}")
    inner_roots = [r for r in positive_roots(profile, t_max=2 * t2) if t1 * (1 + 1e-9) < r.t < t2 * (1 - 1e-9)]
    if inner_roots or not profile(0.5 * (t1 + t2)) > 0:
        raise InvalidBracket("q is not positive inside the bracket")

    T = 2.0 * half_period(profile, t1, t2)

    def turn(_u, y):
        return y[1]

    turn.direction = -1.0
    sol = integrate.solve_ivp(
        _rhs(profile), (0.0, 0.5 * T * (1 + 1e-3)), [t1, 0.0], method="DOP853",
        rtol=ODE_RTOL, atol=ODE_ATOL * scale, dense_output=True, events=turn,
    )
    hits = [te for te in sol.t_events[0] if te > 1e-6 * T]
    if not hits:
        raise ArithmeticError("no turning point found on the half period")
    T_ode = 2.0 * hits[0]
    if abs(T_ode - T) > PERIOD_AGREEMENT * T:
        raise ArithmeticError(f"period mismatch: quadrature {T!r} vs turning point {T_ode!r}")
    us = np.linspace(0.0, 0.5 * T, n_samples)
    y = sol.sol(us)
    samples = np.column_stack([us, y[0], y[1]])
    _check_energy(profile, samples)
    return ProfileSolution(
        profile, "periodic", samples, t1=t1, t2=t2, period=T, period_ode=T_ode,
        _dense=(sol.sol,),
    )


def asymptotic_eps(profile: ProfilePolynomial, t_horizon: float, rel=1e-3, max_doublings=80):
    """Estimate lim q(t)/t^2, doubling the probe until two-point agreement."""
    t = float(t_horizon)
    for _ in range(max_doublings):
        e1 = float(profile(t)) / t**2
        e2 = float(profile(2 * t)) / (2 * t) ** 2
        if e2 != 0 and abs(e2 - e1) < rel * abs(e2):
            return e2
        t *= 2
    return float(profile(t)) / t**2


def solve_unbounded(
    profile: ProfilePolynomial,
    a: float,
    t_horizon: Optional[float] = None,
    n_samples: int = 257,
) -> ProfileSolution:
    """Even solution with minimum g(0) = a growing without bound.

    Requires q(a) = 0 < q'(a) and q > 0 on (a, t_horizon]. Either
    q(t)/t^2 tends to a positive limit (logarithmic growth of the inverse
    function) or q tends to a positive constant (linear growth).
    """
    scale = profile.scale
    qa, dqa = eval(profile, a)
    if abs(qa) > 1e-9 * scale or not dqa > 0:
        raise BadRoot(f"a={a} must be a simple root with q'(a) > 0 (q={qa:.3e}, q'={dqa:.3e})")
    if t_horizon is None:
        t_horizon = 4.0 * a
    if not t_horizon > a:
        raise ContractError("t_horizon must exceed a")
    later = [r for r in positive_roots(profile) if r.t > a * (1 + 1e-9)]
    if later and later[0].t <= t_horizon:
        raise NotCoercive(f"q vanishes at {later[0].t} before the horizon {t_horizon}")
    lead = profile.lead
    linear = False
    if abs(lead) < 1e-14:
        if profile.c > 0 and not later:
            eps, linear = 0.0, True
        else:
            raise NotCoercive("q(t)/t^2 -> 0 and q does not stay positive")
    else:
        eps = asymptotic_eps(profile, t_horizon)
        if not eps > 0 or later:
            raise NotCoercive(f"q(t)/t^2 -> {eps:.3e}; q eventually negative")

    def reach(_u, y):
        return y[0] - t_horizon

    reach.terminal = True
    reach.direction = 1.0
    # ample upper bound on the parameter: linear growth at rate sqrt(min q)
    sol = integrate.solve_ivp(
        _rhs(profile), (0.0, 1e6), [a, 0.0], method="DOP853",
        rtol=ODE_RTOL, atol=ODE_ATOL * scale, dense_output=True, events=reach,
    )
    if not sol.t_events[0].size:
        raise ArithmeticError("solution did not reach the horizon")
    u_max = float(sol.t_events[0][0])
    us = np.linspace(0.0, u_max, n_samples)
    y = sol.sol(us)
    samples = np.column_stack([us, y[0], y[1]])
    _check_energy(profile, samples)
    return ProfileSolution(
        profile, "unbounded", samples, a=a, eps=eps, linear_growth=linear,
        u_min=-u_max, u_max=u_max, _dense=(sol.sol,),
    )


def solve_arc(
    profile: ProfilePolynomial,
    g0: float,
    g_lo: float,
    g_hi: float,
    direction: float = 1.0,
    u_span: float = 50.0,
    n_samples: int = 257,
) -> ProfileSolution:
    """Solution through g(0) = g0 kept inside (g_lo, g_hi).

    Used for families whose admissible solutions never reach a turning
    point pair (q > 0 throughout the admissible range). If g0 is a root the
    solution is even about u = 0.
    """
    scale = profile.scale
    qv = float(profile(g0))
    if qv < -1e-12 * scale:
        raise ContractError(f"q(g0) = {qv:.3e} < 0")
    p0 = math.copysign(math.sqrt(max(qv, 0.0)), direction)

    def lo(_u, y):
        return y[0] - g_lo

    def hi(_u, y):
        return y[0] - g_hi

    lo.terminal = hi.terminal = True
    kw = dict(method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL * scale, dense_output=True, events=(lo, hi))
    fwd = integrate.solve_ivp(_rhs(profile), (0.0, u_span), [g0, p0], **kw)
    bwd = integrate.solve_ivp(_rhs(profile), (0.0, -u_span), [g0, p0], **kw)
    u_max, u_min = float(fwd.t[-1]), float(bwd.t[-1])
    us = np.linspace(u_min, u_max, n_samples)
    y = np.where(us >= 0, fwd.sol(np.maximum(us, 0)), bwd.sol(np.minimum(us, 0)))
    samples = np.column_stack([us, y[0], y[1]])
    _check_energy(profile, samples)
    return ProfileSolution(
        profile, "arc", samples, u_min=u_min, u_max=u_max, _dense=(fwd.sol, bwd.sol),
    )


def constant_solution(profile: ProfilePolynomial, t0: float) -> ProfileSolution:
    samples = np.array([[0.0, t0, 0.0]])
    return ProfileSolution(profile, "constant", samples, t0=t0)


def write_profile_csv(solution: ProfileSolution, path) -> None:
    """CSV with columns t, g, g_prime, energy_residual."""
    s = solution.samples
    res = s[:, 2] ** 2 - solution.profile(s[:, 1])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "g", "g_prime", "energy_residual"])
        for row, e in zip(s, res):
            w.writerow([f"{row[0]:.17g}", f"{row[1]:.17g}", f"{row[2]:.17g}", f"{e:.17g}"])
