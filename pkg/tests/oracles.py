"""Independent reference computations used by the tests.

Plain-Python scans and bisection, no scipy: these must not share code paths
with the package under test.
"""
import math


def bisect(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 4e-16 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def sign_change_roots(f, lo, hi, count=20000, geometric=True):
    """All sign changes of f on a fine grid, refined by bisection."""
    if geometric:
        r = (hi / lo) ** (1.0 / count)
        xs = [lo * r**i for i in range(count + 1)]
    else:
        xs = [lo + (hi - lo) * i / count for i in range(count + 1)]
    vals = [f(x) for x in xs]
    out = []
    for a, b, fa, fb in zip(xs, xs[1:], vals, vals[1:]):
        if fa == 0:
            out.append(a)
        elif (fa < 0) != (fb < 0):
            out.append(bisect(f, a, b))
    return out


def golden_min(f, lo, hi, tol=1e-13):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def q_family(a, s):
    """Right-hand side with (a, s) written out directly."""
    def make(h, c, n):
        return lambda t: c + a * t * t + s * t * t * (h + t ** (-n)) ** 2
    return make


q1 = q_family(-1.0, 1.0)
p1 = q_family(-1.0, -1.0)
q2 = q_family(1.0, 1.0)
p2 = q_family(1.0, -1.0)
q3 = q_family(0.0, 1.0)
p3 = q_family(0.0, -1.0)


def dq1(h, n):
    """Derivative of q_1 written out by hand (c drops out)."""
    return lambda t: -2 * t + 2 * t * (h + t ** (-n)) ** 2 - 2 * n * t ** (1 - n) * (h + t ** (-n))
