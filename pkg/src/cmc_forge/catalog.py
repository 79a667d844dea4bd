"""One known-good parameter point per family, for smoke runs and verification."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .immersion_families import ImmersionInstance, cylinder, descriptor, instantiate
from .profile_ode import ProfilePolynomial, positive_roots, solve_arc, solve_periodic, solve_unbounded, thresholds


@dataclass(frozen=True)
class ReferencePoint:
    family: str
    n: int
    k: int
    h: Optional[float] = None
    c: Optional[float] = None
    kind: str = "periodic"  # periodic | unbounded | arc | cylinder
    roots: tuple = (0, 1)  # bracket indices into the positive roots
    arc: Optional[tuple] = None  # (g0, g_lo, g_hi)
    r0: Optional[float] = None

    def build(self) -> ImmersionInstance:
        if self.kind == "cylinder":
            return cylinder(self.family, self.n, self.k, self.r0)
        prof = ProfilePolynomial(descriptor(self.family).ode_family, self.h, self.c, self.n)
        if self.kind == "periodic":
            r = positive_roots(prof)
            sol = solve_periodic(prof, r[self.roots[0]].t, r[self.roots[1]].t)
        elif self.kind == "unbounded":
            sol = solve_unbounded(prof, positive_roots(prof)[-1].t)
        else:
            sol = solve_arc(prof, *self.arc)
        return instantiate(self.family, self.n, self.k, self.h, self.c, sol)


def _reference_points() -> dict[str, ReferencePoint]:
    c1 = thresholds(-0.95, 3).c1
    c0 = thresholds(1.5, 3).c0_outer
    pts = [
        ReferencePoint("S1", 3, 1, -0.95, c1 + 0.005, roots=(1, 2)),
        ReferencePoint("S2", 3, 1, 1.5, -(c0 + 0.1), kind="unbounded"),
        # q_1 stays positive below sqrt(c): only monotone arcs fit g < sqrt(c)
        ReferencePoint("S3", 2, 1, 0.0, 1.0, kind="arc", arc=(0.5, 0.3, 0.9)),
        ReferencePoint("S4", 2, 1, 0.0, 2.5),
        ReferencePoint("SCyl1", 3, 1, kind="cylinder", r0=2**0.5),
        ReferencePoint("SCyl2", 2, 1, kind="cylinder", r0=1.0),
        ReferencePoint("H1", 3, 2, 0.5, 1.0, kind="arc", arc=(1.0, 0.5, 3.0)),
        ReferencePoint("H2", 3, 2, 0.5, -4.0, kind="arc", arc=(1.606912387587065, 1.5, 1.9)),
        ReferencePoint("H3", 3, 2, 0.5, -4.0, kind="arc", arc=(3.0, 2.1, 8.0)),
        ReferencePoint("H4", 3, 2, 0.5, -1.0, kind="unbounded"),
        ReferencePoint("H5", 3, 2, 0.5, 1.0, kind="unbounded"),
        ReferencePoint("HCyl1", 3, 2, kind="cylinder", r0=0.5),
        ReferencePoint("HCyl2", 3, 2, kind="cylinder", r0=2.0),
        ReferencePoint("E1", 2, 1, 0.5, 3.0),
        ReferencePoint("E2", 2, 2, 0.5, 3.0),
        ReferencePoint("E3", 2, 1, 0.5, 1.0, kind="arc", arc=(1.0, 0.5, 3.0)),
        ReferencePoint("E4", 2, 1, 0.5, -5.0, kind="unbounded"),
    ]
    return {p.family: p for p in pts}


REFERENCE_POINTS = _reference_points()


def reference_instance(family: str) -> ImmersionInstance:
    return REFERENCE_POINTS[family].build()
