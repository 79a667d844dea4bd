"""Indefinite inner products on R_k^m and the quadrics used as cross-sections.

Slot labels in every public argument are 1-based (slot 1 is the first
coordinate); arrays are ordinary 0-based numpy vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ContractError, EmptyQuadric


@dataclass(frozen=True)
class AmbientSignature:
    """R^dim with the first ``k`` axes timelike."""

    dim: int
    k: int

    def __post_init__(self):
        if self.dim < 1:
            raise ContractError(f"dim must be positive, got {self.dim}")
        if not 0 <= self.k <= self.dim:
            raise ContractError(f"need 0 <= k <= dim, got k={self.k}, dim={self.dim}")

    @property
    def metric(self) -> np.ndarray:
        """Diagonal of the metric: -1 on the first k axes, +1 after."""
        d = np.ones(self.dim)
        d[: self.k] = -1.0
        return d

    def axis_sign(self, slot: int) -> float:
        return -1.0 if slot <= self.k else 1.0


@dataclass(frozen=True)
class QuadricSpec:
    """``{x : <x,x> = level}`` intersected with ``{x_i = 0 for i in zeroed_slots}``."""

    signature: AmbientSignature
    level: int
    zeroed_slots: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "zeroed_slots", tuple(int(s) for s in self.zeroed_slots))
        if self.level not in (1, -1):
            raise ContractError(f"level must be +1 or -1, got {self.level}")
        zs = self.zeroed_slots
        if len(set(zs)) != len(zs):
            raise ContractError(f"zeroed slots repeat: {zs}")
        if any(not 1 <= s <= self.signature.dim for s in zs):
            raise ContractError(f"zeroed slots {zs} outside 1..{self.signature.dim}")
        if len(self.free_slots) < 2:
            raise ContractError("quadric of dimension < 1 has no cross-section")

    @property
    def free_slots(self) -> tuple[int, ...]:
        return tuple(s for s in range(1, self.signature.dim + 1) if s not in self.zeroed_slots)

    @property
    def timelike_free(self) -> tuple[int, ...]:
        return tuple(s for s in self.free_slots if s <= self.signature.k)

    @property
    def spacelike_free(self) -> tuple[int, ...]:
        return tuple(s for s in self.free_slots if s > self.signature.k)

    @property
    def dimension(self) -> int:
        return len(self.free_slots) - 1

    @property
    def tangent_index(self) -> int:
        """Number of negative directions in the induced metric."""
        return len(self.timelike_free) - (1 if self.level == -1 else 0)

    @property
    def is_empty(self) -> bool:
        if self.level == 1:
            return not self.spacelike_free
        return not self.timelike_free


class QuadricResidual(NamedTuple):
    value: float
    zeroed_max: float


def _check_len(v, dim):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != dim:
        raise ContractError(f"vector of length {v.shape[-1]} in dimension {dim}")
    return v


def inner(v, w, sig: AmbientSignature) -> float:
    """``-v_1 w_1 - ... - v_k w_k + v_{k+1} w_{k+1} + ...``

    Broadcasts over leading axes, so stacks of vectors are accepted.
    """
    v = _check_len(v, sig.dim)
    w = _check_len(w, sig.dim)
    out = np.sum(v * w * sig.metric, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def quadric_residual(x, q: QuadricSpec) -> QuadricResidual:
    x = _check_len(x, q.signature.dim)
    zs = [s - 1 for s in q.zeroed_slots]
    zmax = float(np.max(np.abs(x[zs]))) if zs else 0.0
    return QuadricResidual(inner(x, x, q.signature) - q.level, zmax)


def _unit(rng: np.random.Generator, m: int) -> np.ndarray:
    while True:
        a = rng.standard_normal(m)
        nrm = np.linalg.norm(a)
        if nrm > 1e-8:
            return a / nrm


def _orth_complement(a: np.ndarray) -> np.ndarray:
    """Euclidean orthonormal basis (rows) of the complement of unit vector ``a``."""
    m = a.size
    if m == 1:
        return np.zeros((0, 1))
    # Householder-free route: QR of [a | I]
    qmat, _ = np.linalg.qr(np.column_stack([a, np.eye(m)]))
    return qmat[:, 1:m].T


def _embed(q: QuadricSpec, slots, coords) -> np.ndarray:
    x = np.zeros(q.signature.dim)
    if len(slots):
        x[[s - 1 for s in slots]] = coords
    return x


def base_frame(q: QuadricSpec, s: float, a: np.ndarray, b: np.ndarray):
    """Point on the quadric plus a pseudo-orthonormal basis of its tangent space.

    ``a`` and ``b`` are Euclidean unit vectors in the timelike and spacelike
    free coordinates; ``s`` is the boost parameter. Returns ``(y, timelike,
    spacelike)`` where the last two are lists of tangent vectors with
    ``<v,v> = -1`` and ``+1``.
    """
    tl, sl = q.timelike_free, q.spacelike_free
    ch, sh = np.cosh(s), np.sinh(s)
    if q.level == 1:
        y = _embed(q, tl, sh * a) + _embed(q, sl, ch * b)
        partner = _embed(q, tl, ch * a) + _embed(q, sl, sh * b) if tl else None
        timelike = [partner] if partner is not None else []
        spacelike = []
    else:
        y = _embed(q, tl, ch * a) + _embed(q, sl, sh * b)
        partner = _embed(q, tl, sh * a) + _embed(q, sl, ch * b) if sl else None
        spacelike = [partner] if partner is not None else []
        timelike = []
    if tl:
        timelike += [_embed(q, tl, row) for row in _orth_complement(a)]
    if sl:
        spacelike += [_embed(q, sl, row) for row in _orth_complement(b)]
    return y, timelike, spacelike


def sample_base(q: QuadricSpec, seed: int, count: int):
    """Deterministic ``(point, tangent)`` pairs on the quadric.

    Causal types of the tangents alternate when the induced metric has both
    signs; every tangent has ``<v,v> = +-1`` and ``<v,y> = 0``.
    """
    if q.is_empty:
        raise EmptyQuadric(
            f"<x,x>={q.level} has no points with free slots {q.free_slots} (k={q.signature.k})"
        )
    rng = np.random.default_rng(seed)
    tl, sl = q.timelike_free, q.spacelike_free
    out = []
    for i in range(count):
        s = rng.uniform(-2.0, 2.0) if (tl and sl) else 0.0
        a = _unit(rng, len(tl)) if tl else np.zeros(0)
        b = _unit(rng, len(sl)) if sl else np.zeros(0)
        y, timelike, spacelike = base_frame(q, s, a, b)
        kinds = [basis for basis in (spacelike, timelike) if basis]
        basis = kinds[i % len(kinds)]
        coef = _unit(rng, len(basis))
        v = np.sum([ci * bi for ci, bi in zip(coef, basis)], axis=0)
        out.append((y, v))
    return out


def base_curve(q: QuadricSpec, alpha) -> np.ndarray:
    """Parametrize a one-dimensional base quadric (the n=2 case).

    Circle-type bases are periodic in ``alpha`` with period 2*pi; hyperbola
    branches are traced by ``alpha`` as boost parameter.
    """
    if q.dimension != 1:
        raise ContractError("base_curve needs a one-dimensional quadric")
    if q.is_empty:
        raise EmptyQuadric("empty base quadric")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    tl, sl = q.timelike_free, q.spacelike_free
    pts = np.zeros((alpha.size, q.signature.dim))
    if len(tl) == 2 or len(sl) == 2:
        slots = tl if len(tl) == 2 else sl
        pts[:, slots[0] - 1] = np.cos(alpha)
        pts[:, slots[1] - 1] = np.sin(alpha)
    else:
        main, other = (sl[0], tl[0]) if q.level == 1 else (tl[0], sl[0])
        pts[:, main - 1] = np.cosh(alpha)
        pts[:, other - 1] = np.sinh(alpha)
    return pts


def base_is_closed(q: QuadricSpec) -> bool:
    """True when the one-dimensional base is a circle."""
    return len(q.timelike_free) == 2 or len(q.spacelike_free) == 2
