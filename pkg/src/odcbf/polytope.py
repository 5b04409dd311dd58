"""Admissible input sets as convex polytopes.

An :class:`InputPolytope` stores the half-space form ``A u <= b`` and,
optionally, its vertices.  Vertex enumeration intersects every choice of
``m`` half-spaces and is restricted to ``m <= 3``; the controllers only ever
use the half-space form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .qp import solve_feasibility

VERTEX_TOL = 1e-9
DEDUP_TOL = 1e-8
MAX_ENUM_DIM = 3


class UnboundedPolytopeError(ValueError):
    """The half-space description admits a recession direction."""


@dataclass(frozen=True)
class InputPolytope:
    A: np.ndarray
    b: np.ndarray
    vertices: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError("half-space matrix and offsets disagree in length")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.vertices is not None:
            V = np.asarray(self.vertices, dtype=float).reshape(-1, A.shape[1])
            if V.size and np.any(V @ A.T - b > VERTEX_TOL):
                raise ValueError("a stored vertex violates the half-spaces")
            object.__setattr__(self, "vertices", V)

    @property
    def m(self) -> int:
        return self.A.shape[1]

    @property
    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        return [(a, float(bi)) for a, bi in zip(self.A, self.b)]

    def with_vertices(self) -> "InputPolytope":
        if self.vertices is not None:
            return self
        return InputPolytope(self.A, self.b, enumerate_vertices(self))

    def contains(self, u, tol: float = 0.0) -> bool:
        return contains(self, u, tol)


# u_adm may depend on the state
PolytopeLike = Union[InputPolytope, Callable[[np.ndarray], InputPolytope]]


def resolve(uadm: PolytopeLike, x) -> InputPolytope:
    return uadm if isinstance(uadm, InputPolytope) else uadm(np.asarray(x, dtype=float))


def from_box(lo, hi) -> InputPolytope:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise ValueError("box bounds differ in length")
    if np.any(lo > hi):
        raise ValueError(f"lower bound exceeds upper bound: {lo} > {hi}")
    m = lo.size
    eye = np.eye(m)
    A = np.vstack([eye, -eye])
    b = np.concatenate([hi, -lo])
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    return InputPolytope(A, b, _dedup(corners))


def interval(lo: float, hi: float) -> InputPolytope:
    return from_box([lo], [hi])


def _dedup(points: np.ndarray) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > DEDUP_TOL for q in kept):
            kept.append(p)
    return np.array(kept).reshape(-1, points.shape[1] if points.ndim == 2 else 0)


def is_bounded(p: InputPolytope) -> bool:
    """True if ``{d : A d <= 0}`` contains only the origin."""
    m = p.m
    zeros = np.zeros(p.A.shape[0])
    for i in range(m):
        for sign in (1.0, -1.0):
            row = np.zeros(m)
            row[i] = -sign  # sign * d_i >= 1
            res = solve_feasibility(np.vstack([p.A, row]), np.append(zeros, -1.0), dim=m)
            if res.feasible:
                return False
    return True


def enumerate_vertices(p: InputPolytope) -> np.ndarray:
    """All vertices of a bounded polytope, as an ``(r, m)`` array.

    Raises :class:`UnboundedPolytopeError` for unbounded sets and
    ``NotImplementedError`` above three input dimensions.  An empty polytope
    yields an empty array.
    """
    m = p.m
    if m > MAX_ENUM_DIM:
        raise NotImplementedError(f"vertex enumeration supports m <= {MAX_ENUM_DIM}, got {m}")
    if not is_bounded(p):
        raise UnboundedPolytopeError("polytope is unbounded; clip it to a bounding box first")
    found = []
    for rows in itertools.combinations(range(p.A.shape[0]), m):
        As = p.A[list(rows)]
        if abs(np.linalg.det(As)) < 1e-12:
            continue
        v = np.linalg.solve(As, p.b[list(rows)])
        if np.all(p.A @ v - p.b <= VERTEX_TOL):
            found.append(v)
    if not found:
        return np.zeros((0, m))
    pts = np.array(found)
    order = np.lexsort(pts.T[::-1])
    return _dedup(pts[order])


def contains(p: InputPolytope, u, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    u = np.asarray(u, dtype=float).reshape(p.m)
    return bool(np.all(p.A @ u <= p.b + tol))


def clip_to_box(p: InputPolytope, radius: float) -> InputPolytope:
    """Intersect with ``[-radius, radius]^m``, making any polytope bounded."""
    eye = np.eye(p.m)
    A = np.vstack([p.A, eye, -eye])
    b = np.concatenate([p.b, np.full(2 * p.m, float(radius))])
    return InputPolytope(A, b)
