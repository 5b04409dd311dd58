"""Point-wise feasibility of the barrier constraint in input space.

At a state ``x`` the barrier constraint is the half-space
``U_cbf = {u : -L_g h u <= L_f h + alpha(h)}``.  It meets a bounded input
polytope iff it contains one of the polytope's vertices, so everything here
reduces to the vertex residuals ``-L_f h - L_g h v_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import AffineSystem, ClassKappaFunction, ScalarStateFunction, lie_derivatives
from .polytope import InputPolytope, PolytopeLike, UnboundedPolytopeError, clip_to_box, resolve

RESIDUAL_TOL = 1e-9

FEASIBLE_ANY_ALPHA = "feasible_any_alpha"
FEASIBLE_CURRENT_ALPHA = "feasible_current_alpha"
INFEASIBLE_CURRENT_ALPHA = "infeasible_current_alpha"


@dataclass(frozen=True)
class CbfHalfspace:
    """``a . u <= b``; ``vacuous``/``empty`` flag the degenerate ``a = 0`` cases."""

    a: np.ndarray
    b: float

    @property
    def degenerate(self) -> bool:
        return not np.any(self.a)

    @property
    def vacuous(self) -> bool:
        return self.degenerate and self.b >= -RESIDUAL_TOL

    @property
    def empty(self) -> bool:
        return self.degenerate and self.b < -RESIDUAL_TOL

    def contains(self, u, tol: float = RESIDUAL_TOL) -> bool:
        return bool(self.a @ np.asarray(u, dtype=float) <= self.b + tol)


@dataclass(frozen=True)
class FeasibilityReport:
    min_vertex_residual: float
    max_vertex_residual: float
    alpha_value: float
    classification: str
    confined: bool

    @property
    def feasible(self) -> bool:
        return self.classification != INFEASIBLE_CURRENT_ALPHA


def ucbf_halfspace(sys: AffineSystem, h: ScalarStateFunction, alpha: ClassKappaFunction, x) -> CbfHalfspace:
    lfh, lgh = lie_derivatives(sys, h, x)
    return CbfHalfspace(-lgh, lfh + alpha(h(x)))


def _vertices(uadm: PolytopeLike, x, clip: float | None) -> np.ndarray:
    poly = resolve(uadm, x)
    if poly.vertices is not None and poly.vertices.size:
        return poly.vertices
    try:
        return poly.with_vertices().vertices
    except UnboundedPolytopeError:
        if clip is None:
            raise UnboundedPolytopeError(
                "input set is unbounded; pass clip=<radius> to analyse a bounded approximation"
            ) from None
        return clip_to_box(poly, clip).with_vertices().vertices


def vertex_residuals(sys: AffineSystem, h: ScalarStateFunction, uadm: PolytopeLike, x,
                     clip: float | None = None) -> np.ndarray:
    """``-L_f h(x) - L_g h(x) v_i`` for every vertex ``v_i``."""
    V = _vertices(uadm, x, clip)
    if V.shape[0] == 0:
        raise ValueError("input set is empty")
    lfh, lgh = lie_derivatives(sys, h, x)
    return -lfh - V @ lgh


def vertex_feasibility(sys: AffineSystem, h: ScalarStateFunction, uadm: PolytopeLike,
                       alpha: ClassKappaFunction, x, clip: float | None = None) -> FeasibilityReport:
    res = vertex_residuals(sys, h, uadm, x, clip)
    lo, hi = float(res.min()), float(res.max())
    a = alpha(h(x))
    if lo <= RESIDUAL_TOL:
        label = FEASIBLE_ANY_ALPHA
    elif a >= lo - RESIDUAL_TOL:
        label = FEASIBLE_CURRENT_ALPHA
    else:
        label = INFEASIBLE_CURRENT_ALPHA
    return FeasibilityReport(lo, hi, a, label, confined=a < hi - RESIDUAL_TOL)


def minimal_feasible_alpha_value(sys: AffineSystem, h: ScalarStateFunction, uadm: PolytopeLike, x,
                                 clip: float | None = None) -> float:
    """Smallest ``alpha(h(x))`` that keeps the barrier constraint satisfiable."""
    return max(0.0, float(vertex_residuals(sys, h, uadm, x, clip).min()))


def omega_star(sys: AffineSystem, h: ScalarStateFunction, uadm: PolytopeLike,
               alpha: ClassKappaFunction, x, clip: float | None = None) -> float:
    """Decay multiplier chosen by the optimal-decay QPs as ``p_omega -> inf``.

    Equals ``sup_u (L_f h + L_g h u) / (-alpha(h))``, attained at a vertex;
    a supremum of exactly zero maps to ``0``.
    """
    hx = h(x)
    if hx <= 0:
        raise ValueError(f"omega* needs h(x) > 0, got {hx}")
    best = float(-vertex_residuals(sys, h, uadm, x, clip).min())
    if best == 0.0:
        return 0.0
    return best / -alpha(hx)
