"""First-order, sample-based view of point-wise feasibility in state space.

The one-step reachable set is approximated by forward-Euler steps from the
current state under sampled admissible inputs (every vertex plus uniform
interior points).  The barrier superlevel sets use the left rectangle rule
for the decay integral.  Both approximations are first order in ``dt``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import AffineSystem, ClassKappaFunction, ScalarStateFunction
from .polytope import PolytopeLike, resolve

MEMBERSHIP_TOL = 1e-9

MOVING_AWAY = "moving_away"
MOVING_AROUND = "moving_around"
MOVING_CLOSE_FEASIBLE = "moving_close_feasible"
MOVING_CLOSE_INFEASIBLE = "moving_close_infeasible"


@dataclass(frozen=True)
class ReachSample:
    x_next: np.ndarray
    u_used: np.ndarray
    dt: float


def _sample_inputs(poly, n_samples, rng):
    V = poly.with_vertices().vertices
    extra = n_samples - V.shape[0]
    if extra <= 0:
        return V
    lo, hi = V.min(axis=0), V.max(axis=0)
    pts = []
    while len(pts) < extra:
        u = rng.uniform(lo, hi)
        if poly.contains(u, 1e-12):
            pts.append(u)
    return np.vstack([V, np.array(pts)])


def sample_reachable(sys: AffineSystem, uadm: PolytopeLike, x, dt: float, n_samples: int,
                     rng: np.random.Generator | None = None) -> list[ReachSample]:
    """Euler images of ``x`` under the polytope's vertices and random interior inputs.

    At least every vertex is used even when ``n_samples`` is smaller.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(0) if rng is None else rng
    x = np.asarray(x, dtype=float)
    f, g = sys.f(x), sys.g(x)
    inputs = _sample_inputs(resolve(uadm, x), n_samples, rng)
    return [ReachSample(x + dt * (f + g @ u), u, dt) for u in inputs]


def scbf_membership(h: ScalarStateFunction, alpha: ClassKappaFunction, x_source, x_candidate,
                    dt: float) -> bool:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    hs = h(x_source)
    threshold = hs - dt * alpha(hs) if dt > 0 else hs
    return h(x_candidate) >= threshold - MEMBERSHIP_TOL


def classify_scenario(sys: AffineSystem, h: ScalarStateFunction, uadm: PolytopeLike,
                      alpha: ClassKappaFunction, x, dt: float, n_samples: int,
                      rng: np.random.Generator | None = None) -> str:
    samples = sample_reachable(sys, uadm, x, dt, n_samples, rng)
    inside = [scbf_membership(h, alpha, x, s.x_next, 0.0) for s in samples]
    if all(inside):
        return MOVING_AWAY
    if any(inside):
        return MOVING_AROUND
    if any(scbf_membership(h, alpha, x, s.x_next, dt) for s in samples):
        return MOVING_CLOSE_FEASIBLE
    return MOVING_CLOSE_INFEASIBLE
