"""CBF-QP, CLF-CBF-QP and their optimal-decay variants.

Every controller assembles a QP over the stacked decision vector
``(u, delta?, omega?)``, solves it with :mod:`odcbf.qp` and reports which of
the barrier / Lyapunov rows ended up in the active set.

Before solving, variables are rescaled to give the cost a unit diagonal and
each constraint row is divided by its infinity norm.  Neither operation
changes the minimizer; both keep the solver well conditioned when forces of
order 1e3 N meet decay penalties of order 1e8.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import AffineSystem, ClassKappaFunction, ScalarStateFunction, lie_derivatives
from .polytope import PolytopeLike, resolve
from .qp import INFEASIBLE, OPTIMAL, QpProblem, QpSolution, solve

KINDS = ("cbf_qp", "clf_cbf_qp", "od_cbf_qp", "od_clf_cbf_qp")


def _zero_nominal(x):
    return None


@dataclass(frozen=True)
class ControllerConfig:
    """Controller hyperparameters.

    ``H`` weights the input in every cost (``None`` means identity).
    ``nominal`` returns ``k(x)`` for the CBF-QP variants; the default is the
    zero input.
    """

    alpha: ClassKappaFunction = field(default_factory=lambda: ClassKappaFunction.linear(1.0))
    gamma: ClassKappaFunction = field(default_factory=lambda: ClassKappaFunction.linear(1.0, extended=False))
    p: float = 1.0
    p_omega: float = 1e8
    omega0: float = 1.0
    H: np.ndarray | None = None
    nominal: Callable[[np.ndarray], np.ndarray | None] = _zero_nominal

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("p must be positive")
        if not self.p_omega > 0:
            raise ValueError("p_omega must be positive")
        if self.H is not None:
            H = np.atleast_2d(np.asarray(self.H, dtype=float))
            if not np.allclose(H, H.T, rtol=0, atol=1e-12 * max(1.0, np.abs(H).max())):
                raise ValueError("H must be symmetric")
            if np.linalg.eigvalsh(H).min() <= 0:
                raise ValueError("H must be positive definite")
            object.__setattr__(self, "H", H)

    def input_weight(self, m: int) -> np.ndarray:
        if self.H is None:
            return np.eye(m)
        if self.H.shape != (m, m):
            raise ValueError(f"H has shape {self.H.shape}, expected ({m}, {m})")
        return self.H

    def nominal_input(self, x, m: int) -> np.ndarray:
        k = self.nominal(x)
        return np.zeros(m) if k is None else np.asarray(k, dtype=float).reshape(m)


@dataclass(frozen=True)
class ControlResult:
    status: str
    u: np.ndarray | None
    delta: float | None = None
    omega: float | None = None
    cbf_active: bool = False
    clf_active: bool = False
    qp: QpSolution | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _solve(sys, h, V, uadm, cfg, x, *, clf, decay, track_nominal):
    x = np.asarray(x, dtype=float)
    m = sys.m
    poly = resolve(uadm, x)
    H = cfg.input_weight(m)
    nd = m + int(clf) + int(decay)
    i_delta = m if clf else None
    i_omega = nd - 1 if decay else None

    Q = np.zeros((nd, nd))
    c = np.zeros(nd)
    Q[:m, :m] = H
    if track_nominal:
        c[:m] = -H @ cfg.nominal_input(x, m)
    if clf:
        Q[i_delta, i_delta] = 2.0 * cfg.p
    if decay:
        Q[i_omega, i_omega] = 2.0 * cfg.p_omega
        c[i_omega] = -2.0 * cfg.p_omega * cfg.omega0

    n_poly = poly.A.shape[0]
    A = np.zeros((int(clf) + 1 + n_poly, nd))
    b = np.empty(A.shape[0])
    clf_row = None
    if clf:
        lfv, lgv = lie_derivatives(sys, V, x)
        clf_row = 0
        A[0, :m] = lgv
        A[0, i_delta] = -1.0
        b[0] = -cfg.gamma(V(x)) - lfv
    lfh, lgh = lie_derivatives(sys, h, x)
    ah = cfg.alpha(h(x))
    cbf_row = int(clf)
    A[cbf_row, :m] = -lgh
    if decay:
        A[cbf_row, i_omega] = -ah
        b[cbf_row] = lfh
    else:
        b[cbf_row] = lfh + ah
    A[cbf_row + 1:, :m] = poly.A
    b[cbf_row + 1:] = poly.b

    scale = 1.0 / np.sqrt(np.diag(Q))
    Qs = Q * np.outer(scale, scale)
    cs = c * scale
    As = A * scale
    norms = np.abs(As).max(axis=1)
    norms[norms == 0] = 1.0
    As /= norms[:, None]
    bs = b / norms

    sol = solve(QpProblem(Qs, cs, As, bs))
    if not sol.optimal:
        return ControlResult(INFEASIBLE, None, qp=sol)
    z = sol.z * scale
    active = set(sol.active_set)
    return ControlResult(
        OPTIMAL,
        z[:m],
        delta=float(z[i_delta]) if clf else None,
        omega=float(z[i_omega]) if decay else None,
        cbf_active=cbf_row in active,
        clf_active=clf_row in active if clf else False,
        qp=sol,
    )


def cbf_qp(sys: AffineSystem, h: ScalarStateFunction, uadm: PolytopeLike,
           cfg: ControllerConfig, x) -> ControlResult:
    """Minimally modify ``k(x)`` subject to the barrier and input constraints."""
    return _solve(sys, h, None, uadm, cfg, x, clf=False, decay=False, track_nominal=True)


def clf_cbf_qp(sys: AffineSystem, h: ScalarStateFunction, V: ScalarStateFunction,
               uadm: PolytopeLike, cfg: ControllerConfig, x) -> ControlResult:
    """Relaxed Lyapunov decrease with hard barrier and input constraints."""
    return _solve(sys, h, V, uadm, cfg, x, clf=True, decay=False, track_nominal=False)


def optimal_decay_cbf_qp(sys: AffineSystem, h: ScalarStateFunction, uadm: PolytopeLike,
                         cfg: ControllerConfig, x) -> ControlResult:
    """CBF-QP with the decay multiplier ``omega`` as a free decision variable.

    Feasible whenever ``h(x) > 0`` and the input set is non-empty.
    """
    return _solve(sys, h, None, uadm, cfg, x, clf=False, decay=True, track_nominal=True)


def optimal_decay_clf_cbf_qp(sys: AffineSystem, h: ScalarStateFunction, V: ScalarStateFunction,
                             uadm: PolytopeLike, cfg: ControllerConfig, x) -> ControlResult:
    return _solve(sys, h, V, uadm, cfg, x, clf=True, decay=True, track_nominal=False)


def make_controller(kind: str, sys: AffineSystem, h: ScalarStateFunction,
                    V: ScalarStateFunction | None, uadm: PolytopeLike,
                    cfg: ControllerConfig) -> Callable[[np.ndarray], ControlResult]:
    """Bind everything but the state, for use with the simulator."""
    if kind == "cbf_qp":
        return lambda x: cbf_qp(sys, h, uadm, cfg, x)
    if kind == "od_cbf_qp":
        return lambda x: optimal_decay_cbf_qp(sys, h, uadm, cfg, x)
    if V is None and kind in ("clf_cbf_qp", "od_clf_cbf_qp"):
        raise ValueError(f"{kind} needs a Lyapunov function")
    if kind == "clf_cbf_qp":
        return lambda x: clf_cbf_qp(sys, h, V, uadm, cfg, x)
    if kind == "od_clf_cbf_qp":
        return lambda x: optimal_decay_clf_cbf_qp(sys, h, V, uadm, cfg, x)
    raise ValueError(f"unknown controller kind {kind!r}; expected one of {KINDS}")
