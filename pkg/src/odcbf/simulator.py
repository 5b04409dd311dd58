"""Closed-loop simulation with a zero-order-hold controller.

The controller is queried at ``control_hz``; its input is held constant over
the control period while the dynamics are integrated with classical RK4
using ``integrator_substeps`` steps.  Quantities that a controller does not
produce (``omega`` for the original QPs, ``delta`` without a Lyapunov
function, inputs after an infeasible solve) are stored as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .controllers import ControlResult
from .dynamics import AffineSystem, ScalarStateFunction
from .qp import INFEASIBLE, NumericalFailure

TERMINATE = "terminate"
HOLD_LAST_INPUT = "hold_last_input"


@dataclass(frozen=True)
class SimConfig:
    control_hz: float = 100.0
    horizon: float = 20.0
    integrator_substeps: int = 4
    on_infeasible: str = TERMINATE
    seed: int = 0

    def __post_init__(self):
        if not self.control_hz > 0:
            raise ValueError("control_hz must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.integrator_substeps < 1:
            raise ValueError("integrator_substeps must be at least 1")
        if self.on_infeasible not in (TERMINATE, HOLD_LAST_INPUT):
            raise ValueError(f"on_infeasible must be {TERMINATE!r} or {HOLD_LAST_INPUT!r}")

    @property
    def dt(self) -> float:
        return 1.0 / self.control_hz

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon * self.control_hz))


@dataclass
class SimulationTrace:
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    h_values: np.ndarray
    v_values: np.ndarray
    omega_values: np.ndarray
    delta_values: np.ndarray
    statuses: list[str]
    final_state: np.ndarray
    first_infeasible_time: float | None = None
    first_unsafe_time: float | None = None
    error: str | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def min_h(self) -> float:
        return float(np.nanmin(self.h_values)) if len(self.h_values) else float("nan")


def rk4_step(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float, substeps: int = 1) -> np.ndarray:
    hstep = dt / substeps
    half, sixth = 0.5 * hstep, hstep / 6.0
    for _ in range(substeps):
        k1 = fun(x)
        k2 = fun(x + half * k1)
        k3 = fun(x + half * k2)
        k4 = fun(x + hstep * k3)
        x = x + sixth * (k1 + 2.0 * (k2 + k3) + k4)
    return x


def run(sys: AffineSystem, controller: Callable[[np.ndarray], ControlResult], x0, cfg: SimConfig,
        h: ScalarStateFunction | None = None, V: ScalarStateFunction | None = None) -> SimulationTrace:
    """Simulate the closed loop from ``x0`` for ``cfg.horizon`` seconds.

    ``h`` and ``V`` are only used for bookkeeping; without ``h`` no safety
    events are recorded.  A :class:`NumericalFailure` from the controller
    ends the run early and is reported in ``trace.error``.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (sys.n,):
        raise ValueError(f"initial state must have length {sys.n}")
    sys.xdot(x, np.zeros(sys.m))  # shape checks once, then the unchecked path
    n, dt = cfg.n_steps, cfg.dt
    nan = float("nan")
    times, states, inputs = [], [], []
    hs, vs, ws, ds, statuses = [], [], [], [], []
    first_inf = first_unsafe = None
    error = None
    last_u = np.zeros(sys.m)

    for k in range(n):
        t = k / cfg.control_hz
        hx = h(x) if h is not None else nan
        if h is not None and first_unsafe is None and hx < 0:
            first_unsafe = t
        times.append(t)
        states.append(x.copy())
        hs.append(hx)
        vs.append(V(x) if V is not None else nan)
        try:
            res = controller(x)
        except NumericalFailure as exc:
            error = f"numerical failure at t={t:.6g}: {exc}"
            inputs.append(np.full(sys.m, nan))
            ws.append(nan)
            ds.append(nan)
            statuses.append("numerical_failure")
            break
        statuses.append(res.status)
        ws.append(nan if res.omega is None else res.omega)
        ds.append(nan if res.delta is None else res.delta)
        if res.status == INFEASIBLE:
            if first_inf is None:
                first_inf = t
            inputs.append(np.full(sys.m, nan))
            if cfg.on_infeasible == TERMINATE:
                break
            u = last_u
        else:
            u = np.asarray(res.u, dtype=float)
            inputs.append(u.copy())
            last_u = u
        if sys.constant_actuation:
            gu = sys.actuation(x) @ u
            x = rk4_step(lambda s: sys.drift(s) + gu, x, dt, cfg.integrator_substeps)
        else:
            x = rk4_step(lambda s: sys.rate(s, u), x, dt, cfg.integrator_substeps)

    return SimulationTrace(
        times=np.array(times),
        states=np.array(states).reshape(-1, sys.n),
        inputs=np.array(inputs).reshape(-1, sys.m),
        h_values=np.array(hs),
        v_values=np.array(vs),
        omega_values=np.array(ws),
        delta_values=np.array(ds),
        statuses=statuses,
        final_state=x,
        first_infeasible_time=first_inf,
        first_unsafe_time=first_unsafe,
        error=error,
    )


@dataclass(frozen=True)
class TraceComparison:
    input_diff: float
    state_diff: float
    h_diff: float
    n_common: int
    same_length: bool


def _supdiff(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b))
    # a field absent in both traces is not a difference
    both_absent = np.isnan(a) & np.isnan(b)
    d = np.where(both_absent, 0.0, d)
    return float(np.nanmax(np.where(np.isnan(d), np.inf, d))) if d.size else 0.0


def compare_traces(a: SimulationTrace, b: SimulationTrace) -> TraceComparison:
    """Sup-norm differences over the common prefix of two traces."""
    n = min(len(a), len(b))
    if not np.array_equal(a.times[:n], b.times[:n]):
        raise ValueError("traces do not share a time grid")
    return TraceComparison(
        input_diff=_supdiff(a.inputs[:n], b.inputs[:n]),
        state_diff=_supdiff(a.states[:n], b.states[:n]),
        h_diff=_supdiff(a.h_values[:n], b.h_values[:n]),
        n_common=n,
        same_length=len(a) == len(b),
    )
