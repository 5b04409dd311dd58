"""Adaptive cruise control: point-mass ego vehicle behind a constant-speed leader.

State ``x = (x1, x2, x3)``: ego position (m), ego speed (m/s) and gap to the
lead vehicle (m).  The input is the wheel force (N).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .dynamics import AffineSystem, ClassKappaFunction, ScalarStateFunction
from .polytope import InputPolytope, from_box


@dataclass(frozen=True)
class AccParams:
    m: float = 1650.0
    v_l: float = 16.0
    v_d: float = 30.0
    f0: float = 0.1
    f1: float = 5.0
    f2: float = 0.25
    c_d: float = -0.25
    c_a: float = 0.25
    g: float = 9.81
    headway: float = 1.8

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass must be positive")
        if not self.c_d <= self.c_a:
            raise ValueError("c_d must not exceed c_a")
        if self.f2 < 0:
            raise ValueError("f2 must be non-negative")

    def drag(self, v: float) -> float:
        return self.f0 + self.f1 * v + self.f2 * v * v

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AccParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown ACC parameters: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


def acc_system(p: AccParams = AccParams()) -> AffineSystem:
    act = np.array([[0.0], [1.0 / p.m], [0.0]])
    m, v_l, f0, f1, f2 = p.m, p.v_l, p.f0, p.f1, p.f2

    def drift(x):
        v = float(x[1])
        return np.array((v, -(f0 + f1 * v + f2 * v * v) / m, v_l - v))

    return AffineSystem(3, 1, drift, lambda x: act, constant_actuation=True)


def acc_clf(p: AccParams = AccParams()) -> ScalarStateFunction:
    """Speed-tracking Lyapunov function ``(x2 - v_d)^2``."""
    return ScalarStateFunction(
        lambda x: (x[1] - p.v_d) ** 2,
        lambda x: np.array([0.0, 2.0 * (x[1] - p.v_d), 0.0]),
        name="V",
    )


def acc_cbf(p: AccParams = AccParams()) -> ScalarStateFunction:
    """Time-headway barrier ``x3 - headway * x2``."""
    grad = np.array([0.0, -p.headway, 1.0])
    return ScalarStateFunction(
        lambda x: x[2] - p.headway * x[1],
        lambda x: grad,
        name="h",
    )


def acc_input_box(p: AccParams = AccParams()) -> InputPolytope:
    return from_box([p.c_d * p.m * p.g], [p.c_a * p.m * p.g])


def acc_controller_defaults(p: AccParams = AccParams()) -> dict:
    """Keyword arguments for :class:`ControllerConfig` used in the case study.

    The input weight ``1/m^2`` prices acceleration rather than force so the
    decay penalty ``p_omega = 1e8`` dominates the trade-off.
    """
    return dict(
        alpha=ClassKappaFunction.linear(0.5),
        gamma=ClassKappaFunction.linear(1.0, extended=False),
        p=1.0,
        p_omega=1e8,
        omega0=1.0,
        H=np.array([[1.0 / p.m ** 2]]),
    )
