"""Control-affine systems, scalar state functions and Lie derivatives.

A system ``xdot = f(x) + g(x) u`` is described by its drift ``f`` and
actuation ``g``.  Barrier and Lyapunov functions are both
:class:`ScalarStateFunction` objects carrying an analytic gradient, which
:func:`check_gradient` verifies against central differences.  Only one
continuous derivative is required of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class AffineSystem:
    n: int
    m: int
    drift: Callable[[np.ndarray], np.ndarray]
    actuation: Callable[[np.ndarray], np.ndarray]
    constant_actuation: bool = False  # g does not depend on x; lets integrators hoist g(x) u

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"dimensions must be positive, got n={self.n}, m={self.m}")

    def _state(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected state of length {self.n}, got shape {x.shape}")
        return x

    def f(self, x) -> np.ndarray:
        out = np.asarray(self.drift(self._state(x)), dtype=float)
        if out.shape != (self.n,):
            raise ValueError(f"drift returned shape {out.shape}, expected ({self.n},)")
        return out

    def g(self, x) -> np.ndarray:
        out = np.asarray(self.actuation(self._state(x)), dtype=float).reshape(self.n, -1)
        if out.shape != (self.n, self.m):
            raise ValueError(f"actuation returned shape {out.shape}, expected ({self.n}, {self.m})")
        return out

    def xdot(self, x, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(self.m)
        return self.f(x) + self.g(x) @ u

    def rate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Unchecked ``f(x) + g(x) u`` for inner integration loops."""
        return self.drift(x) + self.actuation(x) @ u


@dataclass(frozen=True)
class ScalarStateFunction:
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __call__(self, x) -> float:
        return float(self.value(np.asarray(x, dtype=float)))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.gradient(x), dtype=float).reshape(x.shape)


def constant_function(c: float = 0.0) -> ScalarStateFunction:
    return ScalarStateFunction(lambda x: c, lambda x: np.zeros_like(x), name="constant")


@dataclass(frozen=True)
class ClassKappaFunction:
    """A class-K (``extended=False``) or extended class-K_inf function.

    Build with :meth:`linear` or :meth:`custom`; both validate the anchor
    ``k(0) = 0`` and strict monotonicity on a 100-point grid.
    """

    kind: str
    coefficient: float = 1.0
    evaluator: Callable[[float], float] | None = None
    extended: bool = True

    def __post_init__(self):
        if self.kind == "linear":
            if not self.coefficient > 0:
                raise ValueError(f"linear class-K coefficient must be positive, got {self.coefficient}")
        elif self.kind == "custom":
            if self.evaluator is None:
                raise ValueError("custom class-K function needs an evaluator")
            if self.evaluator(0.0) != 0.0:
                raise ValueError("class-K function must vanish at zero")
            grid = np.linspace(-10.0 if self.extended else 0.0, 10.0, 100)
            vals = np.array([self.evaluator(float(s)) for s in grid])
            if np.any(np.diff(vals) <= 0):
                raise ValueError("class-K function must be strictly increasing")
        else:
            raise ValueError(f"unknown class-K kind {self.kind!r}")

    @classmethod
    def linear(cls, coefficient: float, extended: bool = True) -> "ClassKappaFunction":
        return cls("linear", float(coefficient), extended=extended)

    @classmethod
    def custom(cls, evaluator: Callable[[float], float], extended: bool = True) -> "ClassKappaFunction":
        return cls("custom", evaluator=evaluator, extended=extended)

    def __call__(self, s: float) -> float:
        return evaluate_kappa(self, s)


def evaluate_kappa(k: ClassKappaFunction, s: float) -> float:
    if not k.extended and s < 0:
        raise ValueError(f"class-K function evaluated at negative argument {s}")
    if k.kind == "linear":
        return k.coefficient * s
    return float(k.evaluator(s))


def lie_derivatives(sys: AffineSystem, fun: ScalarStateFunction, x) -> tuple[float, np.ndarray]:
    """Return ``(L_f fun(x), L_g fun(x))`` with ``L_g`` of length ``m``."""
    grad = fun.grad(sys._state(x))
    return float(grad @ sys.f(x)), grad @ sys.g(x)


def check_gradient(fun: ScalarStateFunction, x, eps: float = 1e-6) -> float:
    """Max over coordinates of ``|analytic - central| / max(1, |analytic|)``.

    The step for coordinate ``i`` is ``eps * max(1, |x_i|)``, and the quotient
    uses the step actually representable in floating point.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    analytic = fun.grad(x)
    err = 0.0
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        step = eps * max(1.0, abs(x[i]))
        xp[i] += step
        xm[i] -= step
        fd = (fun(xp) - fun(xm)) / (xp[i] - xm[i])
        err = max(err, abs(analytic[i] - fd) / max(1.0, abs(analytic[i])))
    return err
