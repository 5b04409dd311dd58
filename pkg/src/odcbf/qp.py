"""Small dense convex quadratic programs.

Solves

    minimize    1/2 z^T Q z + c^T z
    subject to  A z <= b

for positive definite ``Q`` with a dual active-set method (Goldfarb-Idnani).
The method starts at the unconstrained minimizer and adds violated
constraints one at a time, so it needs no feasible starting point and, when
the constraints are inconsistent, terminates with a Farkas certificate
``y >= 0, A^T y = 0, b^T y < 0``.

The problems produced by the controllers have at most three variables and a
handful of rows; the implementation favours exactness and determinism over
scalability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

FEAS_TOL = 1e-9
_DEP_TOL = 1e-9
_STEP_TOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """Raised when a cost matrix is not symmetric positive definite."""


class NumericalFailure(RuntimeError):
    """Raised when the active-set iteration breaks down or cycles."""


@dataclass(frozen=True)
class QpProblem:
    """Dense convex QP ``min 1/2 z'Qz + c'z  s.t.  A z <= b``."""

    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    _whiten: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        d = Q.shape[0]
        if Q.shape != (d, d):
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        c = np.asarray(self.c, dtype=float).reshape(d)
        A = np.asarray(self.A, dtype=float).reshape(-1, d)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        diag = Q.diagonal()
        if d == 1 or not np.any(Q[~np.eye(d, dtype=bool)]):
            if not np.all(diag > 0):
                raise NotPositiveDefiniteError("Q is not positive definite")
            Li = np.diag(1.0 / np.sqrt(diag))
        else:
            scale = max(1.0, float(np.abs(Q).max()))
            if np.abs(Q - Q.T).max() > 1e-12 * scale:
                raise NotPositiveDefiniteError("Q is not symmetric")
            try:
                L = np.linalg.cholesky(Q)
            except np.linalg.LinAlgError as exc:
                raise NotPositiveDefiniteError("Q is not positive definite") from exc
            Li = np.linalg.inv(L)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_whiten", Li)

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]

    def objective(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.Q @ z + self.c @ z)


@dataclass(frozen=True)
class QpSolution:
    """Result of :func:`solve`.

    ``z``, ``objective`` and ``multipliers`` are ``None`` when infeasible;
    ``certificate`` is ``None`` when optimal.
    """

    status: str
    z: np.ndarray | None
    active_set: tuple[int, ...]
    objective: float | None
    multipliers: np.ndarray | None = None
    certificate: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: np.ndarray | None = None
    certificate: np.ndarray | None = None


def _project(At, b, w0, W):
    """Minimizer of ``1/2 |w - w0|^2`` with the rows ``W`` held as equalities.

    Returns ``(w, lam)``, one refinement step included.
    """
    N = At[W]
    G = N @ N.T
    if len(W) == 1:
        g = float(G[0, 0])
        if not g > 0:
            raise np.linalg.LinAlgError("zero row")
        sol = lambda r: r / g
    elif len(W) == 2:
        det = float(G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0])
        if det == 0.0:
            raise np.linalg.LinAlgError("singular working set")
        Gi = np.array([[G[1, 1], -G[0, 1]], [-G[1, 0], G[0, 0]]]) / det
        sol = lambda r: Gi @ r
    else:
        sol = lambda r: np.linalg.solve(G, r)
    lam = sol(N @ w0 - b[W])
    w = w0 - N.T @ lam
    corr = sol(b[W] - N @ w)
    return w + N.T @ corr, lam - corr


def _polish(At, b, w0, w, mu, W, b_tol):
    """Recompute the final minimizer directly from its working set.

    Kept only if the result stays primal and dual feasible.
    """
    try:
        wp, lam = _project(At, b, w0, W)
    except np.linalg.LinAlgError:
        return w, mu
    if not np.isfinite(wp).all() or (At @ wp > b_tol).any():
        return w, mu
    if lam.min() < -FEAS_TOL * max(1.0, float(np.abs(lam).max())):
        return w, mu
    mu = mu.copy()
    mu[W] = lam
    return wp, mu


def solve(problem: QpProblem, max_iter: int | None = None) -> QpSolution:
    """Solve ``problem`` to global optimality or prove it infeasible.

    Works in the coordinates ``w = L^T z`` where ``Q = L L^T``, so the cost is
    a plain squared distance and linear dependence of a new row on the
    working set shows up as a vanishing projection residual.

    Ties between equally violated constraints go to the lowest index.
    Raises :class:`NumericalFailure` if the iteration count exceeds
    ``max_iter`` (default ``10 * (k + d)``) or a reduced system becomes
    singular.
    """
    c, b = problem.c, problem.b
    d, k = problem.dim, problem.n_constraints
    Li = problem._whiten
    w0 = -(Li @ c)
    if k == 0:
        z = Li.T @ w0
        return QpSolution(OPTIMAL, z, (), problem.objective(z), multipliers=np.zeros(0))
    At = problem.A @ Li.T
    b_tol = b + FEAS_TOL * np.maximum(1.0, np.abs(b))
    if max_iter is None:
        max_iter = 10 * (k + d)

    w = w0
    W: list[int] = []
    mu = np.zeros(k)
    it = 0
    while True:
        viol = At @ w - b_tol
        # working-set rows hold with equality; rounding must not re-select them
        if W:
            viol[W] = -np.inf
        p = int(viol.argmax())
        if viol[p] <= 0.0:
            break
        ap = At[p]
        anorm = float(np.sqrt(ap @ ap))
        # Inner loop: keep stepping until constraint p joins the working set.
        while True:
            it += 1
            if it > max_iter:
                raise NumericalFailure(f"active-set iteration limit {max_iter} exceeded")
            if W:
                N = At[W]
                if len(W) == 1:
                    nn = float(N[0] @ N[0])
                    if not nn > 0:
                        raise NumericalFailure("singular working-set system")
                    r = np.array([float(N[0] @ ap) / nn])
                elif len(W) == 2:
                    G = N @ N.T
                    det = float(G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0])
                    if det == 0.0:
                        raise NumericalFailure("singular working-set system")
                    q = N @ ap
                    r = np.array([G[1, 1] * q[0] - G[0, 1] * q[1], G[0, 0] * q[1] - G[1, 0] * q[0]]) / det
                else:
                    try:
                        r = np.linalg.solve(N @ N.T, N @ ap)
                    except np.linalg.LinAlgError as exc:
                        raise NumericalFailure("singular working-set system") from exc
                resid = ap - N.T @ r
                rlist = r.tolist()
            else:
                resid = ap
                rlist = []
            curv = float(resid @ resid)
            full = len(W) < d and np.sqrt(curv) > _DEP_TOL * anorm
            t2 = float(ap @ w - b[p]) / curv if full else np.inf

            t1, block = np.inf, -1
            rtol = _STEP_TOL * max([1.0] + [abs(v) for v in rlist])
            for j, (wj, rj) in enumerate(zip(W, rlist)):
                if rj > rtol:
                    tj = mu[wj] / rj
                    if tj < t1:
                        t1, block = tj, j

            if not full and block < 0:
                # bT y equals minus the violation of p when the working set
                # holds exactly; otherwise the verdict is drift on a dependent
                # row, so re-project and look again
                by = float(b[p]) - sum(rj * float(b[wj]) for wj, rj in zip(W, rlist))
                if W and not by < -FEAS_TOL * max(1.0, abs(float(b[p]))):
                    try:
                        w, _ = _project(At, b, w0, W)
                    except np.linalg.LinAlgError as exc:
                        raise NumericalFailure("singular working-set system") from exc
                    break
                y = np.zeros(k)
                y[p] = 1.0
                for wj, rj in zip(W, rlist):
                    y[wj] = max(-rj, 0.0)
                y /= y.sum()
                return QpSolution(INFEASIBLE, None, tuple(sorted(W + [p])), None,
                                  certificate=y, iterations=it)

            t = min(t1, t2)
            if full:
                w = w - t * resid
            for wj, rj in zip(W, rlist):
                mu[wj] -= t * rj
            mu[p] += t
            if t2 <= t1:
                W.append(p)
                break
            dropped = W.pop(block)
            mu[dropped] = 0.0

    # a single full step is already an exact projection; longer paths
    # accumulate rounding and are recomputed from the final working set
    if W and it > 1:
        w, mu = _polish(At, b, w0, w, mu, W, b_tol)
    for wj in W:
        if mu[wj] < 0.0:
            mu[wj] = 0.0
    z = Li.T @ w
    return QpSolution(OPTIMAL, z, tuple(sorted(W)), problem.objective(z),
                      multipliers=mu, iterations=it)


def solve_feasibility(A, b, dim: int | None = None) -> FeasibilityResult:
    """Decide whether ``{z : A z <= b}`` is empty.

    Solves the least-distance problem ``min 1/2 |z|^2`` over the set, so a
    feasible answer carries the minimum-norm point as its witness and an
    infeasible one carries a Farkas certificate.
    """
    A = np.asarray(A, dtype=float)
    if dim is None:
        if A.ndim != 2 or A.shape[1] == 0:
            raise ValueError("dim is required when A is empty")
        dim = A.shape[1]
    A = A.reshape(-1, dim)
    b = np.asarray(b, dtype=float).reshape(-1)
    sol = solve(QpProblem(np.eye(dim), np.zeros(dim), A, b))
    if sol.optimal:
        return FeasibilityResult(True, witness=sol.z)
    return FeasibilityResult(False, certificate=sol.certificate)


def is_farkas_certificate(A, b, y, tol: float = 1e-8) -> bool:
    """Check ``y >= 0``, ``|A^T y| <= tol`` and ``b^T y < 0``."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(y < 0):
        return False
    return bool(np.abs(A.T @ y).max(initial=0.0) <= tol and b @ y < 0)
