"""Independent brute-force references used by the test-suite."""

import itertools

import numpy as np


def qp_by_enumeration(Q, c, A, b, tol=1e-9):
    """Minimize 1/2 z'Qz + c'z s.t. Az <= b by trying every working set.

    Each subset of at most ``d`` rows is treated as equalities and its KKT
    system solved directly; the best feasible point wins.  Returns
    ``(objective, z)`` or ``None`` when no candidate is feasible.
    """
    Q = np.atleast_2d(np.asarray(Q, float))
    c = np.asarray(c, float)
    A = np.asarray(A, float).reshape(-1, len(c))
    b = np.asarray(b, float)
    d, k = len(c), len(b)
    best = None
    for size in range(min(d, k) + 1):
        for S in itertools.combinations(range(k), size):
            S = list(S)
            As = A[S]
            kkt = np.block([[Q, As.T], [As, np.zeros((size, size))]])
            rhs = np.concatenate([-c, b[S]])
            if np.linalg.cond(kkt) > 1e12:  # dependent rows: not a vertex
                continue
            try:
                sol = np.linalg.solve(kkt, rhs)
                for _ in range(2):  # iterative refinement for near-parallel rows
                    sol = sol + np.linalg.solve(kkt, rhs - kkt @ sol)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(sol)):
                continue
            z = sol[:d]
            if np.all(A @ z - b <= tol * np.maximum(1.0, np.abs(b))):
                obj = 0.5 * z @ Q @ z + c @ z
                if best is None or obj < best[0]:
                    best = (float(obj), z)
    return best


def grid_minimize(cost, feasible, axes):
    """Exhaustive search of ``cost`` over the feasible points of a grid."""
    best = None
    for point in itertools.product(*axes):
        point = np.array(point)
        if feasible(point):
            val = cost(point)
            if best is None or val < best[0]:
                best = (val, point)
    return best

