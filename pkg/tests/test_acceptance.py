"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict; the lines are printed in the pytest
terminal summary and also when this file is run directly as a script.
"""

import dataclasses
import time

import numpy as np
import pytest

from conftest import Acc, random_safe_states
from odcbf.cli import EXIT_OK, main, preset_names
from odcbf.controllers import cbf_qp, clf_cbf_qp, make_controller, optimal_decay_cbf_qp, optimal_decay_clf_cbf_qp
from odcbf.dynamics import check_gradient
from odcbf.feasibility import INFEASIBLE_CURRENT_ALPHA, omega_star, ucbf_halfspace, vertex_feasibility
from odcbf.qp import INFEASIBLE, OPTIMAL, QpProblem, solve, solve_feasibility
from odcbf.reachability import MOVING_CLOSE_INFEASIBLE, classify_scenario
from odcbf.simulator import SimConfig, compare_traces, rk4_step, run
from oracles import qp_by_enumeration

SPEEDS_OK = (26.0, 28.0)
SPEEDS_BAD = (30.0, 32.0)
RESULTS: dict[int, str] = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def simulate(acc, kind, v0, x3=100.0, horizon=20.0, **overrides):
    cfg = dataclasses.replace(acc.cfg, **overrides)
    ctrl = make_controller(kind, acc.sys, acc.h, acc.V, acc.box, cfg)
    return run(acc.sys, ctrl, [0.0, v0, x3], SimConfig(horizon=horizon), h=acc.h, V=acc.V)


def timed(fn, repeats=2):
    """Best wall time over ``repeats`` calls after one short warm-up."""
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return out, best


def test_criterion_1_infeasibility_reproduction(acc):
    simulate(acc, "clf_cbf_qp", 26.0, horizon=0.1)  # warm-up
    traces, elapsed = timed(lambda: {v: simulate(acc, "clf_cbf_qp", v) for v in SPEEDS_OK + SPEEDS_BAD})
    onset = {v: tr.first_infeasible_time for v, tr in traces.items()}
    ok = (all(onset[v] is not None and np.isfinite(onset[v]) for v in SPEEDS_BAD)
          and all(onset[v] is None for v in SPEEDS_OK)
          and all(len(traces[v]) == 2000 for v in SPEEDS_OK)
          and elapsed < 1.0)
    record(1, ok, f"first infeasible times {onset}; runtime {elapsed:.2f} s (< 1 s)")


def test_criterion_2_optimal_decay_feasibility(acc):
    X = random_safe_states(np.random.default_rng(101), 1000)

    def workload():
        runs_ok, worst_h, n_opt = True, np.inf, 0
        for v in SPEEDS_OK + SPEEDS_BAD:
            tr = simulate(acc, "od_clf_cbf_qp", v)
            runs_ok &= tr.first_infeasible_time is None and len(tr) == 2000 and tr.min_h > 0
            runs_ok &= all(s == OPTIMAL for s in tr.statuses)
            worst_h = min(worst_h, tr.min_h)
        for x in X:
            n_opt += optimal_decay_cbf_qp(acc.sys, acc.h, acc.box, acc.cfg, x).optimal
            n_opt += optimal_decay_clf_cbf_qp(acc.sys, acc.h, acc.V, acc.box, acc.cfg, x).optimal
        return runs_ok, worst_h, n_opt

    (runs_ok, worst_h, n_opt), elapsed = timed(workload, repeats=1)
    ok = runs_ok and n_opt == 2000 and elapsed < 5.0
    record(2, ok, f"trajectories feasible {runs_ok}, min h {worst_h:.4g}; "
                  f"property suite {n_opt}/2000 optimal; runtime {elapsed:.2f} s (< 5 s)")


def test_criterion_3_equivalence_when_feasible(acc):
    input_diff, omega_dev = 0.0, 0.0
    for v in SPEEDS_OK:
        a = simulate(acc, "clf_cbf_qp", v)
        b = simulate(acc, "od_clf_cbf_qp", v)
        cmp = compare_traces(a, b)
        assert cmp.same_length
        input_diff = max(input_diff, cmp.input_diff)
        omega_dev = max(omega_dev, float(np.abs(b.omega_values - 1.0).max()))
    # states where the original controller has no solution, taken along the optimal-decay runs
    star_err, n_star = 0.0, 0
    for v in SPEEDS_BAD:
        tr = simulate(acc, "od_clf_cbf_qp", v)
        for x, w in zip(tr.states, tr.omega_values):
            if not clf_cbf_qp(acc.sys, acc.h, acc.V, acc.box, acc.cfg, x).optimal:
                ws = omega_star(acc.sys, acc.h, acc.box, acc.cfg.alpha, x)
                star_err = max(star_err, abs(w - ws) / abs(ws))
                n_star += 1
    checks = {
        "omega band": omega_dev <= 1e-4,
        "omega* match": n_star > 0 and star_err <= 1e-4,
        "input diff": input_diff <= 1e-3,
    }
    record(3, all(checks.values()),
           f"sup|u_od - u| {input_diff:.3g} N (<= 1e-3), max|omega - 1| {omega_dev:.2g} (<= 1e-4), "
           f"omega* rel err {star_err:.2g} over {n_star} states (<= 1e-4); failing: "
           f"{[k for k, v in checks.items() if not v] or 'none'}")


def test_criterion_4_hyperparameter_monotonicity(acc):
    by_omega0 = [simulate(acc, "od_clf_cbf_qp", 32.0, omega0=w).min_h for w in (1.0, 0.5, 0.1)]
    by_p = [simulate(acc, "od_clf_cbf_qp", 32.0, p_omega=p).min_h for p in (1e4, 1e6, 1e8)]
    ok = all(np.diff(by_omega0) >= 0) and all(np.diff(by_p) >= 0)
    record(4, ok, f"min h over omega0 1, 0.5, 0.1: {np.round(by_omega0, 6).tolist()}; "
                  f"over p_omega 1e4, 1e6, 1e8: {np.round(by_p, 6).tolist()}")


def test_criterion_5_unsafe_regime(acc):
    tr = simulate(acc, "od_clf_cbf_qp", 32.0, p_omega=1e2)
    t_unsafe = tr.first_unsafe_time
    positive = tr.h_values > 0
    all_optimal = all(s == OPTIMAL for s, pos in zip(tr.statuses, positive) if pos)
    ok = t_unsafe is not None and 2.5 <= t_unsafe <= 5.5 and all_optimal
    record(5, ok, f"first unsafe time {t_unsafe} s (in [2.5, 5.5]); all QPs optimal while h > 0: {all_optimal}")


def test_criterion_6_qp_oracle():
    rng = np.random.default_rng(202)
    worst, n_inf, bad = 0.0, 0, 0
    for _ in range(500):
        d, k = int(rng.integers(1, 3)), int(rng.integers(0, 7))
        M = rng.normal(size=(d, d))
        Q, c = M @ M.T + 0.1 * np.eye(d), rng.normal(size=d)
        A, b = rng.normal(size=(k, d)), rng.normal(size=k)
        sol = solve(QpProblem(Q, c, A, b))
        ref = qp_by_enumeration(Q, c, A, b)
        if ref is None:
            n_inf += 1
            y = sol.certificate
            good = (sol.status == INFEASIBLE and np.all(y >= 0)
                    and np.abs(A.T @ y).max() <= 1e-8 and b @ y < -1e-10)
            bad += not good
        elif sol.status != OPTIMAL:
            bad += 1
        else:
            worst = max(worst, abs(sol.objective - ref[0]))
    ok = bad == 0 and worst <= 1e-6 and n_inf > 0
    record(6, ok, f"500 instances, {n_inf} infeasible with certificates, {bad} mismatches, "
                  f"max |d objective| {worst:.2g} (<= 1e-6)")


def test_criterion_7_feasibility_consistency(acc):
    X = random_safe_states(np.random.default_rng(303), 500)
    # pull half of the states toward the barrier so every classification occurs
    X[::2, 2] = np.maximum(X[::2, 2] - 0.9 * (X[::2, 2] - 1.8 * X[::2, 1]), 1.8 * X[::2, 1] + 0.01)
    alpha = acc.cfg.alpha
    disagree, unconfined, active = 0, 0, 0
    labels = set()
    for x in X:
        rep = vertex_feasibility(acc.sys, acc.h, acc.box, alpha, x)
        labels.add(rep.classification)
        hs = ucbf_halfspace(acc.sys, acc.h, alpha, x)
        phase_one = solve_feasibility(np.vstack([hs.a, acc.box.A]), np.concatenate([[hs.b], acc.box.b])).feasible
        disagree += rep.feasible != phase_one
        if not rep.confined:
            unconfined += 1
            for res in (cbf_qp(acc.sys, acc.h, acc.box, acc.cfg, x),
                        clf_cbf_qp(acc.sys, acc.h, acc.V, acc.box, acc.cfg, x)):
                active += res.cbf_active
    ok = disagree == 0 and active == 0 and unconfined > 0 and len(labels) == 3
    record(7, ok, f"{disagree} Phase-I disagreements over 500 states; "
                  f"{unconfined} unconfined states, {active} with the barrier row active")


def test_criterion_8_reachability_consistency(acc):
    rng = np.random.default_rng(404)
    alpha = acc.cfg.alpha
    checked, disagree, infeasible = 0, 0, 0
    for x in random_safe_states(rng, 1000):
        rep = vertex_feasibility(acc.sys, acc.h, acc.box, alpha, x)
        if abs(rep.alpha_value - rep.min_vertex_residual) < 1e-3:
            continue  # too close to the decision boundary
        label = classify_scenario(acc.sys, acc.h, acc.box, alpha, x, 1e-3, 10, rng)
        disagree += (label == MOVING_CLOSE_INFEASIBLE) != (rep.classification == INFEASIBLE_CURRENT_ALPHA)
        infeasible += label == MOVING_CLOSE_INFEASIBLE
        checked += 1
        if checked == 200:
            break
    ok = checked == 200 and disagree == 0 and 0 < infeasible < checked
    record(8, ok, f"{checked} states at dt = 1e-3, {infeasible} infeasible, {disagree} disagreements")


def test_criterion_9_numerical_hygiene(acc, tmp_path):
    X = random_safe_states(np.random.default_rng(505), 200)
    grad_err = max(check_gradient(f, x) for f in (acc.h, acc.V) for x in X)
    x0, u = np.array([0.0, 32.0, 100.0]), np.zeros(1)
    f = lambda s: acc.sys.rate(s, u)
    ref = rk4_step(f, x0, 1.0, 1000)
    e1 = np.abs(rk4_step(f, x0, 1.0, 1) - ref).max()
    e2 = np.abs(rk4_step(f, x0, 1.0, 2) - ref).max()
    order = float(np.log2(e1 / e2))
    differing = []
    for name in preset_names():
        dirs = [tmp_path / name / tag for tag in ("a", "b")]
        codes = [main(["presets", "run", name, "--output", str(d)]) for d in dirs]
        files = sorted(p.name for p in dirs[0].iterdir())
        if codes != [EXIT_OK, EXIT_OK] or files != sorted(p.name for p in dirs[1].iterdir()):
            differing.append(name)
            continue
        differing += [f"{name}/{fn}" for fn in files
                      if (dirs[0] / fn).read_bytes() != (dirs[1] / fn).read_bytes()]
    ok = grad_err <= 1e-5 and order >= 3.0 and not differing
    record(9, ok, f"max gradient error {grad_err:.2g} (<= 1e-5); RK4 observed order {order:.2f} (>= 3); "
                  f"presets rerun identically: {not differing} {differing or ''}")


if __name__ == "__main__":
    import sys
    from pathlib import Path
    sys.exit(pytest.main([str(Path(__file__)), "-q", "-p", "no:cacheprovider"]))
