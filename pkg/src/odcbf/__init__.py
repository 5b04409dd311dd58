"""Control barrier function QP controllers with an optimized decay rate.

The library pieces are small and composable: control-affine systems and
scalar state functions (:mod:`odcbf.dynamics`), input polytopes, a dense QP
solver, the four QP controllers, point-wise feasibility and one-step
reachability analysis, a closed-loop simulator, and the adaptive cruise
control case study.  :mod:`odcbf.cli` drives JSON-configured experiments.
"""

from .acc import AccParams, acc_cbf, acc_clf, acc_controller_defaults, acc_input_box, acc_system
from .controllers import (
    ControllerConfig,
    ControlResult,
    cbf_qp,
    clf_cbf_qp,
    make_controller,
    optimal_decay_cbf_qp,
    optimal_decay_clf_cbf_qp,
)
from .dynamics import (
    AffineSystem,
    ClassKappaFunction,
    ScalarStateFunction,
    check_gradient,
    constant_function,
    evaluate_kappa,
    lie_derivatives,
)
from .feasibility import (
    CbfHalfspace,
    FeasibilityReport,
    minimal_feasible_alpha_value,
    omega_star,
    ucbf_halfspace,
    vertex_feasibility,
    vertex_residuals,
)
from .polytope import InputPolytope, UnboundedPolytopeError, contains, enumerate_vertices, from_box, interval
from .qp import (
    INFEASIBLE,
    OPTIMAL,
    NotPositiveDefiniteError,
    NumericalFailure,
    QpProblem,
    QpSolution,
    is_farkas_certificate,
    solve,
    solve_feasibility,
)
from .reachability import ReachSample, classify_scenario, sample_reachable, scbf_membership
from .simulator import SimConfig, SimulationTrace, TraceComparison, compare_traces, run

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
