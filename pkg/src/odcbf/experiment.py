"""JSON experiment configs: parsing, validation, execution and CSV output.

A config names a model, one or more controllers and a list of initial
states; every (controller, initial state) pair becomes one closed-loop run.
Everything is validated before the first run starts.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .acc import AccParams, acc_cbf, acc_clf, acc_controller_defaults, acc_input_box, acc_system
from .controllers import KINDS, ControllerConfig, make_controller
from .dynamics import AffineSystem, ClassKappaFunction, ScalarStateFunction
from .polytope import InputPolytope
from .simulator import SimConfig, SimulationTrace, run

OUTPUT_ENV = "ODCBF_OUTPUT_DIR"
TRACE_COLUMNS = ("t", "x1", "x2", "x3", "u", "h", "V", "omega", "delta", "status")
SUMMARY_COLUMNS = ("label", "kind", "run", "x1_0", "x2_0", "x3_0", "steps",
                   "first_infeasible_time", "first_unsafe_time", "min_h", "error", "file")

_TOP_KEYS = {"name", "description", "model", "controllers", "sim", "initial_states", "outputs", "plots"}
_CTRL_KEYS = {"label", "kind", "params"}
_PARAM_KEYS = {"alpha", "gamma", "p", "p_omega", "omega0", "H", "nominal"}


class ConfigError(ValueError):
    """The experiment description is malformed or violates a model invariant."""


@dataclass(frozen=True)
class Model:
    name: str
    params: AccParams
    sys: AffineSystem
    h: ScalarStateFunction
    V: ScalarStateFunction
    uadm: InputPolytope


@dataclass(frozen=True)
class ControllerEntry:
    label: str
    kind: str
    config: ControllerConfig


@dataclass(frozen=True)
class Experiment:
    name: str
    model: Model
    controllers: tuple[ControllerEntry, ...]
    sim: SimConfig
    initial_states: tuple[tuple[float, ...], ...]
    outputs: Path
    plots: bool = True
    description: str = ""
    log_h: bool = False


@dataclass
class RunRecord:
    label: str
    kind: str
    index: int
    x0: tuple[float, ...]
    trace: SimulationTrace
    file: str = ""


@dataclass
class ExperimentResult:
    experiment: Experiment
    runs: list[RunRecord] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)

    @property
    def numerical_failure(self) -> bool:
        return any(r.trace.error is not None for r in self.runs)


def _fail(msg: str):
    raise ConfigError(msg)


def _number(value, what: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{what} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        _fail(f"{what} must be finite")
    if positive and not value > 0:
        _fail(f"{what} must be positive, got {value}")
    return value


def _check_keys(obj: dict, allowed: set, what: str):
    if not isinstance(obj, dict):
        _fail(f"{what} must be an object")
    extra = set(obj) - allowed
    if extra:
        _fail(f"unknown {what} keys: {sorted(extra)}")


def parse_model(entry) -> Model:
    if isinstance(entry, str):
        entry = {"name": entry}
    _check_keys(entry, {"name", "params"}, "model")
    name = entry.get("name")
    if name != "acc":
        _fail(f"unknown model {name!r}; the built-in model is 'acc'")
    raw = entry.get("params", {})
    if not isinstance(raw, dict):
        _fail("model params must be an object")
    for key, val in raw.items():
        _number(val, f"model param {key}")
    try:
        params = AccParams.from_dict(raw)
    except ValueError as exc:
        _fail(f"model params: {exc}")
    return Model(name, params, acc_system(params), acc_cbf(params), acc_clf(params), acc_input_box(params))


def _kappa(entry, what: str, extended: bool) -> ClassKappaFunction:
    if isinstance(entry, dict):
        _check_keys(entry, {"kind", "coefficient"}, what)
        if entry.get("kind", "linear") != "linear":
            _fail(f"{what}: only linear class-K functions can be configured")
        entry = entry.get("coefficient")
    return ClassKappaFunction.linear(_number(entry, f"{what} coefficient", positive=True), extended=extended)


def _weight(entry, model: Model):
    if entry == "identity":
        return None
    if entry == "inverse_mass_squared":
        return np.array([[1.0 / model.params.m ** 2]])
    try:
        H = np.array(entry, dtype=float).reshape(model.sys.m, model.sys.m)
    except (TypeError, ValueError):
        _fail(f"H must be 'identity', 'inverse_mass_squared' or a {model.sys.m}x{model.sys.m} matrix")
    return H


def parse_controller(entry, model: Model) -> ControllerEntry:
    _check_keys(entry, _CTRL_KEYS, "controller")
    kind = entry.get("kind")
    if kind not in KINDS:
        _fail(f"controller kind must be one of {KINDS}, got {kind!r}")
    label = entry.get("label", kind)
    if not isinstance(label, str) or not label or any(ch in label for ch in "/\\ "):
        _fail(f"controller label must be a non-empty word, got {label!r}")
    raw = entry.get("params", {})
    _check_keys(raw, _PARAM_KEYS, "controller params")

    kw = acc_controller_defaults(model.params)
    if "alpha" in raw:
        kw["alpha"] = _kappa(raw["alpha"], "alpha", extended=True)
    if "gamma" in raw:
        kw["gamma"] = _kappa(raw["gamma"], "gamma", extended=False)
    for key in ("p", "p_omega"):
        if key in raw:
            kw[key] = _number(raw[key], key, positive=True)
    if "omega0" in raw:
        kw["omega0"] = _number(raw["omega0"], "omega0")
    if "H" in raw:
        kw["H"] = _weight(raw["H"], model)
    if "nominal" in raw:
        u = np.array([_number(v, "nominal input") for v in np.atleast_1d(raw["nominal"]).tolist()])
        if u.shape != (model.sys.m,):
            _fail(f"nominal input must have {model.sys.m} entries")
        kw["nominal"] = lambda x, u=u: u
    try:
        cfg = ControllerConfig(**kw)
    except ValueError as exc:
        _fail(f"controller {label}: {exc}")
    return ControllerEntry(label, kind, cfg)


def parse_sim(entry) -> SimConfig:
    entry = {} if entry is None else entry
    _check_keys(entry, {"control_hz", "horizon", "integrator_substeps", "on_infeasible", "seed"}, "sim")
    kw = {}
    for key in ("control_hz", "horizon"):
        if key in entry:
            kw[key] = _number(entry[key], key, positive=True)
    for key in ("integrator_substeps", "seed"):
        if key in entry:
            val = entry[key]
            if isinstance(val, bool) or not isinstance(val, int):
                _fail(f"{key} must be an integer")
            kw[key] = val
    if "on_infeasible" in entry:
        kw["on_infeasible"] = entry["on_infeasible"]
    try:
        return SimConfig(**kw)
    except ValueError as exc:
        _fail(f"sim: {exc}")


def parse_experiment(data: dict, base_dir: Path | None = None, output: str | os.PathLike | None = None) -> Experiment:
    """Validate a decoded config.

    The output directory is, in order of precedence: ``output``, the
    ``ODCBF_OUTPUT_DIR`` environment variable, the config's ``outputs``
    entry (relative to ``base_dir``).
    """
    _check_keys(data, _TOP_KEYS, "config")
    model = parse_model(data.get("model", "acc"))
    ctrls = data.get("controllers")
    if not isinstance(ctrls, list) or not ctrls:
        _fail("controllers must be a non-empty list")
    controllers = tuple(parse_controller(c, model) for c in ctrls)
    labels = [c.label for c in controllers]
    if len(set(labels)) != len(labels):
        _fail(f"controller labels must be unique, got {labels}")
    sim = parse_sim(data.get("sim"))

    states = data.get("initial_states")
    if not isinstance(states, list) or not states:
        _fail("initial_states must be a non-empty list")
    parsed = []
    for s in states:
        if not isinstance(s, list) or len(s) != model.sys.n:
            _fail(f"each initial state needs {model.sys.n} entries, got {s!r}")
        parsed.append(tuple(_number(v, "initial state entry") for v in s))

    name = data.get("name", "experiment")
    if not isinstance(name, str) or not name:
        _fail("name must be a non-empty string")
    plots, log_h = data.get("plots", True), False
    if isinstance(plots, dict):
        _check_keys(plots, {"log_h"}, "plots")
        log_h = plots.get("log_h", False)
        if not isinstance(log_h, bool):
            _fail("plots.log_h must be true or false")
        plots = True
    if not isinstance(plots, bool):
        _fail("plots must be true, false or an options object")
    if output is None:
        output = os.environ.get(OUTPUT_ENV) or None
    if output is None:
        outputs = data.get("outputs", f"odcbf-out/{name}")
        if not isinstance(outputs, str) or not outputs:
            _fail("outputs must be a directory path")
        out = Path(outputs)
        if not out.is_absolute() and base_dir is not None:
            out = base_dir / out
    else:
        out = Path(output)
    return Experiment(name, model, controllers, sim, tuple(parsed), out, plots,
                      str(data.get("description", "")), log_h)


def load_experiment(path: str | os.PathLike, output=None) -> Experiment:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_experiment(data, base_dir=Path.cwd(), output=output)


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return "" if math.isnan(v) else "%.9g" % v


def trace_csv(trace: SimulationTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for i, t in enumerate(trace.times):
        x = trace.states[i]
        w.writerow([_fmt(t), *(_fmt(v) for v in x), _fmt(trace.inputs[i, 0]), _fmt(trace.h_values[i]),
                    _fmt(trace.v_values[i]), _fmt(trace.omega_values[i]), _fmt(trace.delta_values[i]),
                    trace.statuses[i]])
    return buf.getvalue()


def summary_rows(runs: list[RunRecord]) -> list[list[str]]:
    rows = []
    for r in runs:
        tr = r.trace
        rows.append([r.label, r.kind, str(r.index), *(_fmt(v) for v in r.x0), str(len(tr)),
                     _fmt(tr.first_infeasible_time), _fmt(tr.first_unsafe_time), _fmt(tr.min_h),
                     tr.error or "", r.file])
    return rows


def run_experiment(exp: Experiment) -> ExperimentResult:
    """Run every controller from every initial state and write the outputs."""
    result = ExperimentResult(exp)
    m = exp.model
    for entry in exp.controllers:
        ctrl = make_controller(entry.kind, m.sys, m.h, m.V, m.uadm, entry.config)
        for i, x0 in enumerate(exp.initial_states):
            trace = run(m.sys, ctrl, x0, exp.sim, h=m.h, V=m.V)
            trace.meta.update(label=entry.label, kind=entry.kind, x0=x0)
            result.runs.append(RunRecord(entry.label, entry.kind, i, x0, trace))

    exp.outputs.mkdir(parents=True, exist_ok=True)
    for r in result.runs:
        r.file = f"{r.label}_run{r.index:02d}.csv"
        path = exp.outputs / r.file
        path.write_text(trace_csv(r.trace))
        result.files.append(path)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    w.writerows(summary_rows(result.runs))
    path = exp.outputs / "summary.csv"
    path.write_text(buf.getvalue())
    result.files.append(path)

    if exp.plots:
        from .plotting import plot_experiment
        result.files.extend(plot_experiment(result, exp.outputs, log_h=exp.log_h))
    return result


def format_summary(result: ExperimentResult) -> str:
    head = ("label", "run", "x2(0)", "x3(0)", "infeasible at", "unsafe at", "min h")
    rows = [head]
    for r in result.runs:
        tr = r.trace
        rows.append((r.label, str(r.index), _fmt(r.x0[1]), _fmt(r.x0[2]),
                     _fmt(tr.first_infeasible_time) or "-", _fmt(tr.first_unsafe_time) or "-",
                     "%.6g" % tr.min_h))
    widths = [max(len(row[j]) for row in rows) for j in range(len(head))]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * wd for wd in widths))
    return "\n".join(lines)


def with_output(exp: Experiment, output: str | os.PathLike) -> Experiment:
    return replace(exp, outputs=Path(output))
