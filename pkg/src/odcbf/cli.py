"""Command-line entry point: ``odcbf run | probe | presets``.

Exit status: 0 on success, 2 for a bad config or arguments, 3 when a
controller hit a numerical failure (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .experiment import ConfigError, Experiment, format_summary, load_experiment, parse_experiment, run_experiment
from .feasibility import minimal_feasible_alpha_value, omega_star, vertex_feasibility

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def preset_names() -> list[str]:
    root = resources.files("odcbf") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    if name not in preset_names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    text = (resources.files("odcbf") / "presets" / f"{name}.json").read_text()
    return json.loads(text)


def _execute(exp: Experiment) -> int:
    result = run_experiment(exp)
    print(format_summary(result))
    print(f"wrote {len(result.files)} files to {exp.outputs}")
    for r in result.runs:
        if r.trace.error:
            print(f"{r.label} run {r.index}: {r.trace.error}", file=sys.stderr)
    return EXIT_NUMERICAL if result.numerical_failure else EXIT_OK


def cmd_run(args) -> int:
    return _execute(load_experiment(args.config, output=args.output))


def cmd_presets_list(args) -> int:
    for name in preset_names():
        print(f"{name:16s} {load_preset(name).get('description', '')}")
    return EXIT_OK


def cmd_presets_run(args) -> int:
    return _execute(parse_experiment(load_preset(args.name), base_dir=Path.cwd(), output=args.output))


def _state(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None


def cmd_probe(args) -> int:
    exp = load_experiment(args.config) if args.config else parse_experiment(load_preset("acc-speed-sweep"))
    x = np.array([v for chunk in args.state for v in chunk])
    m = exp.model
    if x.shape != (m.sys.n,):
        raise ConfigError(f"--state needs {m.sys.n} numbers, got {x.size}")
    entries = {c.label: c for c in exp.controllers}
    label = args.controller or exp.controllers[0].label
    if label not in entries:
        raise ConfigError(f"no controller labelled {label!r}; have {sorted(entries)}")
    alpha = entries[label].config.alpha

    hx = m.h(x)
    rep = vertex_feasibility(m.sys, m.h, m.uadm, alpha, x)
    need = minimal_feasible_alpha_value(m.sys, m.h, m.uadm, x)
    lines = [
        ("state", " ".join("%.9g" % v for v in x)),
        ("controller", label),
        ("h", "%.9g" % hx),
        ("alpha(h)", "%.9g" % rep.alpha_value),
        ("classification", rep.classification),
        ("min_vertex_residual", "%.9g" % rep.min_vertex_residual),
        ("max_vertex_residual", "%.9g" % rep.max_vertex_residual),
        ("confined", str(rep.confined).lower()),
        ("minimal_alpha_value", "%.9g" % need),
    ]
    if hx > 0:
        lines.append(("minimal_linear_coefficient", "%.9g" % (need / hx)))
        lines.append(("omega_star", "%.9g" % omega_star(m.sys, m.h, m.uadm, alpha, x)))
    else:
        lines.append(("omega_star", "undefined (h <= 0)"))
    width = max(len(k) for k, _ in lines)
    for k, v in lines:
        print(f"{k:<{width}}  {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odcbf", description="Optimal-decay CBF-QP experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config", help="path to a JSON experiment config")
    p.add_argument("--output", help="output directory (overrides $ODCBF_OUTPUT_DIR and the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("probe", help="point-wise feasibility report at one state")
    p.add_argument("config", nargs="?", help="config supplying the model and alpha (default: acc-speed-sweep preset)")
    p.add_argument("--state", required=True, nargs="+", type=_state, help="state, e.g. --state 0 32 79")
    p.add_argument("--controller", help="controller label whose alpha is used (default: the first)")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("presets", help="list or run the shipped presets")
    psub = p.add_subparsers(dest="presets_command", required=True)
    q = psub.add_parser("list", help="list preset names")
    q.set_defaults(func=cmd_presets_list)
    q = psub.add_parser("run", help="run a preset")
    q.add_argument("name")
    q.add_argument("--output", help="output directory (overrides $ODCBF_OUTPUT_DIR)")
    q.set_defaults(func=cmd_presets_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
