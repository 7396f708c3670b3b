"""Command-line front end: run presets, sweep phases, report complementarity."""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .analysis import TWO_PHOTON_BASIS, DensityMatrixView, complementarity, two_photon_cr_after_bs2, two_photon_cr_after_bs3
from .experiments import (
    SWEEPABLE,
    ExperimentConfig,
    load_schema,
    branch_states,
    effective_two_photon_amplitudes,
    event_probabilities,
    list_presets,
    load_preset,
    run_config,
    sweep,
)
from .simulator import NumericalError

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
SIG_DIGITS = 12


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def _round(obj):
    """Recursively round floats to the output precision."""
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj, schema: str | None = None) -> str:
    obj = _round(obj)
    if schema:
        jsonschema.validate(obj, load_schema(schema))
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# config resolution -----------------------------------------------------

def resolve_config(args) -> ExperimentConfig:
    name = args.preset or getattr(args, "name", None)
    if args.config and name:
        raise UsageError("give either a preset or --config, not both")
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if "config" in data and "tool" in data:  # a run manifest
            data = data["config"]
        try:
            config = ExperimentConfig.from_dict(data)
        except (jsonschema.ValidationError, ValueError, TypeError) as exc:
            raise UsageError(f"invalid config: {getattr(exc, 'message', exc)}") from None
    elif name:
        try:
            config = load_preset(name)
        except KeyError:
            raise UsageError(f"unknown preset {name!r}; try 'bosonsim presets'") from None
    else:
        raise UsageError("a preset name or --config is required")
    overrides = {}
    if args.shots is not None:
        overrides["shots"] = args.shots
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.synthesis is not None:
        overrides["synthesis"] = args.synthesis
    try:
        return replace(config, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_sweep(text: str) -> tuple[str, np.ndarray]:
    try:
        phase, start, stop, points = text.split(":")
        start_v, stop_v, n = float(start), float(stop), int(points)
    except ValueError:
        raise UsageError(f"bad sweep {text!r}; expected phase:start:stop:points") from None
    phase = {"phiE": "phi_e", "phiH": "phi_h", "phiN": "phi_n"}.get(phase, phase)
    if phase not in SWEEPABLE:
        raise UsageError(f"sweep phase must be one of {SWEEPABLE}")
    if n < 2:
        raise UsageError("a sweep needs at least 2 points")
    if not (math.isfinite(start_v) and math.isfinite(stop_v)):
        raise UsageError("sweep bounds must be finite")
    return phase, np.linspace(start_v, stop_v, n)


def manifest(command: str, config: ExperimentConfig, outputs: list[str], extra: dict | None = None) -> dict:
    return {
        "tool": "bosonsim",
        "version": __version__,
        "command": command,
        "config": config.to_dict(),
        "seed": config.seed,
        "shots": config.shots,
        "synthesis": config.synthesis,
        "outputs": outputs,
        **(extra or {}),
    }


def _write(out: Path | None, name: str, text: str, written: list[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    written.append(name)


def _finish(out: Path | None, command: str, config: ExperimentConfig, written: list[str], extra=None) -> None:
    if out is not None:
        text = dumps(manifest(command, config, written + ["manifest.json"], extra), "manifest.schema.json")
        (out / "manifest.json").write_text(text)


# plotting --------------------------------------------------------------

def _plot_svg(path: Path, x: np.ndarray, curves: dict[str, list[float]], xlabel: str, ylabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "bosonsim", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, ys in curves.items():
            ax.plot(x, ys, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


# commands --------------------------------------------------------------

def cmd_presets(args) -> int:
    for name in list_presets():
        print(name)
    return EXIT_OK


def cmd_run(args) -> int:
    config = resolve_config(args)
    exp, exact = run_config(config)
    report = {
        "kind": config.kind,
        "bits": [f"c{b}" for b in exact.bits],
        "exact": dict(exact.items()),
        "events": event_probabilities(exp, exact),
    }
    if config.shots > 0:
        _, sampled = run_config(config, sampled=True)
        report["sampled"] = {
            "shots": sampled.shots,
            "seed": config.seed,
            "counts": sampled.counts,
            "events": event_probabilities(exp, sampled),
        }
    out = Path(args.out) if args.out else None
    written: list[str] = []
    _write(out, "histogram.json", dumps(report, "histogram.schema.json"), written)
    _finish(out, "run", config, written)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = resolve_config(args)
    if len(args.sweep) != 1:
        raise UsageError("sweep takes exactly one --sweep phase:start:stop:points")
    phase, values = parse_sweep(args.sweep[0])
    rows = sweep(config, phase, values, jobs=args.jobs)
    columns = list(rows[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([phase, *columns])
    for v, row in zip(values, rows):
        w.writerow([fmt(v), *(fmt(row[c]) for c in columns)])
    out = Path(args.out) if args.out else None
    written: list[str] = []
    _write(out, "sweep.csv", buf.getvalue(), written)
    if args.svg:
        if out is None:
            raise UsageError("--svg needs --out")
        _plot_svg(out / "sweep.svg", values, {c: [r[c] for r in rows] for c in columns}, phase, "probability")
        written.append("sweep.svg")
    _finish(out, "sweep", config, written, {"sweep": {"phase": phase, "points": len(values)}})
    return EXIT_OK


def _effective_state(config: ExperimentConfig, state: np.ndarray, num_qubits: int) -> tuple[np.ndarray, tuple[str, ...]]:
    if config.kind == "two_photon_unruh":
        amps = effective_two_photon_amplitudes(state)
        basis = TWO_PHOTON_BASIS
    else:
        idx = [1 << (num_qubits - 1 - q) for q in range(num_qubits)]
        amps = state[idx]
        basis = tuple(f"q{q}" for q in range(num_qubits))
    weight = float(np.vdot(amps, amps).real)
    if weight < 1e-12:
        raise UsageError("the selected branch holds no photon")
    if abs(weight - 1) > 1e-9:
        raise NumericalError(f"state has weight {1 - weight:.3e} outside the effective basis")
    return amps, basis


def _select_branch(trajs, bits: tuple[int, ...], branch: str | None):
    if branch is None:
        if len(trajs) > 1:
            raise UsageError(
                "the state is a mixture over blocker records; choose one with --branch "
                + "/".join("".join(str(t.record[b]) for b in bits) for t in trajs)
            )
        return trajs[0]
    for t in trajs:
        if "".join(str(t.record[b]) for b in bits) == branch:
            return t
    raise UsageError(f"no branch with record {branch!r} over bits {['c%d' % b for b in bits]}")


def cr_point(config: ExperimentConfig, stage: str | None, branch: str | None) -> dict:
    exp, trajs = branch_states(config, stop_after=stage)
    bits = exp.circuit.record_bits
    traj = _select_branch(trajs, bits, branch)
    amps, basis = _effective_state(config, traj.state, exp.layout.num_qubits)
    rep = complementarity(DensityMatrixView.from_state(amps, basis))
    row = {"phi_e": config.phi_e, "phi_h": config.phi_h, **rep.as_dict()}
    if config.kind == "two_photon_unruh" and config.b0 == "off" and not config.b1:
        last = stage or exp.stages[-1]
        closed = {"bs2": lambda: two_photon_cr_after_bs2(config.phi_e),
                  "bs3": lambda: two_photon_cr_after_bs3(config.phi_e, config.phi_h)}.get(last)
        if closed:
            row["C_closed"], row["P_closed"] = closed()
    return row


def cmd_cr(args) -> int:
    config = resolve_config(args)
    grids = [parse_sweep(s) for s in args.sweep] or [("phi_e", np.array([config.phi_e]))]
    if len({p for p, _ in grids}) != len(grids):
        raise UsageError("each phase may be swept once")
    rows = []
    for combo in itertools.product(*(v for _, v in grids)):
        point = replace(config, **{p: float(v) for (p, _), v in zip(grids, combo)})
        rows.append(cr_point(point, args.stage, args.branch))
    columns = list(rows[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) if isinstance(r[c], float) else str(r[c]).lower() for c in columns])
    out = Path(args.out) if args.out else None
    written: list[str] = []
    _write(out, "cr.csv", buf.getvalue(), written)
    if out is not None:
        doc = {"kind": config.kind, "stage": args.stage, "branch": args.branch, "points": rows}
        _write(out, "cr.json", dumps(doc, "cr.schema.json"), written)
    if args.svg:
        if out is None:
            raise UsageError("--svg needs --out")
        phase, values = grids[0]
        if len(grids) > 1:
            raise UsageError("--svg plots a one-phase grid")
        curves = {"C_l1": [r["C_l1"] for r in rows], "P_l1": [r["P_l1"] for r in rows]}
        _plot_svg(out / "cr.svg", values, curves, phase, "l1 measure")
        written.append("cr.svg")
    _finish(out, "cr", config, written, {"stage": args.stage, "branch": args.branch})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"bosonsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("name", nargs="?", help="preset name, e.g. unruh/no-blockers")
        p.add_argument("--preset", help="preset name (alternative to the positional)")
        p.add_argument("--config", help="experiment config JSON or a run manifest")
        p.add_argument("--shots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--synthesis", help="exact, decomposed or trotter:<steps>")
        p.add_argument("--out", help="output directory (default: stdout)")

    p = sub.add_parser("presets", help="list preset names")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("run", help="outcome histogram of one configuration")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="event probabilities along a phase sweep")
    common(p)
    p.add_argument("--sweep", action="append", default=[], required=True, metavar="PHASE:START:STOP:POINTS")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cr", help="l1 coherence and predictability over a phase grid")
    common(p)
    p.add_argument("--sweep", action="append", default=[], metavar="PHASE:START:STOP:POINTS")
    p.add_argument("--stage", help="stop the circuit after this stage (e.g. bs2)")
    p.add_argument("--branch", help="blocker record selecting one branch, printed c_high..c_low")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_cr)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bosonsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"bosonsim: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"bosonsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
