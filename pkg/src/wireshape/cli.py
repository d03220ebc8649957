"""``wireshape`` command line.

Exit codes: 0 success, 2 usage or validation error, 3 simulation fault.
"""

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import CalibrationInput, solve_theta
from .evaluation import (ALIGN_MODES, align, per_segment_error, report_csv,
                         resample, summarize, summary_table)
from .formats import (FormatError, ProjectConfig, centerline_from_csv, centerline_to_csv,
                      config_from_json, config_to_json, program_from_json, program_to_json)
from .machine import (CompileError, ParseError, SimulationFault, compile_program,
                      parse_program, print_program, simulate)
from .planner import FitOptions, ShapeRecipe, fit_actions, plan
from .plot import overlay_svg
from .wire import BendLaw, forward_shape

EXIT_OK, EXIT_USAGE, EXIT_FAULT = 0, 2, 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args) -> ProjectConfig:
    if args.config:
        return config_from_json(_read(args.config))
    return ProjectConfig()


def _parse_chords(text: str) -> list[float]:
    chords = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for tok in line.replace(",", " ").split():
            try:
                chords.append(float(tok))
            except ValueError:
                raise FormatError(f"bad chord value {tok!r}", lineno, line.find(tok) + 1) from None
    if not chords:
        raise FormatError("no chord measurements found")
    return chords


def cmd_calibrate(args) -> int:
    # calibration is usually the first step, so a missing config is created
    if args.config and not Path(args.config).exists():
        cfg = ProjectConfig()
    else:
        cfg = _config(args)
    chords = _parse_chords(_read(args.chords))
    l, n = cfg.wire.segment_length, cfg.wire.n
    for c in chords:
        if c > n * l:
            raise UsageError(f"chord {c} mm exceeds n·l = {n * l} mm")
        if c <= 0:
            raise UsageError(f"chord {c} mm must be positive")
    res = solve_theta(CalibrationInput(l, n, tuple(chords)))
    if res.theta_star == 0.0:
        print("warning: mean chord equals n·l; the test arc is a straight wire (theta* = 0)",
              file=sys.stderr)
    print(f"trials      {len(chords)}")
    print(f"chord_mean  {res.chord_mean:.4f} mm")
    print(f"chord_std   {res.chord_std:.4f} mm")
    print(f"theta_star  {math.degrees(res.theta_star):.6f} deg")
    print(f"residual    {res.residual:.3e} mm")
    beta = args.beta if args.beta is not None else cfg.beta_nominal
    updated = replace(cfg, bend_law=BendLaw.constant(beta, res.theta_star), beta_nominal=beta)
    if args.config:
        Path(args.config).write_text(config_to_json(updated))
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = _config(args)
    kind = args.kind
    counts = list(args.counts)
    kw = {"segment_length": cfg.wire.segment_length, "beta_nominal": cfg.beta_nominal}
    if kind in ("c", "helix"):
        if args.segments is not None:
            counts = [args.segments]
        if not counts:
            counts = [cfg.wire.n]
    try:
        if kind == "custom":
            if not args.step:
                raise UsageError("custom recipe needs --step PHI_DEG:on|off (repeatable)")
            recipe = ShapeRecipe.from_steps([_custom_step(s) for s in args.step], **kw)
        elif kind == "helix":
            recipe = ShapeRecipe.helix(*counts, dphi=math.radians(args.dphi), **kw)
        else:
            recipe = ShapeRecipe(kind, tuple(counts), **kw)
    except TypeError:
        raise UsageError(f"wrong number of counts for {kind}") from None
    program = plan(recipe, cfg.wire)
    _emit(program_to_json(program), args.out)
    return EXIT_OK


def _custom_step(text: str):
    phi, _, state = text.partition(":")
    if state not in ("on", "off"):
        raise UsageError(f"bad --step {text!r}; expected PHI_DEG:on or PHI_DEG:off")
    try:
        return math.radians(float(phi)), state == "on"
    except ValueError:
        raise UsageError(f"bad roll angle in --step {text!r}") from None


def cmd_shape(args) -> int:
    cfg = _config(args)
    program = program_from_json(_read(args.program))
    _emit(centerline_to_csv(forward_shape(program, cfg.bend_law, args.mode)), args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _config(args)
    target = centerline_from_csv(_read(args.target))
    l = cfg.wire.segment_length
    lengths = target.segment_lengths()
    if np.any(np.abs(lengths - l) > 0.1 * l) or len(target) > cfg.wire.n + 1:
        total = float(lengths.sum())
        n = min(cfg.wire.n, max(2, int(round(total / l))))
        target = resample(target.points, n, l)
    opts = FitOptions(pinch_mode=args.pinch,
                      curvature_threshold=None if args.threshold is None else math.radians(args.threshold))
    result = fit_actions(target, cfg.wire, cfg.bend_law, opts)
    print(f"residual_rms {result.residual_rms:.6g} mm", file=sys.stderr)
    _emit(program_to_json(result.program), args.out)
    return EXIT_OK


def cmd_compile(args) -> int:
    cfg = _config(args)
    program = program_from_json(_read(args.program))
    _emit(print_program(compile_program(program, cfg.machine)), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    mp = parse_program(_read(args.machine))
    trace = simulate(mp)
    lines = ["index,op,nozzle_deg,stabilizer,carriage_mm,carriage"]
    for s in trace.states:
        lines.append(f"{s.index},{s.op},{s.nozzle_deg!r},{s.stabilizer},{s.carriage_mm!r},{s.carriage}")
    _emit("\n".join(lines) + "\n", args.out)
    if args.achieved:
        Path(args.achieved).write_text(program_to_json(trace.achieved))
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args)
    pairs = [(args.measured, args.predicted, args.label)] if args.measured else []
    pairs += [(m, p, lab) for m, p, lab in (args.pair or [])]
    if not pairs:
        raise UsageError("eval needs MEASURED PREDICTED or at least one --pair")
    reports = []
    for meas_path, pred_path, label in pairs:
        meas = centerline_from_csv(_read(meas_path))
        pred = centerline_from_csv(_read(pred_path))
        aligned = align(meas, pred, args.align)
        errs = per_segment_error(aligned, pred, planar=args.planar)
        reports.append(summarize(errs, cfg.wire, label or Path(meas_path).stem))
    _emit(report_csv(reports), args.out)
    sys.stderr.write(summary_table(reports))
    return EXIT_OK


def cmd_plot(args) -> int:
    meas = centerline_from_csv(_read(args.measured))
    pred = centerline_from_csv(_read(args.predicted))
    if args.align:
        meas = align(meas, pred, args.align)
    _emit(overlay_svg(meas, pred, title=args.title or ""), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="project config JSON (only source of settings)")
    common.add_argument("--out", help="output file (default: stdout)")

    p = argparse.ArgumentParser(prog="wireshape", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("calibrate", parents=[common], help="solve theta* from measured chords")
    s.add_argument("chords", help="text file, one chord (mm) per line")
    s.add_argument("--beta", type=float, help="pinch command used for the calibration arc")
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("plan", parents=[common], help="action program for a shape recipe")
    s.add_argument("kind", choices=["c", "s", "angled", "hook", "helix", "custom"])
    s.add_argument("counts", nargs="*", type=int, help="segment counts, shaft to tip")
    s.add_argument("--segments", type=int, help="segment count for c / helix")
    s.add_argument("--dphi", type=float, default=45.0, help="helix roll per segment, deg")
    s.add_argument("--step", action="append", help="custom step PHI_DEG:on|off, shaping order")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("shape", parents=[common], help="predicted centerline CSV")
    s.add_argument("program")
    s.add_argument("--mode", choices=["rigid", "arc"], default="rigid")
    s.set_defaults(func=cmd_shape)

    s = sub.add_parser("fit", parents=[common], help="action program from a target centerline")
    s.add_argument("target")
    s.add_argument("--pinch", choices=["binary", "continuous"], default="binary")
    s.add_argument("--threshold", type=float, help="pinch threshold, deg (default theta*/2)")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("compile", parents=[common], help="machine program text")
    s.add_argument("program")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", parents=[common], help="replay a machine program")
    s.add_argument("machine")
    s.add_argument("--achieved", help="write the achieved (quantized) action program here")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("eval", parents=[common], help="per-segment error report CSV")
    s.add_argument("measured", nargs="?")
    s.add_argument("predicted", nargs="?")
    s.add_argument("--label", default="")
    s.add_argument("--pair", nargs=3, action="append", metavar=("MEAS", "PRED", "LABEL"))
    s.add_argument("--align", choices=ALIGN_MODES, default="base")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--2d", dest="planar", action="store_true", default=True)
    g.add_argument("--3d", dest="planar", action="store_false")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("plot", parents=[common], help="SVG overlay of two centerlines")
    s.add_argument("measured")
    s.add_argument("predicted")
    s.add_argument("--align", choices=ALIGN_MODES)
    s.add_argument("--title")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except SimulationFault as e:
        print(f"simulation fault: {e}", file=sys.stderr)
        return EXIT_FAULT
    except (UsageError, FormatError, ParseError, CompileError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
