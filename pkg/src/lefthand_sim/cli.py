"""Command-line interface: ``lefthand-sim run | validate | compare``."""

import argparse
import os
import sys
from pathlib import Path

from . import export
from .dynamics import VARIANTS, variant_disagreements
from .errors import ConfigError, IoError, LefthandError
from .params import PRESETS, ScenarioPreset, apply_linkages, load, preset
from .sweep import DEFAULT_RANGE, SOURCE_CHOICES, SweepSpec, compare_scenarios, run_sweep

OUT_ENV = "LEFTHAND_SIM_OUT"
DEFAULT_OUT = "lefthand_out"

EXIT_OK, EXIT_FAIL, EXIT_PARTIAL = 0, 1, 2


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_scenario_args(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--preset", help=f"built-in scenario: {', '.join(PRESETS)}")
    group.add_argument("--config", type=Path, help="YAML parameter file (SystemParameters keys)")
    p.add_argument("--gamma2", type=_floats, help="pump values Gamma2/gamma, e.g. 0,0.4,0.8")


def build_parser():
    parser = argparse.ArgumentParser(prog="lefthand-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep the probe detuning and export results")
    _add_scenario_args(run)
    run.add_argument("--points", type=int, default=DEFAULT_RANGE[2], help="grid points (default %(default)s)")
    run.add_argument("--range", type=_range, default=DEFAULT_RANGE[:2], metavar="LO:HI",
                     help="Delta_e/gamma span; write --range=-10:10 for negative bounds")
    run.add_argument("--source", choices=SOURCE_CHOICES, default="both")
    run.add_argument("--variant", choices=VARIANTS, default="verbatim")
    run.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    run.add_argument("--no-svg", action="store_true")
    run.add_argument("--no-csv", action="store_true")
    run.add_argument("--no-report", action="store_true")

    val = sub.add_parser("validate", help="check a scenario and print its resolved parameters")
    _add_scenario_args(val)

    cmp = sub.add_parser("compare", help="compare two CSV exports from `run`")
    cmp.add_argument("a", type=Path)
    cmp.add_argument("b", type=Path)
    cmp.add_argument("--out", type=Path)
    return parser


def _scenario(args):
    if args.config is not None:
        params = load(args.config)
        pumps = args.gamma2 if args.gamma2 else (params.Gamma2,)
        return ScenarioPreset(args.config.stem, params, pumps)
    if args.preset is None:
        raise ConfigError(f"one of --preset or --config is required (presets: {', '.join(PRESETS)})")
    try:
        return preset(args.preset)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def _out_dir(args):
    out = args.out or Path(os.environ.get(OUT_ENV) or DEFAULT_OUT)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(out, exc.strerror or str(exc)) from exc
    if not os.access(out, os.W_OK):
        raise IoError(out, "output directory is not writable")
    return out


def cmd_run(args):
    if args.no_svg and args.no_csv and args.no_report:
        raise ConfigError("all exports disabled; drop one of --no-svg/--no-csv/--no-report")
    scenario = _scenario(args)
    try:
        spec = SweepSpec(scenario, (*args.range, args.points), args.gamma2, args.source, args.variant)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(args)
    result = run_sweep(spec)

    stem = scenario.id
    written = []
    for source in spec.sources:
        if not args.no_csv:
            written.append(export.write_csv(result, source, out / f"{stem}_{source}.csv"))
        if not args.no_svg:
            for quantity, label in export.QUANTITIES:
                written.append(export.write_svg(result, source, quantity, out / f"{stem}_{source}_{label}.svg"))
    if not args.no_report:
        probe = apply_linkages(scenario, spec.Delta_e_range[1], max(spec.Gamma2_values))
        text = export.band_report(result, variant_disagreements(probe))
        written.append(export._write_text(out / f"{stem}_report.txt", text))
        print(text)
    for path in written:
        print(f"wrote {path}")
    if result.flagged:
        print(f"warning: {result.flagged} flagged point(s)", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_validate(args):
    scenario = _scenario(args)
    pumps = args.gamma2 if args.gamma2 else scenario.pump_values
    print(f"scenario: {scenario.id}")
    for name, value in scenario.base.to_dict().items():
        print(f"  {name:<11} = {value!r}")
    print("linkage: " + "; ".join(str(r) for r in scenario.linkage_rules))
    print("resolved at Delta_e = 0:")
    print(f"  {'Gamma2':>8} {'Gamma1':>8} {'Delta_e':>8} {'Delta_b':>8}")
    for g in pumps:
        snap = apply_linkages(scenario, 0.0, g)
        print(f"  {snap.Gamma2:8g} {snap.Gamma1:8g} {snap.Delta_e:8g} {snap.Delta_b:8g}")
    print("ok")
    return EXIT_OK


def cmd_compare(args):
    a, b = export.read_result(args.a), export.read_result(args.b)
    cmp = compare_scenarios(a, b, args.a.stem, args.b.stem)
    text = export.comparison_report(cmp)
    print(text)
    out = _out_dir(args)
    stem = f"compare_{args.a.stem}_vs_{args.b.stem}"
    for path in (export._write_text(out / f"{stem}.txt", text),
                 export._write_text(out / f"{stem}.csv", export.comparison_csv(cmp))):
        print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "compare": cmd_compare}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except LefthandError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def entry():
    sys.exit(main())
