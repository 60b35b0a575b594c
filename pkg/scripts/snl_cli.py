#!/usr/bin/env python3
"""
Command-line front end for canonical dual sensor localization.

    gen    write an instance (preset or random protocol) as JSON
    solve  solve an instance and write the verified report
    plot   draw true versus computed locations as SVG
    bench  sweep presets × seeds into a CSV table

Exit codes of solve: 0 certified (or trivial), 1 unreadable input,
2 usage, 3 no interior critical point, 4 iteration budget exhausted,
5 certificate failed verification.
"""

import argparse
import itertools
import logging
import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from scripts.generate_plot_utils import PlotSpec, render_localization_svg, write_localization_svg  # noqa: E402
from snl.ascent import SolverConfig  # noqa: E402
from snl.bench import load_baseline, merge_baseline, parse_seeds, run_bench, to_csv  # noqa: E402
from snl.errors import SNLError  # noqa: E402
from snl.instance import GeneratorConfig, generate_instance, load_instance, save_instance  # noqa: E402
from snl.presets import create_preset, list_presets  # noqa: E402
from snl.report import MAX_ITERS, NO_INTERIOR, SolveReport  # noqa: E402
from snl.solver import solve, verify  # noqa: E402

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_NO_INTERIOR = 3
EXIT_MAX_ITERS = 4
EXIT_UNVERIFIED = 5


def default_seed() -> int:
    """Seed used when --seed is omitted (SNL_DEFAULT_SEED, else 0)."""
    try:
        return int(os.environ.get("SNL_DEFAULT_SEED", "0"))
    except ValueError:
        return 0


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _region(text: str):
    values = _floats(text)
    if len(values) < 2 or len(values) % 2:
        raise argparse.ArgumentTypeError(f"region needs lo_1,..,lo_d,hi_1,..,hi_d, got {text!r}")
    half = len(values) // 2
    return tuple(values[:half]), tuple(values[half:])


def _anchors(text: str, region):
    if text == "corners":
        lo, hi = region
        return tuple(itertools.product(*zip(lo, hi)))
    return tuple(tuple(_floats(point)) for point in text.split(";"))


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _write_text(path: str, text: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def cmd_gen(args, parser) -> int:
    """Write an instance file from a preset or from protocol flags."""
    seed = default_seed() if args.seed is None else args.seed
    try:
        if args.preset:
            preset = create_preset(args.preset)
            inst, truth = preset.build(seed)
            label = f"preset {args.preset}" + (f" (seed {seed})" if preset.random else "")
        else:
            if args.n is None or args.range is None:
                parser.error("gen needs --preset or both -n and --range")
            region = args.region
            cfg = GeneratorConfig(
                n_sensors=args.n,
                region_lo=region[0],
                region_hi=region[1],
                anchors=_anchors(args.anchors, region),
                radio_range=args.range,
                noise_sigma=args.sigma,
                seed=seed,
                default_weight=args.weight,
            )
            inst, truth = generate_instance(cfg)
            label = f"{args.n} sensors, range {args.range}, sigma {args.sigma} (seed {seed})"
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))
    except (SNLError, ValueError) as e:
        print(f"❌ Invalid generator configuration: {e}")
        return EXIT_USAGE

    _write_text(args.output, save_instance(inst, truth).decode("utf-8"))
    print(f"✅ Generated {label}")
    print(f"📊 {inst.n_sensors} sensors, {inst.n_anchors} anchors, "
          f"{inst.n_sensor_edges} sensor edges, {inst.n_anchor_edges} anchor edges")
    print(f"📁 Instance: {args.output}")
    return EXIT_OK


def solver_config_from_args(args) -> SolverConfig:
    """Map solve flags onto a SolverConfig."""
    options = {
        "seed": default_seed() if args.seed is None else args.seed,
        "direction": args.direction,
        "max_iters": args.max_iters,
        "grad_tol": args.grad_tol,
        "rho0": args.rho0,
        "outer_max": args.outer_max,
    }
    if args.delta_values is not None:
        options.update(delta_mode="user", delta_values=tuple(args.delta_values), force_delta=True)
    elif args.delta is not None:
        options.update(delta_magnitude=args.delta, delta_mode=args.delta_mode, force_delta=True)
    else:
        options.update(delta_mode=args.delta_mode)
    return SolverConfig(**options)


def exit_code_for(report: SolveReport, verified: bool) -> int:
    """Exit code contract of the solve command."""
    if report.status == NO_INTERIOR:
        return EXIT_NO_INTERIOR
    if report.status == MAX_ITERS:
        return EXIT_MAX_ITERS
    return EXIT_OK if verified else EXIT_UNVERIFIED


def cmd_solve(args, parser) -> int:
    """Solve an instance file, verify the certificate and write the report."""
    try:
        inst, truth = load_instance(_read_bytes(args.instance))
    except OSError as e:
        print(f"❌ Cannot read instance {args.instance}: {e}")
        return EXIT_INPUT
    except SNLError as e:
        print(f"❌ Invalid instance {args.instance}: {e}")
        return EXIT_INPUT
    try:
        cfg = solver_config_from_args(args)
    except (SNLError, ValueError) as e:
        print(f"❌ Invalid solver configuration: {e}")
        return EXIT_USAGE

    try:
        report = solve(inst, cfg, truth=truth)
    except SNLError as e:
        print(f"❌ Solve failed: {e}")
        return EXIT_INPUT
    record = verify(inst, report)
    report.verification = record

    text = report.to_json()
    if args.output:
        _write_text(args.output, text + "\n")
    else:
        print(text)

    mark = "✅" if report.succeeded and record.passed else "❌"
    print(f"{mark} Status: {report.status} (stage {report.stage})")
    if report.gap is not None:
        print(f"📊 Primal {report.primal_value:.6e}, dual {report.dual_value:.6e}, gap {report.gap:.3e}")
    if report.rmsd is not None:
        print(f"📊 RMSD: {report.rmsd:.3e}")
    if record.failed():
        print(f"❌ Verification failed: {', '.join(record.failed())}")
    if "unanchored" in report.diagnostics:
        print(f"❌ Sensors without an anchored path: {report.diagnostics['unanchored']}")
    if args.output:
        print(f"📁 Report: {args.output}")
    return exit_code_for(report, record.passed)


def cmd_plot(args, parser) -> int:
    """Draw an instance with a report's computed positions."""
    try:
        inst, truth = load_instance(_read_bytes(args.instance))
        report = SolveReport.from_json(_read_bytes(args.report).decode("utf-8"))
    except (OSError, SNLError) as e:
        print(f"❌ Cannot read plot inputs: {e}")
        return EXIT_INPUT
    if inst.dim != 2:
        print(f"❌ Only planar instances can be plotted (dim {inst.dim})")
        return EXIT_INPUT

    computed = report.points()
    if truth is None:
        print("⚠️ Instance has no ground truth; plotting computed positions and anchors only")
        logging.getLogger(__name__).warning("no ground truth in %s", args.instance)
    edges = None
    if args.edges and computed is not None:
        edges = [(computed[i], computed[j]) for i, j in zip(inst.sensor_i, inst.sensor_j)]
        edges += [(computed[i], inst.anchors[k]) for i, k in zip(inst.anchor_i, inst.anchor_k)]

    svg = render_localization_svg(
        inst.anchors,
        computed=computed,
        truth=None if truth is None else truth.positions,
        edges=edges,
        spec=PlotSpec(width=args.size, height=args.size, show_edges=args.edges),
    )
    write_localization_svg(args.output, svg)
    print(f"✅ Plotted {inst.n_sensors} sensors and {inst.n_anchors} anchors")
    print(f"📁 Plot: {args.output}")
    return EXIT_OK


def cmd_bench(args, parser) -> int:
    """Sweep presets × seeds and write the CSV table."""
    try:
        seeds = parse_seeds(args.seeds) if args.seeds else [default_seed()]
        presets = args.preset or ["s18"]
        for name in presets:
            create_preset(name)
    except SNLError as e:
        parser.error(str(e))

    baseline = None
    if args.baseline:
        try:
            baseline = load_baseline(_read_bytes(args.baseline))
        except (OSError, SNLError) as e:
            print(f"❌ Invalid baseline {args.baseline}: {e}")
            return EXIT_INPUT

    frame = run_bench(presets, seeds, SolverConfig(direction=args.direction), jobs=args.jobs)
    if baseline is not None:
        frame = merge_baseline(frame, baseline)
    csv_text = to_csv(frame)
    if args.output:
        _write_text(args.output, csv_text)
    else:
        sys.stdout.write(csv_text)

    print(f"📊 {len(frame)} rows, {int(frame['verified'].sum())} verified")
    if args.output:
        print(f"📁 Table: {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Canonical dual sensor network localization")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log solver progress (-vv for every step)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance")
    gen.add_argument("--preset", choices=list_presets())
    gen.add_argument("--seed", type=int)
    gen.add_argument("-n", type=int, help="number of sensors")
    gen.add_argument("--range", type=float, help="radio range")
    gen.add_argument("--region", type=_region, default=((0.0, 0.0), (1.0, 1.0)), help="lo_1,..,lo_d,hi_1,..,hi_d")
    gen.add_argument("--anchors", default="corners", help="'corners' or 'x,y;x,y;...'")
    gen.add_argument("--sigma", type=float, default=0.001, help="noise standard deviation")
    gen.add_argument("--weight", type=float, default=1.0)
    gen.add_argument("-o", "--output", default="instance.json")
    gen.set_defaults(handler=cmd_gen)

    solve_cmd = sub.add_parser("solve", help="solve an instance")
    solve_cmd.add_argument("instance")
    solve_cmd.add_argument("--delta", type=float, help="uniform perturbation magnitude, kept in every stage")
    solve_cmd.add_argument("--delta-values", type=_floats, help="explicit perturbation vector, kept in every stage")
    solve_cmd.add_argument("--delta-mode", choices=["uniform", "seeded-random"], default="uniform")
    solve_cmd.add_argument("--seed", type=int)
    solve_cmd.add_argument("--direction", choices=["newton", "gradient"], default="newton")
    solve_cmd.add_argument("--max-iters", type=int, default=500)
    solve_cmd.add_argument("--grad-tol", type=float, default=1e-8)
    solve_cmd.add_argument("--rho0", type=float, default=1.0)
    solve_cmd.add_argument("--outer-max", type=int, default=30)
    solve_cmd.add_argument("-o", "--output")
    solve_cmd.set_defaults(handler=cmd_solve)

    plot = sub.add_parser("plot", help="plot true versus computed locations")
    plot.add_argument("instance")
    plot.add_argument("report")
    plot.add_argument("-o", "--output", default="localization.svg")
    plot.add_argument("--edges", action="store_true", help="draw measured pairs")
    plot.add_argument("--size", type=float, default=6.0, help="canvas size in inches")
    plot.set_defaults(handler=cmd_plot)

    bench = sub.add_parser("bench", help="benchmark presets over seeds")
    bench.add_argument("--preset", action="append", choices=list_presets())
    bench.add_argument("--seeds", help="e.g. 1..10 or 1,4,9")
    bench.add_argument("--baseline", help="external baseline results JSON")
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--direction", choices=["newton", "gradient"], default="newton")
    bench.add_argument("-o", "--output")
    bench.set_defaults(handler=cmd_bench)
    return parser


def configure_logging(verbosity: int) -> None:
    level = os.environ.get("SNL_LOG_LEVEL", "WARNING").upper()
    if verbosity:
        level = "DEBUG" if verbosity > 1 else "INFO"
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("snl").setLevel(getattr(logging, level, logging.WARNING))


def main(argv=None):
    """Main entry point; exits with the command's exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    sys.exit(args.handler(args, parser))


if __name__ == "__main__":
    main()
