"""Command line interface: simulate, converge, rescale, gaslib11."""

import argparse
import os
import sys

from .configfile import load_scenario, scenario_text
from .errors import PipeflowError
from .experiments import (
    PhysicalParams,
    emit_report,
    rescale_physical,
    run_convergence_study,
    step_reports_csv,
    trajectory_csv,
)
from .network import gaslib11
from .solver import simulate


def _parse_eps_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pipeflow",
        description="Barotropic gas flow in pipes and pipe networks: "
                    "mixed finite elements in space, implicit Euler in time.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and dump step diagnostics")
    sim.add_argument("--config", required=True, help="scenario file path")
    sim.add_argument("--eps", default=None, help="override the scenario's eps")
    sim.add_argument("--out", default=None, help="output directory (default: print summary only)")
    sim.add_argument("--store-trajectory", type=int, default=0, metavar="STRIDE",
                     help="store every STRIDE-th state in trajectory.csv")

    conv = sub.add_parser("converge", help="self-convergence study over mesh refinements")
    conv.add_argument("--config", required=True, help="base scenario file (refinement 0)")
    conv.add_argument("--eps", default="0", help="comma-separated scaling parameters")
    conv.add_argument("--refinements", type=int, default=6)
    conv.add_argument("--out", default=None, help="output file (default stdout)")
    conv.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    conv.add_argument("--flux-norm", choices=("nodal", "l2"), default="nodal",
                      help="flux error measure: nodal coefficient norm (matches "
                           "the reference tables) or exact L2")

    res = sub.add_parser("rescale", help="map physical pipe data to dimensionless parameters")
    res.add_argument("--eps", type=float, required=True)
    res.add_argument("--length", type=float, required=True, help="pipe length [m]")
    res.add_argument("--diameter", type=float, required=True, help="pipe diameter [m]")
    res.add_argument("--friction-lambda", type=float, required=True)
    res.add_argument("--sound-speed", type=float, default=340.0)
    res.add_argument("--horizon", type=float, default=3600.0, help="time horizon [s]")

    gl = sub.add_parser("gaslib11", help="emit the built-in 8-pipe benchmark network as a scenario file")
    gl.add_argument("--out", default=None)
    gl.add_argument("--cells", type=int, default=16)
    gl.add_argument("--eps", type=float, default=0.0)

    return parser


def _cmd_simulate(args):
    scenario = load_scenario(args.config)
    if args.eps is not None:
        scenario = scenario.with_eps(float(args.eps))
    result = simulate(scenario, store_stride=args.store_trajectory)
    last = result.reports[-1]
    print(f"completed {len(result.reports)} steps to tau = {last.tau}")
    print(f"final energy {last.energy:.6e}, worst energy-inequality slack "
          f"{result.worst_slack:.3e}, all steps admissible: {result.all_admissible}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "steps.csv"), "w", encoding="utf-8") as fh:
            fh.write(step_reports_csv(result.reports))
        if args.store_trajectory:
            with open(os.path.join(args.out, "trajectory.csv"), "w", encoding="utf-8") as fh:
                fh.write(trajectory_csv(result.states, scenario.topo))
        print(f"wrote {args.out}/steps.csv"
              + (f" and {args.out}/trajectory.csv" if args.store_trajectory else ""))
    return 0


def _cmd_converge(args):
    scenario = load_scenario(args.config)
    report = run_convergence_study(scenario, args.refinements,
                                   _parse_eps_list(args.eps),
                                   flux_norm=args.flux_norm)
    _write(args.out, emit_report(report, args.format))
    return 0


def _cmd_rescale(args):
    params = PhysicalParams(
        length=args.length, diameter=args.diameter,
        friction_lambda=args.friction_lambda,
        sound_speed=args.sound_speed, horizon=args.horizon,
    )
    setup = rescale_physical(params, args.eps)
    s = setup.scaling
    print(f"eps               = {s.epsilon!r}")
    print(f"gamma             = {s.gamma!r}")
    print(f"area              = {s.area!r}")
    print(f"rescaled length   = {s.ell!r}")
    print(f"time factor       = {setup.time_factor!r}   (tau per once-rescaled t)")
    print(f"velocity factor   = {setup.velocity_factor!r}   (w per physical v)")
    print(f"length factor     = {setup.length_factor!r}   (rescaled x per physical x)")
    print(f"composite time    = {setup.composite_time_factor!r}   (tau per physical t)")
    print(f"lambda round-trip = {setup.friction_lambda()!r}")
    return 0


def _cmd_gaslib11(args):
    topo, boundary = gaslib11(cells=args.cells)
    text = scenario_text(topo, boundary, params={
        "eps": args.eps, "sound_speed": 1.0, "tau_max": 1.0,
        "dt": 1.0 / 32.0, "label": "gaslib11",
    })
    _write(args.out, text)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "converge": _cmd_converge,
    "rescale": _cmd_rescale,
    "gaslib11": _cmd_gaslib11,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PipeflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
