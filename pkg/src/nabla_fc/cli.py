"""Command-line front end.

Exit codes: 0 success, 1 inequality violation, 2 usage, 3 data, 4 solver.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import HistoryError, ParameterError, SolverError
from .kernel import gl_diff_weights, gl_sum_weights
from .lyapunov import SuiteConfig, run_property_suite
from .operators import Definition, difference_series, gl_series
from .optimizer import (
    certificate_check,
    descent_bound,
    fractional_gradient_descent,
    rosenbrock,
)
from .signal import SampledSignal
from .simulator import BUILTIN_SYSTEMS, SolverConfig, Trajectory, builtin_system, simulate
from .svg import write_line_plot

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3, 4

SEED_ENV = "NABLA_FC_SEED"
EXAMPLE_HORIZONS = {1: 200, 2: 200, 3: 500}
LIST_FLAGS = ("--matrix", "--x0")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    outputs: list[str]
    argv: list[str]
    toolVersion: str = __version__
    extra: dict = field(default_factory=dict)

    def write(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _fmt(v) -> str:
    return repr(float(v))


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _manifest_path(out) -> Path:
    return Path(str(out) + ".manifest.json")


def _write_manifest(args, outputs, seed=None, extra=None):
    outputs = [str(o) for o in outputs if o not in (None, "-")]
    if not outputs:
        return None
    params = {k: v for k, v in vars(args).items() if k not in ("func", "argv")}
    m = RunManifest(args.command, params, seed, outputs, list(args.argv), extra=extra or {})
    path = _manifest_path(outputs[0])
    m.write(path)
    return path


# -- weights -------------------------------------------------------------------


def cmd_weights(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    table = (gl_diff_weights if args.kind == "diff" else gl_sum_weights)(args.alpha, args.count)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "weight"])
        for j, v in enumerate(table.values):
            w.writerow([j, _fmt(v)])
    finally:
        if close:
            fh.close()
    _write_manifest(args, [args.out])
    return EXIT_OK


# -- diff ----------------------------------------------------------------------


def read_signal_csv(path, base: int | None = None) -> SampledSignal:
    """Parse ``k,x`` or ``k,x1,...,xd`` rows with contiguous ``k`` starting at ``a - 1``."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise UsageError("CSV needs a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    if header[0] != "k" or len(header) < 2:
        raise UsageError("CSV header must start with 'k' followed by value columns")
    try:
        ks = np.array([int(r[0]) for r in rows[1:]])
        vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise UsageError(f"malformed CSV row: {exc}") from exc
    if vals.ndim != 2 or vals.shape[1] != len(header) - 1:
        raise UsageError("rows must match the header width")
    if not np.all(np.isfinite(vals)):
        raise UsageError("CSV values must be finite")
    if np.any(np.diff(ks) != 1):
        raise UsageError("k must be contiguous and increasing")
    a = int(ks[0]) + 1 if base is None else int(base)
    if ks[0] != a - 1:
        raise DataError(f"signal must start at k = a - 1 = {a - 1}, found {ks[0]}")
    values = vals[:, 0] if vals.shape[1] == 1 else vals
    return SampledSignal(values, base=a, history=1)


def diff_values(signal: SampledSignal, alpha: float, definition: str, memory=None):
    """Values and grid of the selected difference at every admissible ``k``."""
    if definition == "gl-mod":
        if memory is not None:
            raise UsageError("--memory does not combine with gl-mod")
        if signal.k_max < signal.base + 1:
            raise DataError("gl-mod needs samples beyond k = a")
        shifted = SampledSignal(signal.values[2:], base=signal.base + 1, history=0)
        return np.arange(signal.base + 1, signal.k_max + 1), gl_series(shifted, alpha)
    if signal.k_max < signal.base:
        raise DataError("signal holds no samples at k >= a")
    if definition != "gl" and not 0 < alpha < 1:
        raise UsageError("--alpha must lie in (0, 1) for rl and caputo")
    vals = difference_series(signal, alpha, Definition(definition), memory)
    return np.arange(signal.base, signal.k_max + 1), vals


def cmd_diff(args) -> int:
    if args.memory is not None and args.memory < 0:
        raise UsageError("--memory must be >= 0")
    signal = read_signal_csv(args.input, args.base)
    ks, vals = diff_values(signal, args.alpha, args.definition, args.memory)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        if vals.ndim == 1:
            w.writerow(["k", "value"])
            for k, v in zip(ks, vals):
                w.writerow([int(k), _fmt(v)])
        else:
            w.writerow(["k", *(f"value{i + 1}" for i in range(vals.shape[1]))])
            for k, row in zip(ks, vals):
                w.writerow([int(k), *(_fmt(v) for v in row)])
    finally:
        if close:
            fh.close()
    _write_manifest(args, [args.out])
    return EXIT_OK


# -- verify --------------------------------------------------------------------


def effective_seed(seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return seed
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def cmd_verify(args) -> int:
    seed = effective_seed(args.seed)
    try:
        cfg = SuiteConfig(trials=args.trials, max_len=args.max_len,
                          value_range=(args.value_min, args.value_max),
                          alpha_range=(args.alpha_min, args.alpha_max), seed=seed,
                          tolerance=args.tolerance, family=args.family)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = run_property_suite(cfg)
    text = report.to_json(indent=2)
    if args.out in (None, "-"):
        print(text)
    else:
        Path(args.out).write_text(text + "\n")
    for p in report.pairs:
        status = "ok" if p.violations == 0 else "VIOLATED"
        print(f"{p.kind:20s} {p.definition:7s} {p.variant:15s} maxGap={p.max_gap:+.3e} "
              f"violations={p.violations} {status}", file=sys.stderr)
    _write_manifest(args, [args.out], seed=seed)
    return EXIT_OK if report.passed else EXIT_VIOLATION


# -- simulate / optimize ---------------------------------------------------------


def _run_with_partial(spec, steps, out):
    """Simulate; on solver failure write the accepted prefix and re-raise."""
    states = [spec.initial_state.copy()]
    iters = [0]

    def keep(k, x, its):
        states.append(np.array(x))
        iters.append(its)

    try:
        return simulate(spec, steps, on_step=keep)
    except SolverError as exc:
        if out not in (None, "-"):
            partial = Trajectory(np.array(states), spec.base, iters)
            partial.write_csv(out, trailer=f"FAILED at k={exc.k}")
        raise


def _state_plot(path, traj: Trajectory, title: str):
    series = {f"x{i + 1}": (traj.grid, traj.states[:, i]) for i in range(traj.states.shape[1])}
    write_line_plot(path, series, title=title, xlabel="k", ylabel="state")


def _simulate(args):
    x0 = args.x0
    try:
        if args.system == "linear":
            if args.matrix is None:
                raise UsageError("--matrix is required for the linear system")
            d = int(round(len(args.matrix) ** 0.5))
            if d * d != len(args.matrix):
                raise UsageError("--matrix must list d*d entries in row-major order")
            matrix = np.array(args.matrix).reshape(d, d)
            if x0 is None:
                raise UsageError("--x0 is required for the linear system")
        else:
            matrix = None
        solver = SolverConfig(tolerance=args.tolerance, method=args.method)
        spec = builtin_system(args.system, matrix=matrix, alpha=args.alpha,
                              initial_state=x0, base=args.base, solver=solver)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    if len(spec.initial_state) != 2 and args.system != "linear":
        raise UsageError("example systems are two-dimensional")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    traj = _run_with_partial(spec, args.steps, args.out)
    return spec, traj


def cmd_simulate(args) -> int:
    spec, traj = _simulate(args)
    traj.write_csv(args.out)
    outputs = [args.out]
    if args.plot:
        _state_plot(args.plot, traj, f"State response ({spec.name}, alpha={spec.alpha:g})")
        outputs.append(args.plot)
    print(f"final state {traj.states[-1].tolist()}, max defect residual {traj.max_residual:.3e}",
          file=sys.stderr)
    _write_manifest(args, outputs, extra={"max_residual": traj.max_residual})
    return EXIT_OK


def _optimize(args):
    if not args.rho > 0:
        raise UsageError("--rho must be positive")
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if len(args.x0) != 2:
        raise UsageError("--x0 needs two entries")
    solver = SolverConfig(tolerance=args.tolerance)
    try:
        return fractional_gradient_descent(rosenbrock(), args.alpha, args.rho, args.x0,
                                           args.steps, base=args.base, solver=solver)
    except SolverError as exc:
        if args.out not in (None, "-"):
            Path(args.out).write_text(f"k,x1,x2,iters\n# FAILED at k={exc.k}\n")
        raise


def _optimizer_outputs(run, out, values_out, plot):
    run.trajectory.write_csv(out)
    run.write_values_csv(values_out)
    outputs = [out, values_out]
    if plot:
        _state_plot(plot, run.trajectory, f"Search process (alpha={run.alpha:g}, rho={run.rho:g})")
        stem = Path(plot).with_suffix("")
        path_svg = f"{stem}_path.svg"
        obj_svg = f"{stem}_objective.svg"
        s = run.trajectory.states
        write_line_plot(path_svg, {"(x1, x2)": (s[:, 0], s[:, 1])}, title="Search path",
                        xlabel="x1", ylabel="x2")
        write_line_plot(obj_svg, {"f": (run.trajectory.grid, run.objective_values)},
                        title="Objective value", xlabel="k", ylabel="f(x(k))")
        outputs += [plot, path_svg, obj_svg]
    return outputs


def cmd_optimize(args) -> int:
    if args.out in (None, "-"):
        raise UsageError("--out is required")
    run = _optimize(args)
    values_out = args.values or str(Path(args.out).with_suffix("")) + "_f.csv"
    outputs = _optimizer_outputs(run, args.out, values_out, args.plot)
    cert = certificate_check(run)
    print(f"final point {run.final_point.tolist()}, f = {run.objective_values[-1]:.6e}, "
          f"certificate max gap {cert.max_gap:+.3e}", file=sys.stderr)
    _write_manifest(args, outputs, extra={"certificate_violations": cert.violations})
    return EXIT_OK


# -- example -------------------------------------------------------------------


def cmd_example(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    steps = args.steps or EXAMPLE_HORIZONS[args.number]
    stem = outdir / f"example{args.number}"
    if args.number in (1, 2):
        sim_args = argparse.Namespace(system=f"example{args.number}", matrix=None, alpha=0.8,
                                      x0=[2.0, -1.0], steps=steps, base=0, out=f"{stem}.csv",
                                      tolerance=1e-12, method="newton")
        spec, traj = _simulate(sim_args)
        traj.write_csv(f"{stem}.csv")
        _state_plot(f"{stem}.svg", traj, f"State response, example {args.number} (alpha=0.8)")
        outputs = [f"{stem}.csv", f"{stem}.svg"]
        extra = {"max_residual": traj.max_residual, "final_state": traj.states[-1].tolist()}
    else:
        opt_args = argparse.Namespace(alpha=0.8, rho=2.0, x0=[2.0, -1.0], steps=steps, base=0,
                                      out=f"{stem}.csv", tolerance=1e-12)
        run = _optimize(opt_args)
        outputs = _optimizer_outputs(run, f"{stem}.csv", f"{stem}_f.csv", f"{stem}.svg")
        cert = certificate_check(run)
        extra = {"max_residual": run.trajectory.max_residual,
                 "final_state": run.final_point.tolist(),
                 "certificate_max_gap": cert.max_gap,
                 "descent_bound_max": float(descent_bound(run).max())}
    manifest = _write_manifest(args, outputs, extra=extra)
    print(json.dumps({"outputs": outputs, "manifest": str(manifest), **extra}, indent=2))
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        data = json.loads(Path(args.manifest).read_text())
        argv = list(data["argv"])
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read manifest: {exc}") from exc
    return main(argv)


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nabla-fc",
                                description="Nabla discrete fractional calculus toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("weights", help="fractional weight table as CSV")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--kind", choices=("diff", "sum"), default="diff")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("diff", help="fractional difference of a CSV signal")
    s.add_argument("--input", required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--def", dest="definition", choices=("gl", "rl", "caputo", "gl-mod"),
                   default="caputo")
    s.add_argument("--memory", type=int, default=None, help="fixed memory length K")
    s.add_argument("--base", type=int, default=None, help="base a (default: first k + 1)")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_diff)

    s = sub.add_parser("verify", help="randomized Lyapunov inequality suite")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--max-len", type=int, default=50)
    s.add_argument("--alpha-min", type=float, default=0.05)
    s.add_argument("--alpha-max", type=float, default=0.95)
    s.add_argument("--value-min", type=float, default=-2.0)
    s.add_argument("--value-max", type=float, default=2.0)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--tolerance", type=float, default=1e-9)
    s.add_argument("--family", choices=("standard", "fixed_memory", "variable_order"),
                   default="standard")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="simulate a builtin or linear Caputo system")
    s.add_argument("--system", choices=BUILTIN_SYSTEMS, required=True)
    s.add_argument("--matrix", type=_float_list, default=None, help="row-major entries")
    s.add_argument("--alpha", type=float, default=0.8)
    s.add_argument("--x0", type=_float_list, default=None, help="x(a-1), comma-separated")
    s.add_argument("--steps", type=int, default=200)
    s.add_argument("--base", type=int, default=0)
    s.add_argument("--tolerance", type=float, default=1e-12)
    s.add_argument("--method", choices=("newton", "fixed_point"), default="newton")
    s.add_argument("--out", required=True)
    s.add_argument("--plot", default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("optimize", help="fractional gradient flow on the Rosenbrock-type objective")
    s.add_argument("--alpha", type=float, default=0.8)
    s.add_argument("--rho", type=float, default=2.0)
    s.add_argument("--x0", type=_float_list, default=[2.0, -1.0])
    s.add_argument("--steps", type=int, default=500)
    s.add_argument("--base", type=int, default=0)
    s.add_argument("--tolerance", type=float, default=1e-12)
    s.add_argument("--out", required=True)
    s.add_argument("--values", default=None, help="objective CSV (default: <out>_f.csv)")
    s.add_argument("--plot", default=None)
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("example", help="reproduce one of the three worked examples")
    s.add_argument("number", type=int, choices=(1, 2, 3))
    s.add_argument("--outdir", default=".")
    s.add_argument("--steps", type=int, default=None, help="override the default horizon")
    s.set_defaults(func=cmd_example)

    s = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_replay)
    return p


def _join_list_flags(argv: list[str]) -> list[str]:
    # argparse reads "--matrix -1,0" as two flags; glue list values to their flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] in LIST_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = _join_list_flags(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nabla-fc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, HistoryError) as exc:
        print(f"nabla-fc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"nabla-fc: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
