"""Command-line driver.

Exit codes: 0 success, 1 I/O failure, 2 usage or domain error, 3 a
verification check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path as FsPath

from . import experiments as ex
from .distributions import (
    DomainError,
    GammaGhParams,
    GigParams,
    IgParams,
    charfn_gamma_gh,
    gig_norm_constant,
    pdf_gamma_gh,
    pdf_gig_gh,
    pdf_ig_gh,
)
from .paths import Path, center_path, simulate_brownian, simulate_path
from .rng import make_stream
from .variation import quadratic_variation, theory_constants, total_variation

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_CHECK = 0, 1, 2, 3

FIGURE_A_VALUES = (0.5, 1.0, 3.0, 10.0)


class _Usage(Exception):
    pass


def _cells_list(text: str) -> list[int]:
    try:
        cells = [int(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not cells or any(c < 1 for c in cells):
        raise argparse.ArgumentTypeError("cell counts must be positive")
    return cells


def _common(n_default: int | None = 500, mu_default: float = 1.0) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("law parameters")
    g.add_argument("--a", type=float, default=1.0, help="gamma shape per unit time (default 1)")
    g.add_argument("--b", "--beta", dest="b", type=float, default=1.0, help="mixing rate beta (default 1)")
    g.add_argument("--mu", type=float, default=mu_default, help=f"drift (default {mu_default:g})")
    g.add_argument("--sigma", type=float, default=0.5, help="scale (default 0.5)")
    g.add_argument("--T", type=float, default=1.0, help="horizon / time scale (default 1)")
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p.add_argument("--out", default="-", help="output path, '-' for standard output (default)")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gammagh", description="Gamma-GH Levy process workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[_common()], help="simulate one path, write t,value CSV")
    sim.add_argument("--n", type=int, default=500, help="number of cells (default 500)")
    sim.add_argument("--brownian", action="store_true", help="simulate the Brownian comparison walk instead")
    sim.add_argument("--centered", action="store_true", help="subtract the drift mu t")

    fig = sub.add_parser("figures", parents=[_common()], help="write the four gamma-GH figure paths and a Brownian one")
    fig.add_argument("--n", type=int, default=500, help="number of cells (default 500)")
    fig.add_argument("--paired", action="store_true", help="share the normal draws across all figures")
    fig.add_argument("--centered", action="store_true", help="subtract the drift mu t")
    fig.set_defaults(out="figures")

    exp = sub.add_parser("experiment", help="run a Monte Carlo verification; exit 3 if a check fails")
    exp_sub = exp.add_subparsers(dest="experiment", required=True)
    var = exp_sub.add_parser("variation", parents=[_common(mu_default=0.0)], help="total variation moments")
    var.add_argument("--cells", type=int, default=4096, help="uniform cell count (default 4096)")
    var.add_argument("--reps", type=int, default=10_000, help="replications (default 10000)")
    var.add_argument("--var-tol", type=float, default=0.05, help="relative variance tolerance (default 0.05)")
    qv = exp_sub.add_parser("qv", parents=[_common(mu_default=0.0)], help="quadratic variation plateau")
    qv.add_argument("--cells", type=_cells_list, default=[256, 1024, 4096, 16384],
                    help="comma-separated increasing cell counts (default 256,1024,4096,16384)")
    qv.add_argument("--reps", type=int, default=10_000, help="replications per mesh (default 10000)")
    qv.add_argument("--var-tol", type=float, default=0.10, help="relative variance tolerance (default 0.10)")
    cf = exp_sub.add_parser("charfn", parents=[_common()], help="empirical vs exact characteristic function")
    cf.add_argument("--n", type=int, default=100_000, help="number of samples (default 100000)")
    idc = exp_sub.add_parser("idecomp", parents=[_common()], help="sums of n parts vs direct draws (KS)")
    idc.add_argument("--parts", type=int, default=10, help="number of parts (default 10)")
    idc.add_argument("--n", type=int, default=100_000, help="samples per arm (default 100000)")
    fdd = exp_sub.add_parser("fdd", parents=[_common()], help="finite-dimensional convergence of Y_n")
    fdd.add_argument("--n", type=int, default=500, help="grid size of the construction (default 500)")
    fdd.add_argument("--reps", type=int, default=100_000, help="number of simulated paths (default 100000)")
    fdd.add_argument("--t1", type=float, default=0.3, help="first time (default 0.3)")
    fdd.add_argument("--t2", type=float, default=0.7, help="second time (default 0.7)")
    for p in (var, qv, cf, idc, fdd):
        p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")

    ev = sub.add_parser("eval", help="evaluate densities, characteristic function, constants")
    ev_sub = ev.add_subparsers(dest="what", required=True)
    pdf = ev_sub.add_parser("pdf", parents=[_common()], help="density at --u")
    pdf.add_argument("--dist", choices=("gamma", "ig", "gig"), default="gamma", help="mixing law (default gamma)")
    pdf.add_argument("--c", type=float, default=1.0, help="GIG c parameter (default 1)")
    pdf.add_argument("--u", type=float, required=True)
    chf = ev_sub.add_parser("charfn", parents=[_common()], help="characteristic function at --u over time --T")
    chf.add_argument("--u", type=float, required=True)
    const = ev_sub.add_parser("constant", parents=[_common()], help="I1, I2, E1, E2 and C(a, b, c)")
    const.add_argument("--c", type=float, default=0.0, help="GIG c parameter (default 0)")
    return parser


def _params(args) -> GammaGhParams:
    return GammaGhParams(args.a, args.b, args.mu, args.sigma)


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n", encoding="ascii") as fh:
            fh.write(text)


def _path_text(path: Path, fmt: str | None) -> str:
    if fmt == "json":
        return json.dumps({"t": path.grid().tolist(), "value": path.prefix.tolist()}) + "\n"
    return path.to_csv()


def cmd_simulate(args) -> int:
    if args.n < 1 or not args.T > 0:
        raise _Usage("--n must be >= 1 and --T > 0")
    rng = make_stream(args.seed, 0)
    if args.brownian:
        path = simulate_brownian(args.T, args.n, rng)
    else:
        p = _params(args)
        path = simulate_path(p, args.T, args.n, rng)
        if args.centered:
            path = center_path(path, p)
    _emit(_path_text(path, args.format), args.out)
    summary = (
        f"terminal {path.prefix[-1]:.15g}\n"
        f"total_variation {total_variation(path.increments):.15g}\n"
        f"quadratic_variation {quadratic_variation(path.increments):.15g}\n"
    )
    (sys.stderr if args.out == "-" else sys.stdout).write(summary)
    return EXIT_OK


def figure_name(a: float) -> str:
    return "fig_a" + f"{a:g}".replace(".", "p") + ".csv"


def cmd_figures(args) -> int:
    if args.n < 1 or not args.T > 0:
        raise _Usage("--n must be >= 1 and --T > 0")
    outdir = FsPath(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for k, a in enumerate(FIGURE_A_VALUES):
        p = GammaGhParams(a, args.b, args.mu, args.sigma)
        rng = make_stream(args.seed, 0 if args.paired else k)
        path = simulate_path(p, args.T, args.n, rng)
        if args.centered:
            path = center_path(path, p)
        target = outdir / figure_name(a)
        target.write_text(path.to_csv(), encoding="ascii")
        written.append(target)
    rng = make_stream(args.seed, 0 if args.paired else len(FIGURE_A_VALUES))
    target = outdir / "fig_brownian.csv"
    target.write_text(simulate_brownian(args.T, args.n, rng).to_csv(), encoding="ascii")
    written.append(target)
    for w in written:
        print(w)
    return EXIT_OK


def cmd_experiment(args) -> int:
    p = _params(args)
    kind = args.experiment
    if kind == "variation":
        cfg = ex.MonteCarloConfig(p, args.reps, args.seed, args.T, cells=args.cells,
                                  var_rel_tol=args.var_tol, workers=args.workers)
        reports = [ex.run_variation_experiment(cfg)]
    elif kind == "qv":
        cfg = ex.MonteCarloConfig(p, args.reps, args.seed, args.T, cells=args.cells[0],
                                  var_rel_tol=args.var_tol, workers=args.workers)
        reports = ex.run_qv_experiment(cfg, args.cells)
    elif kind == "charfn":
        cfg = ex.MonteCarloConfig(p, args.n, args.seed, args.T, workers=args.workers)
        reports = [ex.run_charfn_check(cfg)]
    elif kind == "idecomp":
        reports = [ex.run_idecomp_check(p, args.parts, args.n, args.seed, workers=args.workers)]
    else:
        reports = [ex.run_fdd_check(p, args.T, args.n, (args.t1, args.t2), args.reps, args.seed,
                                    workers=args.workers)]
    passed = all(r.passed for r in reports)
    if args.format == "csv":
        if not isinstance(reports[0], ex.MomentReport):
            raise _Usage(f"--format csv is only available for moment experiments, not {kind}")
        text = ex.moment_csv(reports)
    else:
        text = ex.to_json({"experiment": kind, "passed": passed, "reports": [r.to_dict() for r in reports]})
    _emit(text, args.out)
    return EXIT_OK if passed else EXIT_CHECK


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def cmd_eval(args) -> int:
    if args.what == "pdf":
        if args.dist == "gamma":
            val = pdf_gamma_gh(_params(args), args.u)
            if math.isinf(val):
                print("note: density is singular at u = mu when a <= 1/2", file=sys.stderr)
        elif args.dist == "ig":
            val = pdf_ig_gh(IgParams(args.a, args.b), args.mu, args.sigma, args.u)
        else:
            val = pdf_gig_gh(GigParams(args.a, args.b, args.c), args.mu, args.sigma, args.u)
        _emit(_fmt(val) + "\n", args.out)
    elif args.what == "charfn":
        z = charfn_gamma_gh(_params(args), args.T, args.u)
        _emit(f"{_fmt(z.real)} {_fmt(z.imag)}\n", args.out)
    else:
        c = theory_constants()
        lines = [f"I1 {_fmt(c.I1)}", f"I2 {_fmt(c.I2)}", f"E1 {_fmt(c.E1)}", f"E2 {_fmt(c.E2)}",
                 f"C {_fmt(gig_norm_constant(GigParams(args.a, args.b, args.c)))}"]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "figures": cmd_figures, "experiment": cmd_experiment, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, _Usage, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
