"""Command-line convergence-study harness.

Runs the cascade for one manufactured problem and emits the per-level
error/order/work-unit table as markdown and/or CSV.  Exit codes: 0 on
success, 1 on a usage error, 2 when a solve fails to converge.

Example::

    excmg3d --problem 1 --bc first --coarse-n 8 --levels 2 --eps 1e-10 --out reports
"""

import argparse
import sys

from .cascade import ExcmgConfig, RunMode, excmg_run
from .problems import validate_forcing
from .report import emit_report, render_markdown
from .solvers import PrecondKind
from .stencil import BcKind

_PRECOND = {"none": PrecondKind.IDENTITY, "jacobi": PrecondKind.JACOBI}
_BC = {"first": BcKind.FIRST, "second": BcKind.SECOND}


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="excmg3d",
        description="Cascadic-multigrid convergence study for the 3D "
                    "biharmonic equation on the unit cube.",
    )
    p.add_argument("--problem", type=int, choices=[1, 2, 3, 4, 5], required=True,
                   help="manufactured test problem")
    p.add_argument("--bc", choices=["first", "second"], default="first",
                   help="boundary-condition kind (default: first)")
    p.add_argument("--coarse-n", type=int, default=8,
                   help="intervals per axis on the coarsest grid (default: 8)")
    p.add_argument("--levels", type=int, default=3,
                   help="number of Bi-CG-iterated levels above the two "
                        "direct-solve grids (default: 3)")
    p.add_argument("--eps", type=float, default=1e-10,
                   help="finest-level relative-residual target (default: 1e-10)")
    p.add_argument("--precond", choices=["none", "jacobi"], default="jacobi",
                   help="Bi-CG preconditioner (default: jacobi)")
    p.add_argument("--mode", choices=["excmg", "baseline", "both"],
                   default="excmg",
                   help="'baseline' repeats the run with a zero initial guess "
                        "on the finest level; 'both' runs both")
    p.add_argument("--literal-forcing", action="store_true",
                   help="problem 3 only: use the commonly misprinted forcing "
                        "f = u (inconsistent with the exact solution; for "
                        "demonstration)")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--format", choices=["csv", "markdown", "both"],
                   default="both", help="report format(s) to write")
    p.add_argument("--max-iters", type=int, default=None,
                   help="per-level Bi-CG iteration cap (default: automatic)")
    p.add_argument("--seed", type=int, default=0,
                   help="offset for forcing-validation points and the "
                        "randomized Bi-CG restart shadow")
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    if args.levels < 1:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: --levels must be >= 1", file=sys.stderr)
        return 1
    if args.coarse_n < 4:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: --coarse-n must be >= 4", file=sys.stderr)
        return 1
    if args.eps <= 0:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: --eps must be positive", file=sys.stderr)
        return 1

    check = validate_forcing(args.problem, samples=100, tol=1e-5,
                             literal_forcing=args.literal_forcing,
                             seed=args.seed)
    print(check.describe())
    if not check.passed:
        if args.literal_forcing:
            print("continuing with the literal forcing variant; errors against "
                  "the exact solution will not converge")
        else:
            print("forcing formula inconsistent with its exact solution; aborting",
                  file=sys.stderr)
            return 2

    modes = [RunMode.EXCMG, RunMode.BASELINE] if args.mode == "both" \
        else [RunMode(args.mode)]
    ok = True
    for mode in modes:
        config = ExcmgConfig(
            problem=args.problem,
            bc_kind=_BC[args.bc],
            coarse_n=args.coarse_n,
            extra_levels=args.levels,
            eps=args.eps,
            precond=_PRECOND[args.precond],
            mode=mode,
            max_iters_per_level=args.max_iters,
            literal_forcing=args.literal_forcing,
            seed=args.seed,
        )
        report = excmg_run(config)
        print(render_markdown(report))
        paths = emit_report(report, fmt=args.format, out_dir=args.out)
        for path in paths:
            print(f"wrote {path}")
        if not report.success:
            print("warning: at least one level did not reach its tolerance",
                  file=sys.stderr)
            ok = False
    return 0 if ok else 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
