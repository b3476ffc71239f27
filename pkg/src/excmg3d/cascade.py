"""One-way coarse-to-fine cascade driver with extrapolated initial guesses.

The two coarsest grids are solved directly; every finer level builds its
initial guess by extrapolating the two previous solutions and polishes it
with preconditioned Bi-CG down to a per-level relative-residual tolerance

    tol_i = eps * 10**(i - L),   i = 1..L,

i.e. coarse levels are solved progressively tighter than the finest target
eps.  After the finest solve, the two finest solutions are extrapolated once
more into a higher-order approximation of the true solution.

Costs are reported in work units: one sweep on the finest grid costs 1, and a
sweep on a grid d doublings below the finest costs 8**-d.  The direct solves
on the two coarsest grids are excluded (their cost is negligible at the
scales of interest and they perform no sweeps).
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from .extrapolate import higher_order_solution, predict_fine_solution
from .grid import Field, build_hierarchy, norm
from .problems import get_problem, sample_boundary, sample_exact, sample_forcing
from .report import error_ratio
from .solvers import PrecondKind, bicg_solve, dsolve, make_preconditioner
from .stencil import BcKind, assemble_system, paint_boundary, residual

MAX_ITERS_CAP = 50000


class RunMode(Enum):
    EXCMG = "excmg"          # extrapolated initial guess on every level
    BASELINE = "baseline"    # identical ladder, but zero guess on the finest level


@dataclass
class ExcmgConfig:
    """Configuration of one cascade run."""

    problem: int
    bc_kind: BcKind = BcKind.FIRST
    coarse_n: int = 8
    extra_levels: int = 3            # L: number of Bi-CG-iterated levels
    eps: float = 1e-10               # finest-level relative-residual target
    precond: PrecondKind = PrecondKind.JACOBI
    mode: RunMode = RunMode.EXCMG
    max_iters_per_level: int | None = None
    literal_forcing: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.coarse_n < 4:
            raise ValueError("coarse_n must be >= 4")
        if self.extra_levels < 1:
            raise ValueError("extra_levels must be >= 1")


@dataclass
class LevelReport:
    """Per-level record: grid size, work, and errors against the exact solution."""

    n: int
    iterations: int
    err_l2: float
    err_max: float
    relres: float
    guess_gap_l2: float | None = None   # |guess - solution|_2; None on direct levels
    error_ratio: float | None = None    # guess gap / discretization error (L2)
    tol: float | None = None            # None on direct-solve levels
    converged: bool = True


@dataclass
class RunReport:
    """Full record of one cascade run."""

    config: ExcmgConfig
    levels: list
    extrap_err_l2: float
    extrap_err_max: float
    work_units: float
    breakdown: bool = False
    direct_levels: int = 2
    _fields: dict = field(default_factory=dict, repr=False)

    @property
    def success(self) -> bool:
        return not self.breakdown and all(lv.converged for lv in self.levels)

    @property
    def finest(self) -> LevelReport:
        return self.levels[-1]


def tolerance_schedule(level_index: int, total: int, eps: float) -> float:
    """Relative-residual target for iterated level ``level_index`` of ``total``."""
    if not 1 <= level_index <= total:
        raise ValueError(
            f"level index {level_index} outside 1..{total}"
        )
    return eps * 10.0 ** (level_index - total)


def work_units(iters_per_level) -> float:
    """Total cost in finest-grid sweeps of the given per-level sweep counts
    (ordered coarse to fine; one doubling costs a factor 8 less per sweep)."""
    iters = list(iters_per_level)
    if not iters:
        raise ValueError("need at least one level")
    depth = len(iters) - 1
    return float(sum(it * 8.0 ** (idx - depth) for idx, it in enumerate(iters)))


def convergence_orders(errors) -> list:
    """Observed orders log2(e_prev / e_next) between consecutive levels."""
    errors = list(errors)
    if len(errors) < 2:
        raise ValueError("need errors from at least two levels")
    if any(e <= 0.0 for e in errors):
        raise ValueError("errors must be positive")
    return [math.log2(errors[i - 1] / errors[i]) for i in range(1, len(errors))]


def default_max_iters(n: int) -> int:
    """Generous per-level iteration guard: 100 sweeps per 0.1 of the cube root
    of the unknown count, capped."""
    return min(MAX_ITERS_CAP, 1000 * (n - 1))


def _error_norms(u: Field, exact: Field):
    diff = Field.zeros(u.grid)
    diff.interior[...] = u.interior - exact.interior
    return norm(diff, "rms"), norm(diff, "max")


def excmg_run(config: ExcmgConfig, keep_fields: bool = False) -> RunReport:
    """Run the full cascade and return its report.

    With ``keep_fields=True`` the report's ``_fields`` dict retains the final
    solution, the finest initial guess and the extrapolated solution (used by
    diagnostics and tests; large on fine grids).
    """
    problem = get_problem(config.problem, config.literal_forcing)
    hier = build_hierarchy(config.coarse_n, config.extra_levels)
    total = config.extra_levels

    level_reports = []
    prev = None       # solution on the previous level
    prev2 = None      # solution two levels back
    breakdown = False
    finest_bc = None
    finest_guess = None

    for li, grid in enumerate(hier.levels):
        bc = sample_boundary(problem, grid, config.bc_kind)
        system = assemble_system(sample_forcing(problem, grid), bc)
        exact = sample_exact(problem, grid)

        if li < 2:
            u = dsolve(system)
            _, relres = residual(system, u)
            report = LevelReport(
                n=grid.n, iterations=0, err_l2=0.0, err_max=0.0,
                relres=relres,
            )
        else:
            sched_index = li - 1  # 1..L
            tol = tolerance_schedule(sched_index, total, config.eps)
            is_finest = li == hier.total_levels - 1
            use_zero_guess = (config.mode is RunMode.BASELINE) and is_finest
            guess = None
            if not use_zero_guess:
                guess = predict_fine_solution(prev, prev2, bc)
            x0 = Field.zeros(grid) if use_zero_guess else guess
            max_iters = config.max_iters_per_level or default_max_iters(grid.n)
            precond = make_preconditioner(config.precond, system)
            u, stats = bicg_solve(system, precond, system.rhs, x0, tol,
                                  max_iters, shadow_seed=config.seed)
            paint_boundary(u, bc)
            breakdown = breakdown or stats.breakdown
            report = LevelReport(
                n=grid.n, iterations=stats.iterations, err_l2=0.0, err_max=0.0,
                relres=stats.final_relres, tol=tol, converged=stats.converged,
            )
            if guess is not None:
                gap = Field.zeros(grid)
                gap.interior[...] = guess.interior - u.interior
                report.guess_gap_l2 = norm(gap, "rms")
                report.error_ratio = error_ratio(guess, u, exact)
            if is_finest:
                finest_bc = bc
                finest_guess = guess

        report.err_l2, report.err_max = _error_norms(u, exact)
        level_reports.append(report)
        prev2, prev = prev, u

    extrapolated = higher_order_solution(prev, prev2, finest_bc)
    exact_fine = sample_exact(problem, hier.finest)
    extrap_l2, extrap_max = _error_norms(extrapolated, exact_fine)

    run = RunReport(
        config=config,
        levels=level_reports,
        extrap_err_l2=extrap_l2,
        extrap_err_max=extrap_max,
        work_units=work_units([lv.iterations for lv in level_reports]),
        breakdown=breakdown,
    )
    if keep_fields:
        run._fields = {
            "solution": prev,
            "extrapolated": extrapolated,
            "finest_guess": finest_guess,
        }
    return run
