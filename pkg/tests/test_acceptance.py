"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Full-cascade criteria run at desk scale (coarsest 8^3, finest 64^3 or 128^3).
The module-scoped fixtures below run each configuration once and share the
reports across criteria; the complete module takes about eight minutes on a
two-core workstation.

Tolerance choices for the study ladders (documented once here).  The
stopping test is relative to the right-hand-side norm, which differs by four
orders of magnitude between the problems: problems 2-5 carry eliminated
boundary data of order one, while problem 1's boundary data vanishes
identically, leaving only the h^4-scaled forcing.  The per-problem eps below
equalize the *absolute* algebraic error instead, keeping it 2% or less of
every asserted quantity (gap, error, ratio); runs at much tighter eps
reproduce the same gap orders to +-0.002 and the same error columns to five
digits.

* problem 1: eps = 1e-4 (tiny rhs norm; also the one problem whose guess
  brings no iteration collapse, so tight tolerances are very expensive);
* problems 2-4: the default eps = 1e-10 (cheap there: the extrapolated
  guesses put the fine levels in the collapse regime);
* problem 5: eps = 1e-6 (errors four orders larger than problem 2's, steep
  solution makes fine levels expensive).

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import time

import numpy as np
import pytest

from conftest import dense_operator, random_interior
from excmg3d.cascade import (
    ExcmgConfig,
    RunMode,
    convergence_orders,
    excmg_run,
    work_units,
)
from excmg3d.extrapolate import (
    NaturalCoord,
    cell_nodes_27,
    higher_order_solution,
    predict_fine_solution,
    shape27,
)
from excmg3d.grid import Field, GridSpec, inner_product
from excmg3d.problems import (
    get_problem,
    sample_boundary,
    sample_exact,
    sample_forcing,
    validate_forcing,
)
from excmg3d.stencil import (
    BcKind,
    BoundaryData,
    apply_operator,
    apply_stencil_raw,
    apply_transpose,
    assemble_system,
)

STUDY_EPS = {1: 1e-4, 2: 1e-10, 3: 1e-10, 4: 1e-10, 5: 1e-6}
COLLAPSE_EPS = 1e-8


def _verdict(num: int, ok: bool, detail: str) -> str:
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    print(line, flush=True)
    return line


@pytest.fixture(scope="module")
def table_run():
    """Problem 1 ladder to 64^3 at the default tolerance (criterion 1)."""
    t0 = time.time()
    report = excmg_run(ExcmgConfig(problem=1, bc_kind=BcKind.FIRST,
                                   coarse_n=8, extra_levels=2, eps=1e-10))
    return report, time.time() - t0


@pytest.fixture(scope="module")
def study_runs():
    """Problems 1-5 on the 8 -> 128 ladder (criteria 2, 3, 5)."""
    runs = {}
    for pid in (1, 2, 3, 4, 5):
        runs[pid] = excmg_run(ExcmgConfig(
            problem=pid, bc_kind=BcKind.FIRST, coarse_n=8, extra_levels=3,
            eps=STUDY_EPS[pid]))
    return runs


@pytest.fixture(scope="module")
def collapse_runs():
    """Problems 1-4 to 64^3, extrapolated guess vs zero guess (criterion 4)."""
    runs = {}
    for pid in (1, 2, 3, 4):
        base = dict(problem=pid, bc_kind=BcKind.FIRST, coarse_n=8,
                    extra_levels=2, eps=COLLAPSE_EPS)
        runs[pid] = (
            excmg_run(ExcmgConfig(mode=RunMode.EXCMG, **base)),
            excmg_run(ExcmgConfig(mode=RunMode.BASELINE, **base)),
        )
    return runs


# ---------------------------------------------------------------------------
# criterion 1: reference error magnitudes and order for problem 1
# ---------------------------------------------------------------------------

def test_criterion_1_problem1_reference_errors(table_run):
    report, elapsed = table_run
    by_n = {lv.n: lv for lv in report.levels}
    e32, e64 = by_n[32].err_max, by_n[64].err_max
    order = convergence_orders([e32, e64])[0]
    ok = (report.success
          and abs(e32 - 5.16e-2) <= 0.25 * 5.16e-2
          and abs(e64 - 1.29e-2) <= 0.25 * 1.29e-2
          and abs(order - 2.00) <= 0.05
          and elapsed < 600.0)
    detail = (f"Linf(32)={e32:.3e} (ref 5.16e-2), Linf(64)={e64:.3e} "
              f"(ref 1.29e-2), order={order:.3f}, runtime={elapsed:.0f}s")
    line = _verdict(1, ok, detail)
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 2: third-order initial guesses
# ---------------------------------------------------------------------------

def test_criterion_2_guess_gap_orders(study_runs):
    details, ok = [], True
    for pid in (1, 2, 3, 4, 5):
        gaps = [lv.guess_gap_l2 for lv in study_runs[pid].levels
                if lv.guess_gap_l2 is not None]
        orders = convergence_orders(gaps)  # three finest levels -> two orders
        if pid == 5:
            good = all(o >= 2.8 for o in orders)
        else:
            good = all(abs(o - 3.0) <= 0.2 for o in orders)
        ok &= good
        details.append(f"P{pid}: {', '.join(f'{o:.2f}' for o in orders)}")
    line = _verdict(2, ok, "gap orders " + "; ".join(details))
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 3: extrapolated-solution improvement
# ---------------------------------------------------------------------------

def test_criterion_3_extrapolation_improvement(study_runs):
    details, ok = [], True
    for pid in (1, 2, 3, 4):
        rep = study_runs[pid]
        factor = rep.finest.err_max / rep.extrap_err_max
        ok &= factor >= 2.5
        details.append(f"P{pid}: {factor:.1f}x")
    line = _verdict(3, ok, "Linf improvement " + "; ".join(details) + " (need >= 2.5x)")
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 4: iteration collapse from the extrapolated guess
# ---------------------------------------------------------------------------

def test_criterion_4_iteration_collapse(collapse_runs):
    """Expected red for problem 1; collapses dramatically for problems 2-4.

    Problem 1's boundary data vanishes identically, so its right-hand side is
    four orders of magnitude smaller than the others' (pure h^4-scaled
    forcing, no eliminated-boundary rows) and the relative-residual stopping
    test is correspondingly harsher.  The extrapolated guess is superb in
    solution space but only C^0 across interpolation cells, and the
    fourth-difference operator amplifies the seam kinks to a residual larger
    than that right-hand side: a tolerance sweep (1e-4..1e-10) bottoms out
    near ratio 0.77 for problem 1 with a diagonal preconditioner, so the 20%
    bar is unreachable for it at any tolerance.
    """
    details, ok = [], True
    for pid in (1, 2, 3, 4):
        ex, base = collapse_runs[pid]
        ratio = ex.finest.iterations / max(base.finest.iterations, 1)
        ok &= ratio <= 0.20
        details.append(
            f"P{pid}: {ex.finest.iterations}/{base.finest.iterations}={ratio:.3f}")
    line = _verdict(4, ok, "finest-level iterations " + "; ".join(details)
                    + " (need <= 0.20)")
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 5: guess-quality ratio decreases and ends below 0.5
# ---------------------------------------------------------------------------

def test_criterion_5_error_ratio_monotone(study_runs):
    """Monotone decrease holds everywhere; the final <0.5 clause is an
    expected red for problems 2 and 3 at desk scale.

    The guess-quality ratio is one order higher in h than the discretization
    error, so it behaves like c * 2^-level with a problem-dependent constant;
    the reference error tables themselves imply ratios of about 1.15
    (problem 2) and 0.53 (problem 3) on a 128^3 grid, dropping below 0.5 only
    at 256^3 and beyond, outside the desk-scale envelope.
    """
    details, ok = [], True
    for pid in (1, 2, 3, 4):
        ratios = [lv.error_ratio for lv in study_runs[pid].levels
                  if lv.error_ratio is not None]
        monotone = all(a > b for a, b in zip(ratios, ratios[1:]))
        final_small = ratios[-1] < 0.5
        ok &= monotone and final_small
        details.append(f"P{pid}: " + "->".join(f"{r:.2f}" for r in ratios))
    line = _verdict(5, ok, " ".join(details) + " (need monotone, final < 0.5)")
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 6: stencil exactness and truncation order
# ---------------------------------------------------------------------------

def test_criterion_6_stencil_exactness_and_truncation():
    checks = []
    n = 8
    grid = GridSpec(n)
    cases = [
        (lambda x, y, z: np.ones_like(x + y + z), 0.0),
        (lambda x, y, z: x * x + 0 * y + 0 * z, 0.0),
        (lambda x, y, z: x**4 + 0 * y + 0 * z, 24.0),
        (lambda x, y, z: x * x * y * y + 0 * z, 8.0),
        (lambda x, y, z: x**4 + y**4 + z**4, 72.0),
    ]
    poly_ok = True
    for fn, dsq in cases:
        samples = Field.sample(grid, fn, ghosts=True)
        deep = apply_stencil_raw(samples).interior[1:-1, 1:-1, 1:-1]
        want = dsq * grid.h**4
        if dsq == 0.0:
            poly_ok &= bool(np.max(np.abs(deep)) <= 1e-12)
        else:
            poly_ok &= bool(np.max(np.abs(deep - want)) <= 1e-11 * abs(want))
    checks.append(f"polynomials {'ok' if poly_ok else 'BAD'}")

    problem = get_problem(1)
    residuals = []
    for m in (16, 32, 64):
        g = GridSpec(m)
        system = assemble_system(sample_forcing(problem, g),
                                 sample_boundary(problem, g, BcKind.FIRST))
        r = system.apply(sample_exact(problem, g))
        r.interior[...] -= system.rhs.interior
        residuals.append(float(np.max(np.abs(r.interior[1:-1, 1:-1, 1:-1]))))
    factors = [residuals[i - 1] / residuals[i] for i in (1, 2)]
    decay_ok = all(abs(f - 64.0) <= 0.15 * 64.0 for f in factors)
    checks.append("truncation decay " + ", ".join(f"{f:.1f}" for f in factors))

    ok = poly_ok and decay_ok
    line = _verdict(6, ok, "; ".join(checks) + " (need 64 +- 15%)")
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 7: dense-assembly equivalence and adjoint identity
# ---------------------------------------------------------------------------

def test_criterion_7_assembly_and_adjoint(rng):
    dense_ok = True
    for kind in (BcKind.FIRST, BcKind.SECOND):
        a = dense_operator(4, kind)
        g = GridSpec(4)
        for _ in range(20):
            x = random_interior(g, rng)
            want = a @ x.interior.ravel()
            got = apply_operator(x, kind).interior.ravel()
            dense_ok &= bool(np.max(np.abs(got - want))
                             <= 1e-13 * max(1.0, np.max(np.abs(want))))
    adj_ok = True
    worst = 0.0
    for kind in (BcKind.FIRST, BcKind.SECOND):
        for n in (4, 8):
            g = GridSpec(n)
            for _ in range(25):  # 25 x 2 sizes x 2 kinds = 100 pairs
                x = random_interior(g, rng)
                y = random_interior(g, rng)
                ax = apply_operator(x, kind)
                aty = apply_transpose(y, kind)
                gap = abs(inner_product(ax, y) - inner_product(x, aty))
                bound = (np.linalg.norm(ax.interior) * np.linalg.norm(y.interior)
                         + np.linalg.norm(x.interior) * np.linalg.norm(aty.interior))
                worst = max(worst, gap / bound)
                adj_ok &= bool(gap <= 1e-12 * bound)
    ok = dense_ok and adj_ok
    line = _verdict(7, ok, f"dense n=4 match {'ok' if dense_ok else 'BAD'}; "
                           f"adjoint worst rel {worst:.2e} (need <= 1e-12)")
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 8: forcing validation including the misprint demonstration
# ---------------------------------------------------------------------------

def test_criterion_8_forcing_validation():
    worst = 0.0
    all_pass = True
    for pid in (1, 2, 3, 4, 5):
        rep = validate_forcing(pid, samples=100, tol=1e-5)
        all_pass &= rep.passed
        worst = max(worst, rep.worst_rel_error)
    literal = validate_forcing(3, samples=100, tol=1e-5, literal_forcing=True)
    misprint_ok = (not literal.passed
                   and abs(literal.mean_oracle_over_f - 9.0) <= 0.1)
    ok = all_pass and misprint_ok
    line = _verdict(8, ok, f"5 forcings pass (worst rel {worst:.2e}); literal "
                           f"variant off by {literal.mean_oracle_over_f:.3f}x")
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 9: work-unit arithmetic
# ---------------------------------------------------------------------------

def test_criterion_9_work_units():
    wu1 = work_units([474, 512, 64, 8, 1])
    wu2 = work_units([259, 470, 384, 48, 6])
    ok = abs(wu1 - 4.12) <= 0.005 and abs(wu2 - 18.98) <= 0.005
    line = _verdict(9, ok, f"WU([474,512,64,8,1])={wu1:.4f} (ref 4.12); "
                           f"WU([259,470,384,48,6])={wu2:.4f} (ref 18.98)")
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 10: extrapolation unit properties
# ---------------------------------------------------------------------------

def test_criterion_10_extrapolation_units(rng):
    # constant preservation through both field-level extrapolations
    c = 3.5
    coarse = Field.zeros(GridSpec(4))
    coarse.nodes[...] = c
    mid = Field.zeros(GridSpec(8))
    mid.nodes[...] = c
    bc16 = BoundaryData.zeros(GridSpec(16), BcKind.FIRST)
    for f in bc16.g1:
        f[...] = c
    guess = predict_fine_solution(mid, coarse, bc16)
    const_ok = bool(np.max(np.abs(guess.nodes - c)) <= 1e-14 * abs(c))
    bc8 = BoundaryData.zeros(GridSpec(8), BcKind.FIRST)
    for f in bc8.g1:
        f[...] = c
    high = higher_order_solution(mid, coarse, bc8)
    const_ok &= bool(np.max(np.abs(high.nodes - c)) <= 1e-14 * abs(c))

    # tri-quadratic exactness of the guess construction
    poly = lambda x, y, z: (1 + 2 * x - x * x) * (2 - y * y) * (1 + z + z * z)
    pc = Field.sample(GridSpec(4), poly)
    pm = Field.sample(GridSpec(8), poly)
    bcp = BoundaryData.zeros(GridSpec(16), BcKind.FIRST)
    coords = np.arange(17) / 16.0
    a, b = np.meshgrid(coords, coords, indexing="ij")
    planes = [(np.zeros_like(a), a, b), (np.ones_like(a), a, b),
              (a, np.zeros_like(a), b), (a, np.ones_like(a), b),
              (a, b, np.zeros_like(a)), (a, b, np.ones_like(a))]
    for face, (x, y, z) in enumerate(planes):
        bcp.g1[face][...] = poly(x, y, z)
    got = predict_fine_solution(pm, pc, bcp)
    want = Field.sample(GridSpec(16), poly)
    quad_ok = bool(np.max(np.abs(got.nodes - want.nodes)) <= 1e-12)

    # shape-function cardinality and partition of unity
    shape_ok = True
    for i, (xi, eta, zeta) in enumerate(cell_nodes_27()):
        w = shape27(NaturalCoord(xi, eta, zeta))
        shape_ok &= bool(abs(w[i] - 1.0) <= 1e-13)
        shape_ok &= bool(np.max(np.abs(np.delete(w, i))) <= 1e-13)
    for _ in range(1000):
        w = shape27(NaturalCoord(*rng.uniform(-1, 1, 3)))
        shape_ok &= bool(abs(w.sum() - 1.0) <= 1e-13)

    ok = const_ok and quad_ok and shape_ok
    line = _verdict(10, ok, f"constants {'ok' if const_ok else 'BAD'}; "
                            f"tri-quadratic exactness {'ok' if quad_ok else 'BAD'}; "
                            f"shape27 {'ok' if shape_ok else 'BAD'}")
    assert ok, line
