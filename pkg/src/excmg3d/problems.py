"""Manufactured test problems with exact solutions, forcings and boundary data.

Five smooth exact solutions on the unit cube, each paired with the forcing
f = biharmonic(u) and with first/second normal-derivative data on the six
faces:

1. (1 - cos 2 pi x)(1 - cos 2 pi y)(1 - cos 2 pi z)
2. exp(xyz)
3. sinh(x) sinh(y) sinh(z)        (forcing is 9*u; the "literal" variant f = u
                                   is kept available because it is a commonly
                                   reproduced misprint and is demonstrably
                                   inconsistent with the exact solution)
4. xyz log(1 + x + y + z)
5. -exp(10(x-1/2)^2 + 10(y-1/2)^2 + 10(z-1/5)^2) x(1-x) y(1-y) z(1-z)

Every forcing formula is validated against an independent high-order
finite-difference oracle for the biharmonic operator (validate_forcing), so a
wrong sign or factor anywhere in the closed forms cannot survive the test
suite.

Sign conventions: evaluators ``du``/``d2u`` are plain coordinate partial
derivatives.  ``du_dn``/``d2u_dn2`` are taken along the *outward* normal of a
face, so on low faces the first derivative flips sign while the second is
unchanged.  Boundary sampling for the solver stores coordinate-axis
derivatives per face (what the ghost reflection formulas consume).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Field, GridSpec, node_coords
from .stencil import FACES, BcKind, BoundaryData

Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ManufacturedProblem:
    """Exact solution plus everything the discretization needs from it."""

    pid: int
    u: Evaluator
    f: Evaluator
    du: tuple      # (du/dx, du/dy, du/dz)
    d2u: tuple     # (d2u/dx2, d2u/dy2, d2u/dz2)

    def du_dn(self, axis: int, side: int, x, y, z):
        """First derivative along the outward normal of face (axis, side)."""
        sign = -1.0 if side == 0 else 1.0
        return sign * self.du[axis](x, y, z)

    def d2u_dn2(self, axis: int, side: int, x, y, z):
        """Second outward-normal derivative (sign-free) of face (axis, side)."""
        return self.d2u[axis](x, y, z)


def _problem1() -> ManufacturedProblem:
    tp = 2.0 * np.pi

    def u(x, y, z):
        return (1 - np.cos(tp * x)) * (1 - np.cos(tp * y)) * (1 - np.cos(tp * z))

    def f(x, y, z):
        cx, cy, cz = np.cos(tp * x), np.cos(tp * y), np.cos(tp * z)
        return -16.0 * np.pi**4 * (
            cx + cy + cz
            - 4.0 * (cx * cy + cx * cz + cy * cz)
            + 9.0 * cx * cy * cz
        )

    def dux(x, y, z):
        return tp * np.sin(tp * x) * (1 - np.cos(tp * y)) * (1 - np.cos(tp * z))

    def duy(x, y, z):
        return tp * np.sin(tp * y) * (1 - np.cos(tp * x)) * (1 - np.cos(tp * z))

    def duz(x, y, z):
        return tp * np.sin(tp * z) * (1 - np.cos(tp * x)) * (1 - np.cos(tp * y))

    def d2ux(x, y, z):
        return tp * tp * np.cos(tp * x) * (1 - np.cos(tp * y)) * (1 - np.cos(tp * z))

    def d2uy(x, y, z):
        return tp * tp * np.cos(tp * y) * (1 - np.cos(tp * x)) * (1 - np.cos(tp * z))

    def d2uz(x, y, z):
        return tp * tp * np.cos(tp * z) * (1 - np.cos(tp * x)) * (1 - np.cos(tp * y))

    return ManufacturedProblem(1, u, f, (dux, duy, duz), (d2ux, d2uy, d2uz))


def _problem2() -> ManufacturedProblem:
    def u(x, y, z):
        return np.exp(x * y * z)

    def f(x, y, z):
        e = np.exp(x * y * z)
        return e * (
            x**4 * y**4 + 2 * x**4 * y**2 * z**2 + x**4 * z**4
            + 8 * x**3 * y * z + 2 * x**2 * y**4 * z**2 + 2 * x**2 * y**2 * z**4
            + 4 * x**2 + 8 * x * y**3 * z + 8 * x * y * z**3
            + y**4 * z**4 + 4 * y**2 + 4 * z**2
        )

    def dux(x, y, z):
        return y * z * np.exp(x * y * z)

    def duy(x, y, z):
        return x * z * np.exp(x * y * z)

    def duz(x, y, z):
        return x * y * np.exp(x * y * z)

    def d2ux(x, y, z):
        return (y * z) ** 2 * np.exp(x * y * z)

    def d2uy(x, y, z):
        return (x * z) ** 2 * np.exp(x * y * z)

    def d2uz(x, y, z):
        return (x * y) ** 2 * np.exp(x * y * z)

    return ManufacturedProblem(2, u, f, (dux, duy, duz), (d2ux, d2uy, d2uz))


def _problem3(literal_forcing: bool = False) -> ManufacturedProblem:
    def u(x, y, z):
        return np.sinh(x) * np.sinh(y) * np.sinh(z)

    if literal_forcing:
        f = u  # misprinted variant, off by the factor 9
    else:
        # three pure fourth derivatives contribute u each, three mixed terms 2u each
        def f(x, y, z):
            return 9.0 * np.sinh(x) * np.sinh(y) * np.sinh(z)

    def dux(x, y, z):
        return np.cosh(x) * np.sinh(y) * np.sinh(z)

    def duy(x, y, z):
        return np.sinh(x) * np.cosh(y) * np.sinh(z)

    def duz(x, y, z):
        return np.sinh(x) * np.sinh(y) * np.cosh(z)

    return ManufacturedProblem(3, u, f, (dux, duy, duz), (u, u, u))


def _problem4() -> ManufacturedProblem:
    def u(x, y, z):
        return x * y * z * np.log(1 + x + y + z)

    def f(x, y, z):
        w = 1 + x + y + z
        return -(2 * (4 * x**3 + 8 * x**2 + 15 * x * y * z + 4 * x * y + 4 * x * z
                      + 4 * x + 4 * y**3 + 8 * y**2 + 4 * y * z + 4 * y
                      + 4 * z**3 + 8 * z**2 + 4 * z)) / w**4

    def dux(x, y, z):
        w = 1 + x + y + z
        return y * z * np.log(w) + x * y * z / w

    def duy(x, y, z):
        w = 1 + x + y + z
        return x * z * np.log(w) + x * y * z / w

    def duz(x, y, z):
        w = 1 + x + y + z
        return x * y * np.log(w) + x * y * z / w

    def d2ux(x, y, z):
        w = 1 + x + y + z
        return 2 * y * z / w - x * y * z / w**2

    def d2uy(x, y, z):
        w = 1 + x + y + z
        return 2 * x * z / w - x * y * z / w**2

    def d2uz(x, y, z):
        w = 1 + x + y + z
        return 2 * x * y / w - x * y * z / w**2

    return ManufacturedProblem(4, u, f, (dux, duy, duz), (d2ux, d2uy, d2uz))


# Problem 5 separates into a product of 1D factors g(t; c) = E(t) p(t) with
# E = exp(a (t-c)^2), p = t - t^2 and a = 10, whose derivatives have short
# closed forms (p''' = 0, so the usual Leibniz cascade truncates).
_P5_A = 10.0
_P5_CENTERS = (0.5, 0.5, 0.2)


def _p5_factor(t, c):
    """g, g', g'', g'''' of one problem-5 factor."""
    a = _P5_A
    s = t - c
    e = np.exp(a * s * s)
    p = t - t * t
    p1 = 1.0 - 2.0 * t
    p2 = -2.0
    g0 = e * p
    g1 = e * (2 * a * s * p + p1)
    g2 = e * (4 * a**2 * s**2 * p + 4 * a * s * p1 + 2 * a * p + p2)
    g4 = e * (16 * a**4 * s**4 * p + 32 * a**3 * s**3 * p1 + 48 * a**3 * s**2 * p
              + 24 * a**2 * s**2 * p2 + 48 * a**2 * s * p1 + 12 * a**2 * p
              + 12 * a * p2)
    return g0, g1, g2, g4


def _problem5() -> ManufacturedProblem:
    cx, cy, cz = _P5_CENTERS

    def u(x, y, z):
        return -(_p5_factor(x, cx)[0] * _p5_factor(y, cy)[0] * _p5_factor(z, cz)[0])

    def f(x, y, z):
        gx0, _, gx2, gx4 = _p5_factor(x, cx)
        gy0, _, gy2, gy4 = _p5_factor(y, cy)
        gz0, _, gz2, gz4 = _p5_factor(z, cz)
        return -(gx4 * gy0 * gz0 + gx0 * gy4 * gz0 + gx0 * gy0 * gz4
                 + 2.0 * (gx2 * gy2 * gz0 + gx2 * gy0 * gz2 + gx0 * gy2 * gz2))

    def dux(x, y, z):
        return -(_p5_factor(x, cx)[1] * _p5_factor(y, cy)[0] * _p5_factor(z, cz)[0])

    def duy(x, y, z):
        return -(_p5_factor(x, cx)[0] * _p5_factor(y, cy)[1] * _p5_factor(z, cz)[0])

    def duz(x, y, z):
        return -(_p5_factor(x, cx)[0] * _p5_factor(y, cy)[0] * _p5_factor(z, cz)[1])

    def d2ux(x, y, z):
        return -(_p5_factor(x, cx)[2] * _p5_factor(y, cy)[0] * _p5_factor(z, cz)[0])

    def d2uy(x, y, z):
        return -(_p5_factor(x, cx)[0] * _p5_factor(y, cy)[2] * _p5_factor(z, cz)[0])

    def d2uz(x, y, z):
        return -(_p5_factor(x, cx)[0] * _p5_factor(y, cy)[0] * _p5_factor(z, cz)[2])

    return ManufacturedProblem(5, u, f, (dux, duy, duz), (d2ux, d2uy, d2uz))


_BUILDERS = {1: _problem1, 2: _problem2, 3: _problem3, 4: _problem4, 5: _problem5}


def get_problem(pid: int, literal_forcing: bool = False) -> ManufacturedProblem:
    """Return test problem 1..5; ``literal_forcing`` selects the misprinted
    forcing variant of problem 3 and is ignored for the others."""
    if pid not in _BUILDERS:
        raise ValueError(f"unknown problem id {pid}; valid ids are 1..5")
    if pid == 3:
        return _problem3(literal_forcing)
    return _BUILDERS[pid]()


# ---------------------------------------------------------------------------
# sampling onto grids
# ---------------------------------------------------------------------------

def sample_exact(problem: ManufacturedProblem, grid: GridSpec,
                 ghosts: bool = False) -> Field:
    return Field.sample(grid, problem.u, ghosts=ghosts)


def sample_forcing(problem: ManufacturedProblem, grid: GridSpec) -> Field:
    return Field.sample(grid, problem.f)


def sample_boundary(problem: ManufacturedProblem, grid: GridSpec,
                    kind: BcKind) -> BoundaryData:
    """Sample g1 and g2 on the six faces in the solver's conventions.

    g2 holds coordinate-axis derivatives (first kind: du/daxis; second kind:
    d2u/daxis2), so low faces carry the outward-normal derivative negated.
    """
    c = node_coords(grid)
    a, b = np.meshgrid(c, c, indexing="ij")
    g1, g2 = [], []
    for axis, side in FACES:
        w = np.full_like(a, 0.0 if side == 0 else 1.0)
        if axis == 0:
            x, y, z = w, a, b
        elif axis == 1:
            x, y, z = a, w, b
        else:
            x, y, z = a, b, w
        g1.append(np.asarray(problem.u(x, y, z), dtype=float))
        if kind is BcKind.FIRST:
            g2.append(np.asarray(problem.du[axis](x, y, z), dtype=float))
        else:
            g2.append(np.asarray(problem.d2u[axis](x, y, z), dtype=float))
    return BoundaryData(kind, grid.n, g1, g2)


# ---------------------------------------------------------------------------
# independent forcing oracle
# ---------------------------------------------------------------------------

# 7-point central 4th derivative, 4th-order accurate (error -7/240 h^4 u^(8));
# weights are divided in extended precision because a 1e-16 weight error,
# amplified by 1/step^4, would already exceed the validation tolerance
_D4_OFFSETS = np.arange(-3, 4)
_D4_WEIGHTS = np.array([-1, 12, -39, 56, -39, 12, -1],
                       dtype=np.longdouble) / np.longdouble(6)
# 5-point central 2nd derivative, 4th-order accurate (error -1/90 h^4 u^(6))
_D2_OFFSETS = np.arange(-2, 3)
_D2_WEIGHTS = np.array([-1, 16, -30, 16, -1],
                       dtype=np.longdouble) / np.longdouble(12)


def oracle_biharmonic(u: Evaluator, p, step: float = 2e-3):
    """High-order finite-difference approximation of the biharmonic of u at p.

    Pure fourth derivatives use a 7-point order-4 stencil per axis; the mixed
    terms nest two order-4 second-derivative stencils, so truncation is
    O(step^4) with smooth-derivative constants (about 1e-12 relative at the
    default step).  The division by step^4 amplifies rounding by ~1e11, which
    would swamp the 1e-5 validation tolerance in plain double precision, so
    all samples are taken and summed in extended precision.  ``p`` may hold
    scalars or broadcastable arrays.
    """
    ld = np.longdouble
    x, y, z = (np.asarray(c, dtype=ld) for c in p)
    step = ld(step)
    total = ld(0.0)
    # pure fourth derivatives
    for axis in range(3):
        acc = ld(0.0)
        for off, wgt in zip(_D4_OFFSETS, _D4_WEIGHTS):
            d = [ld(0.0)] * 3
            d[axis] = off * step
            acc = acc + ld(wgt) * u(x + d[0], y + d[1], z + d[2])
        total = total + acc
    # mixed terms 2 * d4/da2 db2
    for a_ax, b_ax in ((0, 1), (0, 2), (1, 2)):
        acc = ld(0.0)
        for off_a, wgt_a in zip(_D2_OFFSETS, _D2_WEIGHTS):
            for off_b, wgt_b in zip(_D2_OFFSETS, _D2_WEIGHTS):
                d = [ld(0.0)] * 3
                d[a_ax] = off_a * step
                d[b_ax] = off_b * step
                acc = acc + ld(wgt_a) * ld(wgt_b) * u(x + d[0], y + d[1], z + d[2])
        total = total + ld(2.0) * acc
    return np.asarray(total / step**4, dtype=float)


def halton_points(count: int, skip: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy points in (0,1)^3 (Halton, bases 2/3/5).

    ``skip`` offsets the start index, giving reproducible alternative point
    sets; index 0 of the sequence itself is never used.
    """
    out = np.empty((count, 3))
    for dim, base in enumerate((2, 3, 5)):
        for i in range(count):
            idx = skip + i + 1
            val, denom = 0.0, 1.0
            while idx > 0:
                idx, rem = divmod(idx, base)
                denom *= base
                val += rem / denom
            out[i, dim] = val
    return out


@dataclass
class ForcingValidation:
    """Result of checking a closed-form forcing against the oracle."""

    pid: int
    passed: bool
    tol: float
    worst_rel_error: float
    worst_point: tuple
    mean_oracle_over_f: float

    def describe(self) -> str:
        status = "ok" if self.passed else "FAILED"
        return (f"forcing validation problem {self.pid}: {status} "
                f"(worst rel. error {self.worst_rel_error:.2e} at "
                f"{tuple(round(v, 4) for v in self.worst_point)}, tol {self.tol:.0e})")


def validate_forcing(pid: int, samples: int = 100, tol: float = 1e-5,
                     step: float = 2e-3, literal_forcing: bool = False,
                     seed: int = 0) -> ForcingValidation:
    """Compare the closed-form forcing with the oracle at quasi-random points.

    Points are Halton points mapped into a margin-shrunk cube (margin 4*step,
    cosmetic since all five solutions are entire); ``seed`` offsets the point
    sequence.  Passes iff the relative deviation |f - oracle| / max(1, |f|)
    stays below ``tol`` everywhere.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    problem = get_problem(pid, literal_forcing=literal_forcing)
    margin = 4.0 * step
    pts = margin + (1.0 - 2.0 * margin) * halton_points(samples, skip=seed)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    f_vals = np.asarray(problem.f(x, y, z), dtype=float)
    oracle_vals = oracle_biharmonic(problem.u, (x, y, z), step)
    rel = np.abs(f_vals - oracle_vals) / np.maximum(1.0, np.abs(f_vals))
    worst = int(np.argmax(rel))
    safe = np.abs(f_vals) > 1e-8
    ratio = float(np.mean(oracle_vals[safe] / f_vals[safe])) if safe.any() else np.nan
    return ForcingValidation(
        pid=pid,
        passed=bool(np.all(rel < tol)),
        tol=tol,
        worst_rel_error=float(rel[worst]),
        worst_point=(float(x[worst]), float(y[worst]), float(z[worst])),
        mean_oracle_over_f=ratio,
    )
