"""Richardson extrapolation and quadratic interpolation between nested grids.

The second-order scheme admits a nodal error expansion
``u_s(x) = u(x) + A(x) s^2 + O(s^4)`` with A independent of the mesh size s.
Combining the solutions on two nested grids (sizes 2h and 4h) therefore
yields either

* a higher-order approximation of the true solution (weights 4/3, -1/3), or
* a third-order prediction of the *finite-difference* solution on the next
  finer grid h (weights 5/4, -1/4),

at nodes shared by both grids.  Midpoint values follow from the same
expansion with A linearly interpolated, face and cell centers by averaging
the midpoint rule over the 2 face diagonals and 4 space diagonals, and all
remaining fine nodes by tri-quadratic Lagrange interpolation on the resulting
27-node cells.

All of the per-node formulas collapse into two separable passes used by the
field-level drivers below: the node/midpoint/face/cell producers equal
``mid + c * (trilinear prolongation of (mid - coarse))`` with c = 1/4 for the
finite-difference prediction and c = 1/3 for the true-solution extrapolation,
and the remaining fine nodes come from per-axis quadratic refinement.  The
scalar formulas are kept public both as the elementary API and as the oracle
for the vectorized path.
"""

from typing import NamedTuple

import numpy as np

from .grid import Field, GridSpec, restrict_inject
from .stencil import BoundaryData, paint_boundary


class NaturalCoord(NamedTuple):
    """Element-local coordinates in [-1, 1]^3; cell nodes sit at {-1, 0, 1}^3."""

    xi: float
    eta: float
    zeta: float


# ---------------------------------------------------------------------------
# scalar extrapolation formulas
# ---------------------------------------------------------------------------

def richardson_node(u_fine: float, u_coarse: float) -> float:
    """Fourth-order value of the true solution at a node shared by grids h, 2h."""
    return (4.0 * u_fine - u_coarse) / 3.0


def richardson_midpoint(u_mid_fine: float, d_left: float, d_right: float) -> float:
    """True-solution extrapolation at a coarse-edge midpoint.

    ``d_left``/``d_right`` are the fine-minus-coarse differences at the two
    edge endpoints.
    """
    return u_mid_fine + (d_left + d_right) / 6.0


def fd_node_extrap(u1: float, u0: float) -> float:
    """Predict the next finer grid's FD value at a node shared by grids h1, 2*h1."""
    return (5.0 * u1 - u0) / 4.0


def fd_midpoint_extrap(u1_mid: float, d_left: float, d_right: float) -> float:
    """FD-solution prediction at a coarse-edge midpoint (same d convention)."""
    return u1_mid + (d_left + d_right) / 8.0


def fd_quarter_extrap(u1_left: float, u1_mid: float, u1_right: float,
                      u0_left: float, u0_right: float, side: str) -> float:
    """Third-order FD prediction at the quarter points of a coarse edge.

    Equivalent to quadratic interpolation through the three extrapolated
    values (left node, midpoint, right node) evaluated at +-1/2.
    """
    if side == "left":
        return ((9.0 * u1_left + 12.0 * u1_mid - u1_right)
                - (3.0 * u0_left + u0_right)) / 16.0
    if side == "right":
        return ((9.0 * u1_right + 12.0 * u1_mid - u1_left)
                - (3.0 * u0_right + u0_left)) / 16.0
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


# ---------------------------------------------------------------------------
# tri-quadratic shape functions on the 27-node cell
# ---------------------------------------------------------------------------

def lagrange_quadratic(t: float) -> np.ndarray:
    """Degree-2 Lagrange basis on nodes {-1, 0, 1} evaluated at t."""
    return np.array([0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)])


def cell_nodes_27() -> np.ndarray:
    """The 27 cell nodes as natural coordinates, in storage order.

    Storage order is lexicographic over (xi-index, eta-index, zeta-index)
    with each index running over -1, 0, 1; zeta varies fastest.
    """
    pts = [(xi, eta, zeta)
           for xi in (-1.0, 0.0, 1.0)
           for eta in (-1.0, 0.0, 1.0)
           for zeta in (-1.0, 0.0, 1.0)]
    return np.array(pts)


def shape27(c: NaturalCoord) -> np.ndarray:
    """The 27 tri-quadratic shape functions at c, in cell_nodes_27 order.

    The weights sum to one, and reduce to a unit cardinal weight when c
    coincides with a node.
    """
    lx = lagrange_quadratic(c.xi)
    ly = lagrange_quadratic(c.eta)
    lz = lagrange_quadratic(c.zeta)
    return np.einsum("i,j,k->ijk", lx, ly, lz).ravel()


def triquadratic_eval(vals: np.ndarray, c: NaturalCoord) -> float:
    """Evaluate the tri-quadratic interpolant of 27 nodal values at c."""
    vals = np.asarray(vals, dtype=float)
    if vals.shape != (27,):
        raise ValueError(f"expected 27 cell values, got shape {vals.shape}")
    return float(np.dot(shape27(c), vals))


# ---------------------------------------------------------------------------
# separable field-level passes
# ---------------------------------------------------------------------------

def _linear_refine_axis(a: np.ndarray, axis: int) -> np.ndarray:
    """Midpoint-inserting linear refinement along one axis (m+1 -> 2m+1)."""
    a = np.moveaxis(a, axis, 0)
    m = a.shape[0] - 1
    out = np.empty((2 * m + 1,) + a.shape[1:])
    out[0::2] = a
    out[1::2] = 0.5 * (a[:-1] + a[1:])
    return np.moveaxis(out, 0, axis)


def trilinear_refine(a: np.ndarray) -> np.ndarray:
    """Trilinear prolongation onto the once-refined nodal grid."""
    for axis in range(3):
        a = _linear_refine_axis(a, axis)
    return a


# quadratic Lagrange weights at the quarter points of a two-interval cell
_QW_LEFT = (0.375, 0.75, -0.125)    # at xi = -1/2: weights on nodes -1, 0, 1
_QW_RIGHT = (-0.125, 0.75, 0.375)   # at xi = +1/2


def _quadratic_refine_axis(a: np.ndarray, axis: int) -> np.ndarray:
    """Per-axis quadratic refinement (2m+1 -> 4m+1 values).

    Treats consecutive index triples (2I, 2I+1, 2I+2) as one quadratic cell;
    even output nodes copy the inputs, odd output nodes are the cell's
    quarter-point values.  Interior cell faces are shared between neighbors
    and produced once, so seams are consistent by construction.
    """
    a = np.moveaxis(a, axis, 0)
    m = (a.shape[0] - 1) // 2
    even = a[0::2]
    odd = a[1::2]
    out = np.empty((4 * m + 1,) + a.shape[1:])
    out[0::4] = even
    out[2::4] = odd
    out[1::4] = _QW_LEFT[0] * even[:-1] + _QW_LEFT[1] * odd + _QW_LEFT[2] * even[1:]
    out[3::4] = _QW_RIGHT[0] * even[:-1] + _QW_RIGHT[1] * odd + _QW_RIGHT[2] * even[1:]
    return np.moveaxis(out, 0, axis)


def triquadratic_refine(a: np.ndarray) -> np.ndarray:
    """Tri-quadratic interpolation onto the once-refined nodal grid."""
    for axis in range(3):
        a = _quadratic_refine_axis(a, axis)
    return a


def _check_nested(fine_n: int, coarse_n: int, what: str):
    if fine_n != 2 * coarse_n:
        raise ValueError(
            f"{what}: grids are not nested with ratio 2 (n={fine_n} vs n={coarse_n})"
        )


def predict_fine_solution(u_mid: Field, u_coarse: Field,
                          fine_bc: BoundaryData) -> Field:
    """Third-order initial guess for the FD solution on the next finer grid.

    ``u_mid`` and ``u_coarse`` are the FD solutions on grids 2h and 4h (with
    boundary nodes holding the exact data); the result lives on grid h.
    Boundary nodes of the result are overwritten with the exact g1 samples.
    """
    _check_nested(u_mid.grid.n, u_coarse.grid.n, "predict_fine_solution")
    fine_grid = GridSpec(2 * u_mid.grid.n)
    if fine_bc.n != fine_grid.n:
        raise ValueError(
            f"boundary data for n={fine_bc.n}, expected n={fine_grid.n}"
        )
    diff = u_mid.nodes[::2, ::2, ::2] - u_coarse.nodes
    cell27 = u_mid.nodes + 0.25 * trilinear_refine(diff)
    out = Field.zeros(fine_grid)
    out.nodes[...] = triquadratic_refine(cell27)
    paint_boundary(out, fine_bc)
    return out


def higher_order_solution(u_fine: Field, u_mid: Field, bc: BoundaryData) -> Field:
    """Extrapolate the two finest FD solutions toward the true solution.

    Applies the 4/3, -1/3 node rule at nodes shared with the 2h grid, the
    1/6 midpoint rule on its edges, and diagonal averages of the midpoint
    rule at face and cell centers; the result lives on the fine grid with
    exact g1 boundary values.
    """
    _check_nested(u_fine.grid.n, u_mid.grid.n, "higher_order_solution")
    if bc.n != u_fine.grid.n:
        raise ValueError(f"boundary data for n={bc.n}, expected n={u_fine.grid.n}")
    diff = restrict_inject(u_fine).nodes - u_mid.nodes
    out = Field.zeros(u_fine.grid)
    out.nodes[...] = u_fine.nodes + trilinear_refine(diff) / 3.0
    paint_boundary(out, bc)
    return out
