"""Second-order 25-point discretization of the 3D biharmonic operator.

At every interior node the operator couples the center (weight 42) to its six
axis neighbors (-12), six distance-2 axis neighbors (+1) and twelve in-plane
diagonal neighbors (+2); the weights sum to zero.  The scheme is kept in its
integer form, i.e. it approximates h^4 * biharmonic(u), and the right-hand
side is scaled by h^4 accordingly.

Nodes one layer outside the cube (ghosts) are eliminated with reflection
formulas so that the same stencil applies at every interior node:

* first-kind data (u and du/dn given):  ghost = mirror - 2h * (du/daxis)
* second-kind data (u and d2u/dn2 given): ghost = -mirror + 2*boundary + h^2 * (d2u/daxis2)

where "mirror" is the interior node reflected across the face.  The operator
itself is defined with homogeneous data (zero boundary values, zero ghost
data); all known boundary data enters the system through the right-hand side,
which keeps the operator a fixed linear map suitable for Krylov iteration.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .grid import Field, GridSpec, rms

# (axis, side) pairs; side 0 is the low face (coordinate 0), side 1 the high face.
FACES = ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1))

# stencil weights: center, distance-1 axis, distance-2 axis, planar diagonal
W_CENTER = 42.0
W_AXIS1 = -12.0
W_AXIS2 = 1.0
W_DIAG = 2.0


class BcKind(Enum):
    FIRST = "first"    # u and first normal derivative prescribed
    SECOND = "second"  # u and second normal derivative prescribed


@dataclass
class BoundaryData:
    """Samples of the boundary data on the six faces.

    ``g1[f]`` and ``g2[f]`` are (n+1, n+1) arrays over the two in-face axes in
    increasing index order, f indexing ``FACES``.  g1 is the prescribed trace
    of u (single-valued, so shared edges agree).  g2 is stored per face in the
    *coordinate-axis* convention: for first-kind data it is du/daxis on the
    face (the outward-normal derivative negated on low faces), for second-kind
    data it is d2u/daxis2 (identical to the second normal derivative).
    """

    kind: BcKind
    n: int
    g1: list
    g2: list

    def __post_init__(self):
        want = (self.n + 1, self.n + 1)
        for name, arrs in (("g1", self.g1), ("g2", self.g2)):
            if len(arrs) != 6:
                raise ValueError(f"{name} needs 6 face arrays, got {len(arrs)}")
            for f, arr in enumerate(arrs):
                if arr.shape != want:
                    raise ValueError(
                        f"{name} face {FACES[f]}: shape {arr.shape}, want {want}"
                    )

    @classmethod
    def zeros(cls, grid: GridSpec, kind: BcKind) -> "BoundaryData":
        shape = (grid.n + 1, grid.n + 1)
        return cls(kind, grid.n,
                   [np.zeros(shape) for _ in range(6)],
                   [np.zeros(shape) for _ in range(6)])


def _face_index(values: np.ndarray, axis: int, layer: int):
    """Index tuple selecting one full (ghost-trimmed) layer along ``axis``.

    ``layer`` counts in node indices: -1 ghost, 0 boundary, 1 first interior;
    symmetric values address the high side.
    """
    idx = [slice(1, -1)] * 3
    idx[axis] = layer + 1
    return tuple(idx)


def paint_boundary(u: Field, bc: BoundaryData) -> Field:
    """Overwrite the boundary nodes of ``u`` with the g1 samples (in place)."""
    if bc.n != u.grid.n:
        raise ValueError(f"boundary data for n={bc.n} applied to n={u.grid.n}")
    for f, (axis, side) in enumerate(FACES):
        layer = 0 if side == 0 else u.grid.n
        u.values[_face_index(u.values, axis, layer)] = bc.g1[f]
    return u


def fill_ghosts(u: Field, bc: BoundaryData, homogeneous: bool = False) -> Field:
    """Return a copy of ``u`` with the ghost ring filled by reflection.

    With ``homogeneous=True`` the data terms are dropped (g1 = g2 = 0), which
    together with zero boundary values defines the eliminated operator.  Edge
    and corner ghosts (two or three out-of-range indices) are never read by
    the stencil and are set to zero.
    """
    if bc.n != u.grid.n:
        raise ValueError(f"boundary data for n={bc.n} applied to n={u.grid.n}")
    out = u.copy()
    _fill_ghosts_inplace(out.values, u.grid, bc, homogeneous)
    return out


def _fill_ghosts_inplace(v: np.ndarray, grid: GridSpec, bc: BoundaryData,
                         homogeneous: bool) -> None:
    n, h = grid.n, grid.h
    # zero the six ghost slabs first; this also clears edge/corner ghosts
    for axis in range(3):
        idx = [slice(None)] * 3
        idx[axis] = 0
        v[tuple(idx)] = 0.0
        idx[axis] = -1
        v[tuple(idx)] = 0.0
    for f, (axis, side) in enumerate(FACES):
        if side == 0:
            ghost = _face_index(v, axis, -1)
            mirror = v[_face_index(v, axis, 1)]
            bound = v[_face_index(v, axis, 0)]
            sign = -1.0  # low face: ghost = mirror - 2h * du/daxis
        else:
            ghost = _face_index(v, axis, n + 1)
            mirror = v[_face_index(v, axis, n - 1)]
            bound = v[_face_index(v, axis, n)]
            sign = 1.0   # high face: ghost = mirror + 2h * du/daxis
        if bc.kind is BcKind.FIRST:
            if homogeneous:
                v[ghost] = mirror
            else:
                v[ghost] = mirror + sign * 2.0 * h * bc.g2[f]
        else:
            if homogeneous:
                v[ghost] = -mirror + 2.0 * bound
            else:
                v[ghost] = -mirror + 2.0 * bound + h * h * bc.g2[f]


def verify_ghosts(u: Field, bc: BoundaryData, homogeneous: bool = False) -> bool:
    """Check that the ghost ring of ``u`` satisfies the active reflection
    formula (re-derives the ghosts and compares exactly)."""
    ref = fill_ghosts(u, bc, homogeneous)
    return bool(np.array_equal(ref.values, u.values))


@njit(cache=True)
def _stencil_kernel(v, out):
    """Fused 25-point stencil over the interior (serial: one write per node,
    deterministic)."""
    ni = v.shape[0] - 4
    for i in range(ni):
        a = i + 2
        for j in range(ni):
            b = j + 2
            for k in range(ni):
                c = k + 2
                out[i, j, k] = (
                    42.0 * v[a, b, c]
                    - 12.0 * (v[a - 1, b, c] + v[a + 1, b, c]
                              + v[a, b - 1, c] + v[a, b + 1, c]
                              + v[a, b, c - 1] + v[a, b, c + 1])
                    + v[a - 2, b, c] + v[a + 2, b, c]
                    + v[a, b - 2, c] + v[a, b + 2, c]
                    + v[a, b, c - 2] + v[a, b, c + 2]
                    + 2.0 * (v[a - 1, b - 1, c] + v[a - 1, b + 1, c]
                             + v[a + 1, b - 1, c] + v[a + 1, b + 1, c]
                             + v[a - 1, b, c - 1] + v[a + 1, b, c - 1]
                             + v[a, b - 1, c - 1] + v[a, b + 1, c - 1]
                             + v[a - 1, b, c + 1] + v[a + 1, b, c + 1]
                             + v[a, b - 1, c + 1] + v[a, b + 1, c + 1])
                )


def _stencil_interior(v: np.ndarray) -> np.ndarray:
    """Raw 25-point stencil evaluated at every interior node."""
    ni = v.shape[0] - 4
    out = np.empty((ni, ni, ni))
    _stencil_kernel(v, out)
    return out


def apply_stencil_raw(x: Field) -> Field:
    """Apply the raw stencil using boundary and ghost values exactly as stored.

    This bypasses the homogeneous ghost fill of :func:`apply_operator`; it is
    the building block for right-hand-side assembly and for truncation tests
    that supply exact ghost samples.
    """
    out = Field.zeros(x.grid)
    out.interior[...] = _stencil_interior(x.values)
    return out


class _ZeroFaces:
    """Stand-in boundary data for homogeneous ghost fills (no arrays needed)."""

    def __init__(self, kind, n):
        self.kind = kind
        self.n = n
        self.g2 = [None] * 6


def apply_operator(x: Field, bc_kind: BcKind) -> Field:
    """Matrix-free application of the eliminated operator A to ``x``.

    Only the interior values of ``x`` participate: the boundary layer is
    treated as zero and ghosts are filled with the homogeneous reflection for
    ``bc_kind``.  The result has zero boundary and ghost entries.
    """
    out = Field.zeros(x.grid)
    core = OperatorCore(x.grid, bc_kind)
    out.interior[...] = core.apply_into(x.interior, _interior_buffer(x.grid))
    return out


def apply_transpose(x: Field, bc_kind: BcKind) -> Field:
    """Matrix-free application of A^T, derived through the adjoint.

    A factors as (restrict-to-interior o raw stencil) o (extend with
    homogeneous ghosts).  The raw stencil is a symmetric convolution, so the
    transpose is: zero-extend x, apply the raw stencil, then add the adjoint
    of the ghost reflection, which folds the stencil value at each face ghost
    (that is just x at the mirrored interior node, weighted by the distance-2
    coefficient) back onto that node with the reflection sign.  No symmetry
    of A is assumed.
    """
    out = Field.zeros(x.grid)
    core = OperatorCore(x.grid, bc_kind)
    out.interior[...] = core.apply_into(x.interior, _interior_buffer(x.grid),
                                        transpose=True)
    return out


def _interior_buffer(grid: GridSpec) -> np.ndarray:
    ni = grid.n - 1
    return np.empty((ni, ni, ni))


class OperatorCore:
    """Reusable-workspace form of the operator for tight iteration loops.

    ``apply_into(src, out, transpose)`` maps contiguous (n-1)^3 interior
    arrays; the internal buffer keeps its boundary layer at zero between
    calls, so each application costs one interior write, a ghost-ring update
    and one stencil sweep.
    """

    def __init__(self, grid: GridSpec, bc_kind: BcKind):
        self.grid = grid
        self.bc_kind = bc_kind
        self._buf = np.zeros(grid.shape)
        self._zero_bc = _ZeroFaces(bc_kind, grid.n)

    def apply_into(self, src: np.ndarray, out: np.ndarray,
                   transpose: bool = False) -> np.ndarray:
        grid = self.grid
        v = self._buf
        v[2:-2, 2:-2, 2:-2] = src
        if not transpose:
            _fill_ghosts_inplace(v, grid, self._zero_bc, True)
            _stencil_kernel(v, out)
        else:
            for axis in range(3):
                idx = [slice(None)] * 3
                idx[axis] = 0
                v[tuple(idx)] = 0.0
                idx[axis] = -1
                v[tuple(idx)] = 0.0
            _stencil_kernel(v, out)
            sign = W_AXIS2 if self.bc_kind is BcKind.FIRST else -W_AXIS2
            ni = grid.n - 1
            for axis in range(3):
                for layer in (0, ni - 1):
                    idx = [slice(None)] * 3
                    idx[axis] = layer
                    out[tuple(idx)] += sign * src[tuple(idx)]
        return out


@dataclass
class DiscreteSystem:
    """The linear system on one grid: matrix-free operator plus assembled rhs."""

    grid: GridSpec
    bc: BoundaryData
    rhs: Field

    def apply(self, x: Field) -> Field:
        return apply_operator(x, self.bc.kind)

    def apply_transpose(self, x: Field) -> Field:
        return apply_transpose(x, self.bc.kind)

    def operator_core(self) -> OperatorCore:
        return OperatorCore(self.grid, self.bc.kind)


def build_rhs(f_samples: Field, bc: BoundaryData) -> Field:
    """Assemble the right-hand side h^4*f minus the eliminated boundary terms.

    The boundary contribution is the raw stencil applied to the field that is
    zero on the interior, g1 on the boundary and ghost-filled with the actual
    data, so A u + (that contribution) reproduces the full discrete equations.
    """
    grid = f_samples.grid
    if bc.n != grid.n:
        raise ValueError(f"boundary data for n={bc.n} applied to n={grid.n}")
    bdry = Field.zeros(grid)
    paint_boundary(bdry, bc)
    bdry = fill_ghosts(bdry, bc, homogeneous=False)
    out = Field.zeros(grid)
    h4 = grid.h**4
    out.interior[...] = h4 * f_samples.interior - _stencil_interior(bdry.values)
    return out


def assemble_system(f_samples: Field, bc: BoundaryData) -> DiscreteSystem:
    return DiscreteSystem(f_samples.grid, bc, build_rhs(f_samples, bc))


def residual(system: DiscreteSystem, u: Field):
    """Residual field rhs - A u and the relative residual |r|/|rhs| (RMS)."""
    if u.grid.n != system.grid.n:
        raise ValueError(f"grid mismatch: n={u.grid.n} vs n={system.grid.n}")
    r = Field.zeros(system.grid)
    r.interior[...] = system.rhs.interior - system.apply(u).interior
    denom = rms(system.rhs.interior)
    relres = rms(r.interior) / denom if denom > 0.0 else 0.0
    return r, relres
