"""Uniform cubic grids, the embedded grid hierarchy, and node-indexed fields.

The computational domain is the unit cube [0, 1]^3 discretized with n uniform
intervals per axis (mesh size h = 1/n).  Nodes carry indices (i, j, k) with
i, j, k = 0..n; index 0 and n are boundary nodes, 1..n-1 are the interior
unknowns.  Every field additionally stores one layer of ghost nodes at
indices -1 and n+1 on each axis, so a wide difference stencil can be applied
uniformly at every interior node once the ghosts are filled.

Storage convention: node (i, j, k) lives at ``values[i + 1, j + 1, k + 1]``
in an array of shape (n + 3)^3.
"""

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """A uniform n-interval grid on [0, 1]^3."""

    n: int

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"grid needs n >= 4 intervals, got n={self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        """Array shape including the one-node ghost ring."""
        m = self.n + 3
        return (m, m, m)

    @property
    def num_interior(self) -> int:
        return (self.n - 1) ** 3


def node_position(grid: GridSpec, i: int, j: int, k: int):
    """Physical coordinates (i*h, j*h, k*h); ghost indices -1 and n+1 are legal."""
    h = grid.h
    return (i * h, j * h, k * h)


def node_coords(grid: GridSpec, ghosts: bool = False) -> np.ndarray:
    """1D coordinate array for node indices 0..n (or -1..n+1 with ghosts)."""
    if ghosts:
        return np.arange(-1, grid.n + 2) * grid.h
    return np.arange(grid.n + 1) * grid.h


@dataclass(frozen=True)
class Hierarchy:
    """Ladder of nested grids, coarsest first, n doubling at each level.

    Every fine node (2i, 2j, 2k) coincides geometrically with coarse node
    (i, j, k), so injection between adjacent levels is an index map.
    """

    levels: tuple[GridSpec, ...]

    @property
    def coarse_n(self) -> int:
        return self.levels[0].n

    @property
    def total_levels(self) -> int:
        return len(self.levels)

    @property
    def finest(self) -> GridSpec:
        return self.levels[-1]


def build_hierarchy(coarse_n: int, extra_levels: int) -> Hierarchy:
    """Build the ladder of ``extra_levels + 2`` grids used by the cascade.

    The two coarsest grids (coarse_n and 2*coarse_n intervals) are reserved
    for direct solves; each of the remaining ``extra_levels`` grids doubles n
    again, so the finest grid has ``coarse_n * 2**(extra_levels + 1)``
    intervals.
    """
    if coarse_n < 4:
        raise ValueError(f"coarsest grid needs n >= 4, got {coarse_n}")
    if extra_levels < 0:
        raise ValueError(f"extra_levels must be >= 0, got {extra_levels}")
    levels = tuple(GridSpec(coarse_n * 2**k) for k in range(extra_levels + 2))
    return Hierarchy(levels)


@dataclass
class Field:
    """Scalar nodal values on one grid, including the ghost ring.

    ``values`` has shape (n + 3)^3; node (i, j, k) is ``values[i+1, j+1, k+1]``.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field array shape {self.values.shape} does not match "
                f"grid shape {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def sample(cls, grid: GridSpec, fn, ghosts: bool = False) -> "Field":
        """Sample ``fn(x, y, z)`` at all nodes 0..n (ghosts stay zero unless
        ``ghosts=True``, in which case the ghost ring is sampled too, which is
        only meaningful for functions defined outside the unit cube)."""
        out = cls.zeros(grid)
        c = node_coords(grid, ghosts=ghosts)
        x = c[:, None, None]
        y = c[None, :, None]
        z = c[None, None, :]
        sl = slice(None) if ghosts else slice(1, -1)
        out.values[sl, sl, sl] = fn(x, y, z)
        return out

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    @property
    def interior(self) -> np.ndarray:
        """View of the interior unknowns, shape (n-1)^3."""
        return self.values[2:-2, 2:-2, 2:-2]

    @property
    def nodes(self) -> np.ndarray:
        """View of all non-ghost nodes 0..n, shape (n+1)^3."""
        return self.values[1:-1, 1:-1, 1:-1]


def _check_same_grid(a: Field, b: Field):
    if a.grid.n != b.grid.n:
        raise ValueError(f"grid mismatch: n={a.grid.n} vs n={b.grid.n}")


def inner_product(a: Field, b: Field) -> float:
    """Bilinear symmetric inner product over interior nodes (serial, deterministic)."""
    _check_same_grid(a, b)
    return float(np.dot(a.interior.ravel(), b.interior.ravel()))


def norm(a: Field, kind: str = "rms") -> float:
    """Discrete norm over interior nodes.

    ``rms`` is the count-normalized L2 norm sqrt(sum a^2 / count); ``max`` is
    the max norm.  rms <= max always holds.
    """
    v = a.interior
    if kind == "rms":
        return float(np.sqrt(np.mean(v * v)))
    if kind == "max":
        return float(np.max(np.abs(v)))
    raise ValueError(f"unknown norm kind {kind!r}")


def rms(arr: np.ndarray) -> float:
    """RMS of a raw array (same scaling as norm(..., 'rms') on interiors)."""
    return float(np.sqrt(np.mean(arr * arr)))


def restrict_inject(fine: Field) -> Field:
    """Injection to the next-coarser grid: coarse(i,j,k) = fine(2i,2j,2k).

    Covers all non-ghost nodes; the ghost ring of the result is left zero.
    """
    if fine.grid.n % 2 != 0:
        raise ValueError(f"cannot inject from odd n={fine.grid.n}")
    coarse = Field.zeros(GridSpec(fine.grid.n // 2))
    coarse.nodes[...] = fine.nodes[::2, ::2, ::2]
    return coarse


def dump_field_csv(a: Field, path) -> None:
    """Debug dump of interior nodes as rows (i, j, k, x, y, z, value)."""
    h = a.grid.h
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "k", "x", "y", "z", "value"])
        n = a.grid.n
        for i in range(1, n):
            for j in range(1, n):
                for k in range(1, n):
                    writer.writerow(
                        [i, j, k, i * h, j * h, k * h,
                         repr(float(a.values[i + 1, j + 1, k + 1]))]
                    )
