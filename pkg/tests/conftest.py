"""Shared oracles and helpers for the test suite.

The dense assembly helpers build explicit matrices by probing the matrix-free
operators with unit vectors; the literal 25-term stencil evaluation is an
independent re-statement of the weight table used to cross-check the
production kernel.
"""

import numpy as np
import pytest

from excmg3d.grid import Field, GridSpec
from excmg3d.stencil import (
    W_AXIS1,
    W_AXIS2,
    W_CENTER,
    W_DIAG,
    apply_operator,
    apply_transpose,
)


def unit_field(grid: GridSpec, flat_index: int) -> Field:
    ni = grid.n - 1
    e = Field.zeros(grid)
    e.interior[np.unravel_index(flat_index, (ni, ni, ni))] = 1.0
    return e


def dense_operator(n: int, kind, transpose: bool = False) -> np.ndarray:
    """Explicit matrix of the eliminated operator, one probe per column."""
    grid = GridSpec(n)
    m = (n - 1) ** 3
    a = np.zeros((m, m))
    fn = apply_transpose if transpose else apply_operator
    for col in range(m):
        a[:, col] = fn(unit_field(grid, col), kind).interior.ravel()
    return a


def random_interior(grid: GridSpec, rng) -> Field:
    f = Field.zeros(grid)
    f.interior[...] = rng.standard_normal(f.interior.shape)
    return f


def literal_stencil_25(v: np.ndarray, n: int) -> np.ndarray:
    """The 25-term weight table written out literally (test oracle)."""

    def sh(di, dj, dk):
        return v[2 + di:n + 1 + di, 2 + dj:n + 1 + dj, 2 + dk:n + 1 + dk]

    out = W_CENTER * sh(0, 0, 0)
    out += W_AXIS1 * (sh(-1, 0, 0) + sh(1, 0, 0) + sh(0, -1, 0) + sh(0, 1, 0)
                      + sh(0, 0, -1) + sh(0, 0, 1))
    out += W_AXIS2 * (sh(-2, 0, 0) + sh(2, 0, 0) + sh(0, -2, 0) + sh(0, 2, 0)
                      + sh(0, 0, -2) + sh(0, 0, 2))
    out += W_DIAG * (sh(-1, -1, 0) + sh(-1, 1, 0) + sh(1, -1, 0) + sh(1, 1, 0)
                     + sh(-1, 0, -1) + sh(1, 0, -1) + sh(0, -1, -1) + sh(0, 1, -1)
                     + sh(-1, 0, 1) + sh(1, 0, 1) + sh(0, -1, 1) + sh(0, 1, 1))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
