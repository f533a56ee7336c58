"""1D uniform pipe meshes, the P0/P1 discrete spaces, and grid transfer operators.

Each pipe carries a uniform mesh with cells T_i = [x_{i-1}, x_i].  Densities
live in P0 (one value per cell), mass fluxes in P1 (continuous piecewise
linear, one value per node).  Nested-grid differences and Lp norms are
computed by exact per-element integration where the integrand is polynomial.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GridMismatchError


def gauss_rule(order):
    """Gauss-Legendre points/weights on [0, 1]; weights sum to one exactly.

    The middle weight absorbs the floating-point defect of the unit sum so
    that quadrature of constants (and hence residuals of constant states) is
    exact.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    w = 0.5 * w
    mid = order // 2
    w[mid] = 1.0 - (w.sum() - w[mid])
    return 0.5 * (x + 1.0), w


# Fixed rules: 3-point for all scheme/energy integrals (exact for the
# polynomial integrands of the discretization), 4-point for cubic |.|^3
# norms, 5-point for projecting analytic initial data.
GAUSS3 = gauss_rule(3)
GAUSS4 = gauss_rule(4)
GAUSS5 = gauss_rule(5)


@dataclass(frozen=True)
class PipeGrid:
    """Uniform mesh of a pipe of length `ell` with `num_cells` cells."""

    ell: float
    num_cells: int

    def __post_init__(self):
        if self.ell <= 0:
            raise ConfigurationError(f"pipe length must be positive, got {self.ell}")
        if self.num_cells < 1:
            raise ConfigurationError(f"cell count must be >= 1, got {self.num_cells}")

    @property
    def h(self):
        return self.ell / self.num_cells

    def nodes(self):
        return np.linspace(0.0, self.ell, self.num_cells + 1)

    def refined(self, factor=2):
        return PipeGrid(self.ell, self.num_cells * factor)


class P0Field:
    """Piecewise constant function: one value per cell."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.num_cells,):
            raise GridMismatchError(
                f"P0Field needs {grid.num_cells} cell values, got shape {values.shape}"
            )
        self.grid = grid
        self.values = values


class P1Field:
    """Continuous piecewise linear function: one value per node."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.num_cells + 1,):
            raise GridMismatchError(
                f"P1Field needs {grid.num_cells + 1} nodal values, got shape {values.shape}"
            )
        self.grid = grid
        self.values = values


def _evaluate(f, x):
    try:
        vals = np.asarray(f(x), dtype=float)
        if vals.shape == x.shape:
            return vals
    except (TypeError, ValueError):
        pass
    # scalar-only callable
    flat = np.asarray([f(xi) for xi in x.ravel()], dtype=float)
    return flat.reshape(x.shape)


def l2_project_p0(f, grid, order=5):
    """L2-orthogonal projection of `f` onto P0: cell averages by Gauss quadrature."""
    g, w = gauss_rule(order)
    h = grid.h
    lefts = h * np.arange(grid.num_cells)
    pts = lefts[:, None] + h * g[None, :]
    vals = _evaluate(f, pts)
    return P0Field(grid, vals @ w)


def interpolate_p1(f, grid):
    """Nodal interpolation of a continuous function onto P1."""
    return P1Field(grid, _evaluate(f, grid.nodes()))


def derivative_p1(field):
    """Exact derivative of a P1 field: the P0 field of nodal differences / h."""
    v = field.values
    return P0Field(field.grid, (v[1:] - v[:-1]) / field.grid.h)


def _p1_l2_sq(h, vals):
    """Exact integral of u^2 over the mesh for P1 nodal values `vals`."""
    a, b = vals[:-1], vals[1:]
    return h / 3.0 * float(np.sum(a * a + a * b + b * b))


def lp_norm(field, p):
    """L^p norm of a P0 or P1 field for p in {2, 3, inf}.

    p=2 is integrated exactly; p=3 uses 4-point Gauss per element (exact
    unless a P1 field changes sign inside an element); p=inf takes the max
    over cell values / nodes, where piecewise linear functions attain their
    extrema.
    """
    v = field.values
    h = field.grid.h
    if isinstance(field, P0Field):
        if p == 2:
            return math.sqrt(h * float(np.sum(v * v)))
        if p == 3:
            return (h * float(np.sum(np.abs(v) ** 3))) ** (1.0 / 3.0)
        if p in (math.inf, np.inf):
            return float(np.max(np.abs(v))) if v.size else 0.0
    elif isinstance(field, P1Field):
        if p == 2:
            return math.sqrt(_p1_l2_sq(h, v))
        if p == 3:
            g, w = GAUSS4
            gp = np.outer(v[:-1], 1.0 - g) + np.outer(v[1:], g)
            return (h * float(np.sum(np.abs(gp) ** 3 @ w))) ** (1.0 / 3.0)
        if p in (math.inf, np.inf):
            return float(np.max(np.abs(v)))
    else:
        raise TypeError(f"unsupported field type {type(field).__name__}")
    raise ConfigurationError(f"unsupported norm exponent p={p}; use 2, 3 or inf")


def _check_nested(coarse, fine):
    if fine.grid.num_cells != 2 * coarse.grid.num_cells or not math.isclose(
        fine.grid.ell, coarse.grid.ell, rel_tol=1e-14
    ):
        raise GridMismatchError(
            "nested_l2_diff needs a fine grid with exactly twice the cells of "
            f"the coarse grid on the same pipe; got {coarse.grid} vs {fine.grid}"
        )


def nested_l2_diff(coarse, fine):
    """Exact L2 norm of the difference of a coarse field and its h/2 refinement peer.

    Both fields are piecewise polynomial on the fine mesh, so the difference
    is integrated exactly element by element.  Supports P0-P0 and P1-P1 pairs.
    """
    _check_nested(coarse, fine)
    hf = fine.grid.h
    if isinstance(coarse, P0Field) and isinstance(fine, P0Field):
        d = np.repeat(coarse.values, 2) - fine.values
        return math.sqrt(hf * float(np.sum(d * d)))
    if isinstance(coarse, P1Field) and isinstance(fine, P1Field):
        cv = coarse.values
        on_fine = np.empty(fine.grid.num_cells + 1)
        on_fine[0::2] = cv
        on_fine[1::2] = 0.5 * (cv[:-1] + cv[1:])
        return math.sqrt(_p1_l2_sq(hf, on_fine - fine.values))
    raise TypeError(
        f"mixed field types: {type(coarse).__name__} vs {type(fine).__name__}"
    )
