"""Global residual and Jacobian assembly for the implicit Euler step.

One NetworkSystem instance precomputes the sparsity structure and per-edge
geometry for a topology, then assembles residual vectors and sparse Jacobians
for arbitrary states.  The same code path serves transient steps, the
stationary problem (time-difference terms deleted), and the parabolic limit
eps = 0 (where the eps^2 momentum time term is skipped exactly).

Junctions use the vertex-enthalpy multiplier formulation: nodal fluxes are
unconstrained per edge, every interior vertex carries one enthalpy unknown
h_v that enters the incident momentum equations like a boundary value, and
one Kirchhoff flux-balance equation per interior vertex closes the system.
"""

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ConfigurationError, DomainError, GridMismatchError, TopologyError
from .mesh import gauss_rule
from .network import DofMap, validate
from .state import DiscreteState


class NetworkSystem:
    """Assembler for one (topology, pressure law, epsilon, boundary) bundle."""

    def __init__(self, topo, law, eps, boundary, quad_order=3):
        problems = validate(topo)
        if problems:
            raise TopologyError("; ".join(problems))
        missing = [v for v in topo.boundary_vertices if v not in boundary]
        if missing:
            raise ConfigurationError(f"boundary data missing for vertices {missing}")
        self.topo = topo
        self.law = law
        self.eps = float(eps)
        self.eps2 = float(eps) ** 2
        self.boundary = dict(boundary)
        self.quad_order = quad_order
        self.dofmap = DofMap(topo)
        self._g, self._w = gauss_rule(quad_order)
        if quad_order == 3:
            self._kern = kernels
        else:
            # compiled kernels are built for the production 3-point rule
            from .kernels import _numpy as _kern

            self._kern = _kern

        n = self.dofmap.n_dofs
        self._edge = []
        rows, cols = [], []
        cell_rows, cell_cols = [], []
        # endpoint bookkeeping: (m_dof, sign, vertex, interior?)
        self._endpoints = []
        for i, e in enumerate(topo.edges):
            rs = self.dofmap.rho_slices[i]
            ms = self.dofmap.m_slices[i]
            grid = topo.grid(i)
            self._edge.append((rs, ms, grid.h, e.area, e.gamma))
            rho_dofs = np.arange(rs.start, rs.stop)
            m_dofs = np.arange(ms.start, ms.stop)
            # cell rows: d(res_rho_i)/d(rho_i, m_i, m_{i+1}) = (a h / dt, -1, +1)
            cell_rows.extend([rho_dofs, rho_dofs, rho_dofs])
            cell_cols.extend([rho_dofs, m_dofs[:-1], m_dofs[1:]])
            # momentum rows: per element, rows (L, L, L, R, R, R),
            # columns (m_L, m_R, rho) twice, matching the kernel data layout
            el_rows = np.repeat(
                np.column_stack([m_dofs[:-1], m_dofs[1:]]), 3, axis=1
            ).ravel()
            el_cols = np.tile(
                np.column_stack([m_dofs[:-1], m_dofs[1:], rho_dofs]), (1, 2)
            ).ravel()
            rows.append(el_rows)
            cols.append(el_cols)
            for local, vertex in ((0, e.start), (-1, e.end)):
                sign = -1.0 if local == 0 else 1.0
                m_dof = m_dofs[0] if local == 0 else m_dofs[-1]
                self._endpoints.append(
                    (m_dof, sign, vertex, vertex in self.dofmap.hv_index)
                )

        self._cell_rows = np.concatenate(cell_rows)
        self._cell_cols = np.concatenate(cell_cols)
        self._mom_rows = np.concatenate(rows)
        self._mom_cols = np.concatenate(cols)

        coup_rows, coup_cols, coup_data = [], [], []
        for m_dof, sign, vertex, interior in self._endpoints:
            if interior:
                hv = self.dofmap.hv_index[vertex]
                coup_rows.extend([m_dof, hv])
                coup_cols.extend([hv, m_dof])
                coup_data.extend([sign, sign])
        self._coup_rows = np.array(coup_rows, dtype=np.int64)
        self._coup_cols = np.array(coup_cols, dtype=np.int64)
        self._coup_data = np.array(coup_data)

        self._rows = np.concatenate([self._cell_rows, self._mom_rows, self._coup_rows])
        self._cols = np.concatenate([self._cell_cols, self._mom_cols, self._coup_cols])
        self._shape = (n, n)
        self._cell_cache = (None, None, None)  # (dt, stationary, data)

    # -- boundary -----------------------------------------------------------

    def boundary_values(self, tau):
        return {v: self.boundary[v](tau) for v in self.topo.boundary_vertices}

    # -- residual -----------------------------------------------------------

    def residual(self, x_new, x_old, dt, bvals, stationary=False):
        """Residual of the fully discrete system at x_new given level x_old.

        `bvals` maps boundary vertices to enthalpy values (already evaluated
        at the new time).  Raises DomainError on non-positive densities.
        """
        res = np.zeros(self.dofmap.n_dofs)
        for i, (rs, ms, h, area, gamma) in enumerate(self._edge):
            rho_n = x_new[rs]
            if np.any(rho_n <= 0.0):
                j = int(np.argmin(rho_n))
                raise DomainError(
                    f"non-positive density {rho_n[j]} in cell {j} of edge "
                    f"{self.topo.edges[i].name}"
                )
            pp = np.asarray(self.law.potential_prime(rho_n), dtype=float)
            self._kern.edge_residual(
                rho_n, x_old[rs], x_new[ms], x_old[ms], pp,
                h, area, gamma, dt, self.eps2, stationary,
                self._g, self._w, res[rs], res[ms],
            )
        for m_dof, sign, vertex, interior in self._endpoints:
            if interior:
                hv = self.dofmap.hv_index[vertex]
                res[m_dof] += sign * x_new[hv]
                res[hv] += sign * x_new[m_dof]
            else:
                res[m_dof] += sign * bvals[vertex]
        return res

    # -- jacobian -----------------------------------------------------------

    def _cell_data(self, dt, stationary):
        # layout matches _cell_rows/_cell_cols: per edge the blocks
        # (rho diagonal, left flux node, right flux node)
        key = (dt, stationary)
        if self._cell_cache[:2] != key:
            data = []
            for rs, ms, h, area, gamma in self._edge:
                cells = rs.stop - rs.start
                diag = 0.0 if stationary else area * h / dt
                data.append(np.full(cells, diag))
                data.append(np.full(cells, -1.0))
                data.append(np.full(cells, 1.0))
            self._cell_cache = (dt, stationary, np.concatenate(data))
        return self._cell_cache[2]

    def jacobian(self, x_new, dt, stationary=False, slope_floor=0.0):
        """Sparse Jacobian of `residual` with respect to x_new.

        `slope_floor` > 0 replaces the friction slope 2|w| by
        max(2|w|, slope_floor) — a solver-side regularization used only when
        the exact linearization is singular (all velocities exactly zero on
        some pipe with eps = 0); the assembled residual never changes.
        """
        mom_parts = []
        for i, (rs, ms, h, area, gamma) in enumerate(self._edge):
            rho_n = x_new[rs]
            if np.any(rho_n <= 0.0):
                raise DomainError(
                    f"non-positive density on edge {self.topo.edges[i].name}"
                )
            pp2 = np.asarray(self.law.potential_second(rho_n), dtype=float)
            data = np.empty((rs.stop - rs.start, 6))
            self._kern.edge_jacobian(
                rho_n, x_new[ms], pp2, h, area, gamma, dt, self.eps2,
                stationary, slope_floor, self._g, self._w, data,
            )
            mom_parts.append(data.ravel())
        data = np.concatenate(
            [self._cell_data(dt, stationary)] + mom_parts + [self._coup_data]
        )
        return sp.csc_matrix((data, (self._rows, self._cols)), shape=self._shape)

    # -- state helpers ------------------------------------------------------

    def state(self, x, tau):
        return DiscreteState(self.dofmap, x, tau=tau)


def assemble_residual(state_new, state_old, dt, topo, boundary, law, scaling,
                      stationary=False):
    """One-shot residual assembly mirroring NetworkSystem.residual."""
    state_new.check_same_grid(state_old)
    if state_new.topo != topo:
        raise GridMismatchError("states do not live on the given topology")
    system = NetworkSystem(topo, law, scaling.epsilon, boundary)
    bvals = system.boundary_values(state_new.tau)
    return system.residual(state_new.vector, state_old.vector, dt, bvals,
                           stationary=stationary)


def assemble_jacobian(state_new, state_old, dt, topo, boundary, law, scaling,
                      stationary=False):
    """One-shot Jacobian assembly mirroring NetworkSystem.jacobian."""
    state_new.check_same_grid(state_old)
    if state_new.topo != topo:
        raise GridMismatchError("states do not live on the given topology")
    system = NetworkSystem(topo, law, scaling.epsilon, boundary)
    return system.jacobian(state_new.vector, dt, stationary=stationary)
