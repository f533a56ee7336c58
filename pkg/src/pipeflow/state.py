"""The discrete unknown of one time level: densities, fluxes, junction enthalpies.

Internally a state is one flat vector laid out by a DofMap; per-edge views are
exposed as arrays or as mesh fields.  States are frozen after construction.
"""

import numpy as np

from .errors import DomainError, GridMismatchError
from .mesh import P0Field, P1Field
from .network import DofMap


class DiscreteState:
    __slots__ = ("dofmap", "vector", "tau")

    def __init__(self, dofmap, vector, tau=0.0):
        vector = np.array(vector, dtype=float)
        if vector.shape != (dofmap.n_dofs,):
            raise GridMismatchError(
                f"state vector needs {dofmap.n_dofs} entries, got {vector.shape}"
            )
        vector.flags.writeable = False
        self.dofmap = dofmap
        self.vector = vector
        self.tau = tau

    @classmethod
    def from_fields(cls, dofmap, rho_by_edge, m_by_edge, hv=None, tau=0.0):
        """Build a state from per-edge cell/node arrays and junction enthalpies.

        `rho_by_edge`/`m_by_edge` are sequences ordered like the topology's
        edges; `hv` maps interior vertex name to enthalpy (default 0).
        """
        x = np.zeros(dofmap.n_dofs)
        topo = dofmap.topo
        if len(rho_by_edge) != len(topo.edges) or len(m_by_edge) != len(topo.edges):
            raise GridMismatchError("one density and one flux array per edge required")
        for i in range(len(topo.edges)):
            x[dofmap.rho_slices[i]] = rho_by_edge[i]
            x[dofmap.m_slices[i]] = m_by_edge[i]
        if hv:
            for v, val in hv.items():
                x[dofmap.hv_index[v]] = val
        return cls(dofmap, x, tau=tau)

    @classmethod
    def uniform(cls, dofmap, rho, m=0.0, hv=0.0, tau=0.0):
        x = np.zeros(dofmap.n_dofs)
        for i in range(len(dofmap.topo.edges)):
            x[dofmap.rho_slices[i]] = rho
            x[dofmap.m_slices[i]] = m
        for idx in dofmap.hv_index.values():
            x[idx] = hv
        return cls(dofmap, x, tau=tau)

    def rho(self, edge_index):
        return self.vector[self.dofmap.rho_slices[edge_index]]

    def m(self, edge_index):
        return self.vector[self.dofmap.m_slices[edge_index]]

    def hv(self, vertex):
        return float(self.vector[self.dofmap.hv_index[vertex]])

    def rho_field(self, edge_index):
        return P0Field(self.dofmap.topo.grid(edge_index), self.rho(edge_index))

    def m_field(self, edge_index):
        return P1Field(self.dofmap.topo.grid(edge_index), self.m(edge_index))

    @property
    def topo(self):
        return self.dofmap.topo

    def require_positive_density(self):
        for i, e in enumerate(self.topo.edges):
            r = self.rho(i)
            if np.any(r <= 0.0):
                j = int(np.argmin(r))
                raise DomainError(
                    f"non-positive density {r[j]} in cell {j} of edge {e.name}"
                )

    def check_same_grid(self, other):
        if self.dofmap is not other.dofmap and not self.dofmap.compatible(other.dofmap):
            raise GridMismatchError("states live on different meshes or topologies")


def dofmap_for(topo):
    return DofMap(topo)
