"""Directed pipe-network topology, junction bookkeeping, and boundary data.

A network is a connected directed graph.  Each edge is a pipe parametrized by
[0, length] with constant cross-section `area`, friction coefficient `gamma`,
and a cell count for its mesh.  The incidence sign of an edge at a vertex is
-1 at its start, +1 at its end.  Vertices of degree one form the boundary;
all others are junctions, which carry one enthalpy unknown each and one
flux-balance (Kirchhoff) equation.

Compressors and valves are represented as zero-length bypass edges and are
removed by contracting their endpoints into a single vertex before a network
can be simulated.
"""

import math
from dataclasses import dataclass, field, replace

from .errors import GridMismatchError, TopologyError
from .mesh import PipeGrid


@dataclass(frozen=True)
class PipeEdge:
    name: str
    start: str
    end: str
    length: float = 1.0
    area: float = 1.0
    gamma: float = 1.0
    cells: int = 1


@dataclass
class NetworkTopology:
    """Immutable after construction; safe to share between simulations."""

    vertices: tuple
    edges: tuple

    def __init__(self, vertices, edges):
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        if len(set(self.vertices)) != len(self.vertices):
            raise TopologyError("duplicate vertex names")
        known = set(self.vertices)
        for e in self.edges:
            if e.start not in known or e.end not in known:
                raise TopologyError(f"edge {e.name} references unknown vertices")
        degree = {v: 0 for v in self.vertices}
        for e in self.edges:
            degree[e.start] += 1
            degree[e.end] += 1
        self.boundary_vertices = tuple(v for v in self.vertices if degree[v] == 1)
        self.interior_vertices = tuple(
            v for v in self.vertices if degree[v] != 1
        )

    def incidence(self, edge, vertex):
        if vertex == edge.start:
            return -1
        if vertex == edge.end:
            return 1
        return 0

    def incident_edges(self, vertex):
        """(edge index, incidence sign) pairs for all edges touching `vertex`."""
        out = []
        for i, e in enumerate(self.edges):
            n = self.incidence(e, vertex)
            if n != 0:
                out.append((i, n))
        return out

    def grid(self, edge_index):
        e = self.edges[edge_index]
        return PipeGrid(e.length, e.cells)

    def refined(self, factor):
        """Same network with every edge's cell count multiplied by `factor`."""
        return NetworkTopology(
            self.vertices,
            tuple(replace(e, cells=e.cells * factor) for e in self.edges),
        )

    def is_connected(self):
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        frontier = [self.vertices[0]]
        adj = {v: [] for v in self.vertices}
        for e in self.edges:
            adj[e.start].append(e.end)
            adj[e.end].append(e.start)
        while frontier:
            v = frontier.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == len(self.vertices)

    def __eq__(self, other):
        return (
            isinstance(other, NetworkTopology)
            and self.vertices == other.vertices
            and self.edges == other.edges
        )


def validate(topo):
    """Diagnostic check of a topology; returns a list of violations (empty = ok)."""
    problems = []
    if not topo.is_connected():
        problems.append("not connected")
    for e in topo.edges:
        if e.length == 0:
            problems.append(f"zero-length edge {e.name} (contract bypass edges first)")
        elif e.length < 0:
            problems.append(f"edge {e.name} has negative length {e.length}")
        if e.area <= 0:
            problems.append(f"edge {e.name} has non-positive area {e.area}")
        if e.gamma <= 0:
            problems.append(f"edge {e.name} has non-positive friction {e.gamma}")
        if e.cells < 1:
            problems.append(f"edge {e.name} has cell count {e.cells} < 1")
        if e.start == e.end:
            problems.append(f"edge {e.name} is a self-loop at {e.start}")
    return problems


def contract_bypass_edges(topo):
    """Remove zero-length edges by identifying their endpoint vertices.

    The surviving representative of each merged group is the vertex that
    appears first in the vertex list.  Raises if a positive-length edge would
    become a self-loop.
    """
    parent = {v: v for v in topo.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    order = {v: i for i, v in enumerate(topo.vertices)}
    for e in topo.edges:
        if e.length == 0:
            a, b = find(e.start), find(e.end)
            if a == b:
                raise TopologyError(
                    f"contracting bypass edge {e.name} creates a self-loop at {a}"
                )
            keep, drop = (a, b) if order[a] < order[b] else (b, a)
            parent[drop] = keep

    new_vertices = tuple(v for v in topo.vertices if find(v) == v)
    new_edges = []
    for e in topo.edges:
        if e.length == 0:
            continue
        s, t = find(e.start), find(e.end)
        if s == t:
            raise TopologyError(
                f"bypass contraction turns edge {e.name} into a self-loop at {s}"
            )
        new_edges.append(replace(e, start=s, end=t))
    return NetworkTopology(new_vertices, tuple(new_edges))


class DofMap:
    """Global unknown layout: per edge all cell densities then all nodal
    fluxes, finally one enthalpy unknown per interior vertex.  Flux endpoint
    degrees of freedom at a shared junction stay distinct per edge; the
    coupling is enforced by the Kirchhoff equations, whose rows sit at the
    vertex-enthalpy indices."""

    def __init__(self, topo):
        for e in topo.edges:
            if e.length <= 0:
                raise TopologyError(
                    f"edge {e.name} has length {e.length}; contract bypass edges "
                    "before building degrees of freedom"
                )
        self.topo = topo
        self.rho_slices = []
        self.m_slices = []
        off = 0
        for e in topo.edges:
            self.rho_slices.append(slice(off, off + e.cells))
            off += e.cells
            self.m_slices.append(slice(off, off + e.cells + 1))
            off += e.cells + 1
        self.hv_index = {v: off + i for i, v in enumerate(topo.interior_vertices)}
        self.n_dofs = off + len(topo.interior_vertices)

    def compatible(self, other):
        return self.topo == other.topo


# ---------------------------------------------------------------------------
# Boundary enthalpy signals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantEnthalpy:
    """h(tau) = value."""

    value: float
    kind: str = field(default="constant", init=False)

    def __call__(self, tau):
        return self.value


@dataclass(frozen=True)
class SinCubedEnthalpy:
    """h(tau) = amplitude * sin(phase + omega*tau)^3 + offset."""

    amplitude: float
    offset: float = 1.0
    omega: float = math.pi
    phase: float = 0.0
    kind: str = field(default="sin3", init=False)

    def __call__(self, tau):
        return self.amplitude * math.sin(self.phase + self.omega * tau) ** 3 + self.offset


def kirchhoff_residual(state, topo):
    """Signed flux sum at each interior vertex (zero for conservative states)."""
    if state.dofmap.topo != topo:
        raise GridMismatchError("state does not live on the given topology")
    out = {}
    for v in topo.interior_vertices:
        s = 0.0
        for ei, n in topo.incident_edges(v):
            m = state.m(ei)
            s += n * (m[-1] if n > 0 else m[0])
        out[v] = s
    return out


# ---------------------------------------------------------------------------
# Built-in networks
# ---------------------------------------------------------------------------

def single_pipe(length=1.0, area=1.0, gamma=1.0, cells=16):
    """One pipe between two boundary vertices v0 -> v1."""
    return NetworkTopology(
        ("v0", "v1"),
        (PipeEdge("pipe", "v0", "v1", length, area, gamma, cells),),
    )


def gaslib11_raw(cells=16):
    """The 11-vertex benchmark network: 8 unit pipes plus two compressor
    stations and one valve in bypass mode (zero-length edges)."""
    vertices = ("v1", "v2", "v2p", "v2pp", "v3", "v4", "v5", "v6", "v6p", "v7", "v8")
    p = dict(length=1.0, area=1.0, gamma=1.0, cells=cells)
    edges = (
        PipeEdge("e1", "v1", "v2", **p),
        PipeEdge("e2", "v2p", "v3", **p),
        PipeEdge("e3", "v5", "v2pp", **p),
        PipeEdge("e4", "v3", "v4", **p),
        PipeEdge("e5", "v3", "v6", **p),
        PipeEdge("e6", "v2pp", "v6", **p),
        PipeEdge("e7", "v6p", "v7", **p),
        PipeEdge("e8", "v6p", "v8", **p),
        PipeEdge("cs1", "v2", "v2p", 0.0, 1.0, 1.0, 1),
        PipeEdge("cs2", "v6", "v6p", 0.0, 1.0, 1.0, 1),
        PipeEdge("vlv", "v2p", "v2pp", 0.0, 1.0, 1.0, 1),
    )
    return NetworkTopology(vertices, edges)


def gaslib11(cells=16):
    """Contracted 8-pipe benchmark network with its boundary enthalpy signals.

    Returns (topology, boundary) where boundary maps the five degree-one
    vertices to their prescribed enthalpy time functions.
    """
    topo = contract_bypass_edges(gaslib11_raw(cells=cells))
    boundary = {
        "v1": SinCubedEnthalpy(0.2),
        "v5": SinCubedEnthalpy(0.3),
        "v4": ConstantEnthalpy(1.0),
        "v7": ConstantEnthalpy(1.0),
        "v8": ConstantEnthalpy(1.0),
    }
    return topo, boundary
