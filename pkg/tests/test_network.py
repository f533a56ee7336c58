import math

import numpy as np
import pytest

from pipeflow import (
    ConstantEnthalpy,
    DiscreteState,
    DofMap,
    NetworkTopology,
    PipeEdge,
    SinCubedEnthalpy,
    TopologyError,
    contract_bypass_edges,
    gaslib11,
    gaslib11_raw,
    kirchhoff_residual,
    single_pipe,
    validate,
)


def y_junction(cells=2):
    """Two pipes feeding one outgoing pipe through junction j."""
    return NetworkTopology(
        ("a", "b", "j", "c"),
        (
            PipeEdge("in1", "a", "j", cells=cells),
            PipeEdge("in2", "b", "j", cells=cells),
            PipeEdge("out", "j", "c", cells=cells),
        ),
    )


class TestTopology:
    def test_single_pipe_boundary_partition(self):
        topo = single_pipe()
        assert topo.boundary_vertices == ("v0", "v1")
        assert topo.interior_vertices == ()

    def test_incidence_signs(self):
        topo = single_pipe()
        e = topo.edges[0]
        assert topo.incidence(e, "v0") == -1
        assert topo.incidence(e, "v1") == 1
        topo2 = y_junction()
        assert topo2.incidence(topo2.edges[0], "b") == 0

    def test_junction_partition_is_derived(self):
        topo = y_junction()
        assert set(topo.boundary_vertices) == {"a", "b", "c"}
        assert topo.interior_vertices == ("j",)

    def test_duplicate_vertices_rejected(self):
        with pytest.raises(TopologyError):
            NetworkTopology(("a", "a"), ())

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(TopologyError):
            NetworkTopology(("a",), (PipeEdge("e", "a", "zz"),))

    def test_refined_scales_cells(self):
        topo = y_junction(cells=3).refined(4)
        assert all(e.cells == 12 for e in topo.edges)


class TestValidate:
    def test_single_pipe_ok(self):
        assert validate(single_pipe()) == []

    def test_disconnected_reported(self):
        topo = NetworkTopology(
            ("a", "b", "c", "d"),
            (PipeEdge("e1", "a", "b"), PipeEdge("e2", "c", "d")),
        )
        assert any("not connected" in p for p in validate(topo))

    def test_zero_length_edge_reported(self):
        topo = NetworkTopology(
            ("a", "b", "c"),
            (PipeEdge("e1", "a", "b"), PipeEdge("byp", "b", "c", length=0.0)),
        )
        assert any("zero-length" in p for p in validate(topo))

    def test_bad_parameters_reported(self):
        topo = NetworkTopology(
            ("a", "b"), (PipeEdge("e", "a", "b", area=-1.0, gamma=0.0, cells=0),)
        )
        problems = validate(topo)
        assert len(problems) == 3


class TestContraction:
    def test_identity_without_bypass_edges(self):
        topo = y_junction()
        assert contract_bypass_edges(topo) == topo

    def test_chain_contraction(self):
        topo = NetworkTopology(
            ("a", "b", "c"),
            (PipeEdge("byp", "a", "b", length=0.0), PipeEdge("e", "b", "c")),
        )
        out = contract_bypass_edges(topo)
        assert out.vertices == ("a", "c")
        assert len(out.edges) == 1
        assert (out.edges[0].start, out.edges[0].end) == ("a", "c")

    def test_idempotent(self):
        out = contract_bypass_edges(gaslib11_raw())
        assert contract_bypass_edges(out) == out

    def test_self_loop_detected(self):
        topo = NetworkTopology(
            ("a", "b"),
            (PipeEdge("e", "a", "b"), PipeEdge("byp", "a", "b", length=0.0)),
        )
        with pytest.raises(TopologyError):
            contract_bypass_edges(topo)

    def test_gaslib11_contraction(self):
        out = contract_bypass_edges(gaslib11_raw())
        assert len(out.vertices) == 8
        assert len(out.edges) == 8
        assert set(out.boundary_vertices) == {"v1", "v4", "v5", "v7", "v8"}
        # merged junctions keep the surviving representative names
        assert set(out.interior_vertices) == {"v2", "v3", "v6"}


class TestGaslib11:
    def test_shape(self):
        topo, boundary = gaslib11()
        assert len(topo.edges) == 8
        assert len(topo.boundary_vertices) == 5
        assert all(e.length == 1.0 and e.area == 1.0 and e.gamma == 1.0
                   for e in topo.edges)

    def test_matches_contracted_raw(self):
        topo, _ = gaslib11(cells=4)
        assert topo == contract_bypass_edges(gaslib11_raw(cells=4))

    def test_boundary_signals(self):
        _, boundary = gaslib11()
        assert boundary["v5"](0.5) == pytest.approx(1.3, rel=1e-14)
        assert boundary["v1"](0.5) == pytest.approx(1.2, rel=1e-14)
        for tau in (0.0, 0.3, 1.0):
            assert boundary["v4"](tau) == 1.0
            assert boundary["v7"](tau) == 1.0
            assert boundary["v8"](tau) == 1.0

    def test_all_signals_one_at_start(self):
        _, boundary = gaslib11()
        for fn in boundary.values():
            assert fn(0.0) == pytest.approx(1.0, abs=1e-15)


class TestBoundaryFunctions:
    def test_constant(self):
        assert ConstantEnthalpy(2.5)(0.7) == 2.5

    def test_sin_cubed(self):
        fn = SinCubedEnthalpy(0.1, phase=math.pi)
        assert fn(0.0) == pytest.approx(1.0, abs=1e-15)
        assert fn(0.5) == pytest.approx(0.9, rel=1e-14)


class TestDofMap:
    def test_layout_is_disjoint_and_exhaustive(self):
        topo = y_junction(cells=3)
        dm = DofMap(topo)
        covered = []
        for rs, ms in zip(dm.rho_slices, dm.m_slices):
            covered.extend(range(rs.start, rs.stop))
            covered.extend(range(ms.start, ms.stop))
        covered.extend(dm.hv_index.values())
        assert sorted(covered) == list(range(dm.n_dofs))
        assert dm.n_dofs == 3 * (3 + 4) + 1

    def test_rejects_zero_length_edges(self):
        with pytest.raises(TopologyError):
            DofMap(gaslib11_raw())


class TestKirchhoff:
    def test_zero_flux(self):
        topo = y_junction()
        state = DiscreteState.uniform(DofMap(topo), 1.0, 0.0)
        assert kirchhoff_residual(state, topo) == {"j": 0.0}

    def test_balanced_junction(self):
        topo = y_junction(cells=2)
        dm = DofMap(topo)
        m_in1 = np.array([0.0, 0.5, 1.0])
        m_in2 = np.array([0.0, 0.5, 1.0])
        m_out = np.array([2.0, 1.0, 0.0])
        state = DiscreteState.from_fields(
            dm, [np.ones(2)] * 3, [m_in1, m_in2, m_out], hv={"j": 0.0}
        )
        assert kirchhoff_residual(state, topo)["j"] == pytest.approx(0.0, abs=1e-15)

    def test_imbalance_measured(self):
        topo = y_junction(cells=2)
        dm = DofMap(topo)
        state = DiscreteState.from_fields(
            dm,
            [np.ones(2)] * 3,
            [np.array([0, 0.5, 1.0]), np.array([0, 0.5, 1.0]), np.array([1.5, 1, 0])],
            hv={"j": 0.0},
        )
        assert kirchhoff_residual(state, topo)["j"] == pytest.approx(0.5, rel=1e-14)
