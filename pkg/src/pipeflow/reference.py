"""Slow, independently coded assembly used as a cross-check and as the
dedicated single-pipe solver path.

Everything here is organized around shape functions and plain Python loops
(dense linear algebra, quadrature points from numpy's Legendre module) and
deliberately shares no code with the production kernels, so agreement between
the two routes is a meaningful check.
"""

import numpy as np

from .errors import InitializationError, StepFailure
from .state import DiscreteState


def _rule():
    x, w = np.polynomial.legendre.leggauss(3)
    return 0.5 * (x + 1.0), 0.5 * w


def reference_residual(state_new, state_old, dt, bvals, law, eps, stationary=False):
    """Quadrature-by-summation residual with the same unknown ordering as
    NetworkSystem.residual."""
    dofmap = state_new.dofmap
    topo = dofmap.topo
    eps2 = eps * eps
    res = np.zeros(dofmap.n_dofs)
    pts, wts = _rule()
    for ei, e in enumerate(topo.edges):
        grid = topo.grid(ei)
        h = grid.h
        rho_n, m_n = state_new.rho(ei), state_new.m(ei)
        rho_o, m_o = state_old.rho(ei), state_old.m(ei)
        pp = law.potential_prime(rho_n)
        r0 = dofmap.rho_slices[ei].start
        m0 = dofmap.m_slices[ei].start
        for i in range(grid.num_cells):
            val = m_n[i + 1] - m_n[i]
            if not stationary:
                val += e.area * h * (rho_n[i] - rho_o[i]) / dt
            res[r0 + i] = val
        for i in range(grid.num_cells):
            for t, wq in zip(pts, wts):
                mg = m_n[i] * (1 - t) + m_n[i + 1] * t
                wg = mg / (e.area * rho_n[i])
                h_tot = 0.5 * eps2 * wg * wg + pp[i]
                integ = e.gamma * abs(wg) * wg
                if eps2 != 0.0 and not stationary:
                    mog = m_o[i] * (1 - t) + m_o[i + 1] * t
                    wog = mog / (e.area * rho_o[i])
                    integ += eps2 * (wg - wog) / dt
                for node, shape, dshape in ((i, 1 - t, -1.0 / h), (i + 1, t, 1.0 / h)):
                    res[m0 + node] += h * wq * (integ * shape - h_tot * dshape)
    _add_vertex_terms(res, state_new, bvals)
    return res


def _add_vertex_terms(res, state, bvals):
    dofmap = state.dofmap
    topo = dofmap.topo
    for v in topo.boundary_vertices:
        for ei, n in topo.incident_edges(v):
            ms = dofmap.m_slices[ei]
            m_dof = ms.start if n < 0 else ms.stop - 1
            res[m_dof] += n * bvals[v]
    for v in topo.interior_vertices:
        hv_dof = dofmap.hv_index[v]
        for ei, n in topo.incident_edges(v):
            ms = dofmap.m_slices[ei]
            m_dof = ms.start if n < 0 else ms.stop - 1
            res[m_dof] += n * state.vector[hv_dof]
            res[hv_dof] += n * state.vector[m_dof]


def reference_jacobian(state_new, dt, law, eps, stationary=False, slope_floor=0.0):
    """Dense analytic Jacobian assembled shape-function-wise."""
    dofmap = state_new.dofmap
    topo = dofmap.topo
    eps2 = eps * eps
    n = dofmap.n_dofs
    jac = np.zeros((n, n))
    pts, wts = _rule()
    for ei, e in enumerate(topo.edges):
        grid = topo.grid(ei)
        h = grid.h
        rho_n, m_n = state_new.rho(ei), state_new.m(ei)
        pp2 = law.potential_second(rho_n)
        r0 = dofmap.rho_slices[ei].start
        m0 = dofmap.m_slices[ei].start
        for i in range(grid.num_cells):
            if not stationary:
                jac[r0 + i, r0 + i] += e.area * h / dt
            jac[r0 + i, m0 + i] += -1.0
            jac[r0 + i, m0 + i + 1] += 1.0
        for i in range(grid.num_cells):
            for t, wq in zip(pts, wts):
                mg = m_n[i] * (1 - t) + m_n[i + 1] * t
                wg = mg / (e.area * rho_n[i])
                slope = max(2.0 * abs(wg), slope_floor)
                coef = e.gamma * slope
                if eps2 != 0.0 and not stationary:
                    coef += eps2 / dt
                # columns: (m_i, shape 1-t), (m_{i+1}, shape t), rho_i
                dw = {
                    m0 + i: (1 - t) / (e.area * rho_n[i]),
                    m0 + i + 1: t / (e.area * rho_n[i]),
                    r0 + i: -wg / rho_n[i],
                }
                dh = {
                    m0 + i: eps2 * wg * dw[m0 + i],
                    m0 + i + 1: eps2 * wg * dw[m0 + i + 1],
                    r0 + i: eps2 * wg * dw[r0 + i] + pp2[i],
                }
                for node, shape, dshape in ((i, 1 - t, -1.0 / h), (i + 1, t, 1.0 / h)):
                    for col in dw:
                        jac[m0 + node, col] += h * wq * (
                            coef * dw[col] * shape - dh[col] * dshape
                        )
    for v in topo.interior_vertices:
        hv_dof = dofmap.hv_index[v]
        for ei, n in topo.incident_edges(v):
            ms = dofmap.m_slices[ei]
            m_dof = ms.start if n < 0 else ms.stop - 1
            jac[m_dof, hv_dof] += n
            jac[hv_dof, m_dof] += n
    return jac


# ---------------------------------------------------------------------------
# Dedicated single-pipe solver path
# ---------------------------------------------------------------------------

def _dense_newton(state_guess, state_old, dt, bvals, law, eps, tol, maxit,
                  stationary=False, slope_floor=1.0):
    dofmap = state_guess.dofmap
    x = state_guess.vector.copy()

    def res_of(vec):
        s = DiscreteState(dofmap, vec, tau=state_guess.tau)
        return reference_residual(s, state_old, dt, bvals, law, eps, stationary)

    r = res_of(x)
    it = 0
    while np.max(np.abs(r)) > tol:
        if it >= maxit:
            raise StepFailure("dense Newton stalled", float(np.max(np.abs(r))), it)
        accepted = False
        for floor in (0.0, slope_floor):
            jac = reference_jacobian(
                DiscreteState(dofmap, x, tau=state_guess.tau), dt, law, eps,
                stationary, slope_floor=floor,
            )
            try:
                dx = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError:
                continue
            s = 1.0
            while s >= 1e-4:
                xt = x + s * dx
                if all(np.all(xt[sl] > 0) for sl in dofmap.rho_slices):
                    rt = res_of(xt)
                    if np.linalg.norm(rt) < np.linalg.norm(r):
                        x, r = xt, rt
                        accepted = True
                        break
                s *= 0.5
            if accepted:
                break
        if not accepted:
            raise StepFailure("dense Newton line search failed",
                              float(np.max(np.abs(r))), it)
        it += 1
    return DiscreteState(dofmap, x, tau=state_guess.tau), it


def simulate_single_pipe(scenario):
    """Run a one-edge scenario through the dedicated dense single-pipe path.

    Returns the list of states at tau_0 = 0, ..., tau_N.  Used to verify that
    the network formulation restricted to a 2-vertex/1-edge graph reproduces
    the plain single-pipe scheme.
    """
    from .network import DofMap

    topo = scenario.topo
    if len(topo.edges) != 1 or topo.interior_vertices:
        raise ValueError("simulate_single_pipe needs a single-pipe topology")
    dofmap = DofMap(topo)
    law, eps = scenario.law, scenario.eps
    params = scenario.solver
    bvals0 = {v: scenario.boundary[v](0.0) for v in topo.boundary_vertices}
    hbar = sum(bvals0.values()) / len(bvals0)
    rho_star = law.potential_prime_inverse(hbar)
    guess = DiscreteState.uniform(dofmap, rho_star, 0.0, tau=0.0)
    try:
        state, _ = _dense_newton(guess, guess, 1.0, bvals0, law, eps,
                                 params.newton_tol, params.newton_maxit,
                                 stationary=True)
    except StepFailure as exc:
        raise InitializationError("single-pipe stationary solve failed") from exc

    states = [state]
    for n in range(1, params.n_steps + 1):
        tau = n * params.dt
        bvals = {v: scenario.boundary[v](tau) for v in topo.boundary_vertices}
        guess = DiscreteState(dofmap, states[-1].vector, tau=tau)
        state, _ = _dense_newton(guess, states[-1], params.dt, bvals, law, eps,
                                 params.newton_tol, params.newton_maxit)
        states.append(state)
    return states
