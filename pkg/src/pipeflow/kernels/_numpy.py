"""Vectorized numpy implementation of the per-edge assembly kernels.

Semantics reference for the numba twins in `_numba.py`; selected at runtime
via the PIPEFLOW_KERNELS environment variable (see package __init__).
"""

import numpy as np

BACKEND = "numpy"


def edge_residual(rho_n, rho_o, m_n, m_o, pp_n, h, area, gamma, dt, eps2,
                  stationary, g, w, res_rho, res_m):
    """Fill the cell and interior momentum residual blocks of one edge.

    Cell block (P0 test functions, scaled by cell measure):
        a*h*(rho_n - rho_o)/dt + (m_R - m_L)
    Momentum block (P1 hat test functions, per-element Gauss rule g/w):
        int [eps2*(w_n - w_o)/dt + gamma*|w_n|*w_n] phi  -  int h_tot phi'
    with w = m/(a rho) and h_tot = eps2*w^2/2 + P'(rho), both per element.
    Boundary / junction enthalpy terms are added by the caller.  The time
    difference term is skipped exactly for eps2 = 0 or stationary solves.
    """
    if stationary:
        res_rho[:] = m_n[1:] - m_n[:-1]
    else:
        res_rho[:] = area * h * (rho_n - rho_o) / dt + (m_n[1:] - m_n[:-1])

    mg = np.outer(m_n[:-1], 1.0 - g) + np.outer(m_n[1:], g)
    wg = mg / (area * rho_n[:, None])
    hg = 0.5 * eps2 * wg * wg + pp_n[:, None]
    integ = gamma * np.abs(wg) * wg
    if eps2 != 0.0 and not stationary:
        mog = np.outer(m_o[:-1], 1.0 - g) + np.outer(m_o[1:], g)
        wog = mog / (area * rho_o[:, None])
        integ = integ + eps2 * (wg - wog) / dt

    left = h * (integ * (1.0 - g)) @ w
    right = h * (integ * g) @ w
    hq = hg @ w
    res_m[:] = 0.0
    res_m[:-1] += left + hq
    res_m[1:] += right - hq


def edge_jacobian(rho_n, m_n, pp2_n, h, area, gamma, dt, eps2,
                  stationary, slope_floor, g, w, data):
    """Fill the per-element momentum Jacobian values of one edge.

    `data` has shape (cells, 6) ordered as
        (row_L, col_mL), (row_L, col_mR), (row_L, col_rho),
        (row_R, col_mL), (row_R, col_mR), (row_R, col_rho).
    `pp2_n` holds P''(rho_n) per cell.  `slope_floor` > 0 lower-bounds the
    friction slope 2|w| (solver-side regularization of the exactly singular
    all-zero-velocity linearization; the residual is never modified).
    The state-independent cell-block entries are precomputed by the caller.
    """
    mg = np.outer(m_n[:-1], 1.0 - g) + np.outer(m_n[1:], g)
    wg = mg / (area * rho_n[:, None])
    dw_dmL = (1.0 - g)[None, :] / (area * rho_n[:, None])
    dw_dmR = g[None, :] / (area * rho_n[:, None])
    dw_drho = -wg / rho_n[:, None]
    dh_dmL = eps2 * wg * dw_dmL
    dh_dmR = eps2 * wg * dw_dmR
    dh_drho = eps2 * wg * dw_drho + pp2_n[:, None]
    slope = 2.0 * np.abs(wg)
    if slope_floor > 0.0:
        slope = np.maximum(slope, slope_floor)
    coef = gamma * slope
    if eps2 != 0.0 and not stationary:
        coef = coef + eps2 / dt

    data[:, 0] = h * (coef * dw_dmL * (1.0 - g)) @ w + dh_dmL @ w
    data[:, 1] = h * (coef * dw_dmR * (1.0 - g)) @ w + dh_dmR @ w
    data[:, 2] = h * (coef * dw_drho * (1.0 - g)) @ w + dh_drho @ w
    data[:, 3] = h * (coef * dw_dmL * g) @ w - dh_dmL @ w
    data[:, 4] = h * (coef * dw_dmR * g) @ w - dh_dmR @ w
    data[:, 5] = h * (coef * dw_drho * g) @ w - dh_drho @ w
