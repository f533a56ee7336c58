"""Numba-compiled twins of the numpy assembly kernels (see _numpy.py)."""

import numba

BACKEND = "numba"


@numba.njit(cache=True)
def edge_residual(rho_n, rho_o, m_n, m_o, pp_n, h, area, gamma, dt, eps2,
                  stationary, g, w, res_rho, res_m):
    cells = rho_n.shape[0]
    npts = g.shape[0]
    transient = (not stationary) and eps2 != 0.0
    for i in range(cells):
        if stationary:
            res_rho[i] = m_n[i + 1] - m_n[i]
        else:
            res_rho[i] = area * h * (rho_n[i] - rho_o[i]) / dt + (m_n[i + 1] - m_n[i])
    for j in range(cells + 1):
        res_m[j] = 0.0
    for i in range(cells):
        acc_l = 0.0
        acc_r = 0.0
        for k in range(npts):
            gk = g[k]
            mg = m_n[i] * (1.0 - gk) + m_n[i + 1] * gk
            wg = mg / (area * rho_n[i])
            hg = 0.5 * eps2 * wg * wg + pp_n[i]
            integ = gamma * abs(wg) * wg
            if transient:
                mog = m_o[i] * (1.0 - gk) + m_o[i + 1] * gk
                wog = mog / (area * rho_o[i])
                integ += eps2 * (wg - wog) / dt
            acc_l += w[k] * (h * integ * (1.0 - gk) + hg)
            acc_r += w[k] * (h * integ * gk - hg)
        res_m[i] += acc_l
        res_m[i + 1] += acc_r


@numba.njit(cache=True)
def edge_jacobian(rho_n, m_n, pp2_n, h, area, gamma, dt, eps2,
                  stationary, slope_floor, g, w, data):
    cells = rho_n.shape[0]
    npts = g.shape[0]
    transient = (not stationary) and eps2 != 0.0
    for i in range(cells):
        for c in range(6):
            data[i, c] = 0.0
        for k in range(npts):
            gk = g[k]
            wk = w[k]
            mg = m_n[i] * (1.0 - gk) + m_n[i + 1] * gk
            wg = mg / (area * rho_n[i])
            dw_dml = (1.0 - gk) / (area * rho_n[i])
            dw_dmr = gk / (area * rho_n[i])
            dw_drho = -wg / rho_n[i]
            dh_dml = eps2 * wg * dw_dml
            dh_dmr = eps2 * wg * dw_dmr
            dh_drho = eps2 * wg * dw_drho + pp2_n[i]
            slope = 2.0 * abs(wg)
            if slope_floor > 0.0 and slope < slope_floor:
                slope = slope_floor
            coef = gamma * slope
            if transient:
                coef += eps2 / dt
            data[i, 0] += wk * (h * coef * dw_dml * (1.0 - gk) + dh_dml)
            data[i, 1] += wk * (h * coef * dw_dmr * (1.0 - gk) + dh_dmr)
            data[i, 2] += wk * (h * coef * dw_drho * (1.0 - gk) + dh_drho)
            data[i, 3] += wk * (h * coef * dw_dml * gk - dh_dml)
            data[i, 4] += wk * (h * coef * dw_dmr * gk - dh_dmr)
            data[i, 5] += wk * (h * coef * dw_drho * gk - dh_drho)
