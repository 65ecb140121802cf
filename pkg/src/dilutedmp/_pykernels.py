"""Pure numpy implementation of the hot loops.

Mirrors ``_kernels.pyx`` operation for operation: sums run left to right in
the same order and padding slots contribute exact identities (``0.0`` for
sums, ``inf`` for minima, ``1.0`` for products), so max-mode Min-Sum
trajectories match the compiled backend bit for bit.
"""

from __future__ import annotations

import numpy as np

MINSUM, SUMPRODUCT = 0, 1
PHI_MAX, PHI_SUM = 0, 1

BACKEND_NAME = "python"


def _clip(a, clip):
    return np.minimum(np.maximum(a, -clip), clip)


def _lae(a, b):
    m = np.maximum(a, b)
    lo = np.minimum(a, b)
    with np.errstate(invalid="ignore"):
        out = m + np.log1p(np.exp(lo - m))
    out = np.where(lo == -np.inf, m, out)
    return out


def _comb(a, b, phi_mode):
    return np.maximum(a, b) if phi_mode == PHI_MAX else _lae(a, b)


def phi_pair(H, G, lp, phi_mode, clip):
    """Correlation messages (phi_X, phi_Z) given summed incoming X- and Z-check messages.

    ``lp`` holds log psi in the order (00, 01, 10, 11) indexed by (x, z).
    """
    l00, l01, l10, l11 = lp
    with np.errstate(invalid="ignore"):
        px = _comb(l00, l01 - H, phi_mode) - _comb(l10, l11 - H, phi_mode)
        pz = _comb(l00, l10 - G, phi_mode) - _comb(l01, l11 - G, phi_mode)
    px = np.where(np.isnan(px), 0.0, px)
    pz = np.where(np.isnan(pz), 0.0, pz)
    return _clip(px, clip), _clip(pz, clip)


def _side_check_update(tab, v2c, syn, mode, clip, out):
    if tab.shape[0] == 0:
        return
    vals = np.where(tab >= 0, v2c[np.maximum(tab, 0)], 0.0)
    pad = tab < 0
    if mode == MINSUM:
        mag = np.where(pad, np.inf, np.abs(vals))
        neg = (vals < 0) & ~pad
        parity = (np.bitwise_xor.reduce(neg.astype(np.uint8), axis=1) ^ syn) & 1
        idx = np.argmin(mag, axis=1)
        rows = np.arange(tab.shape[0])
        min1 = mag[rows, idx]
        mag2 = mag.copy()
        mag2[rows, idx] = np.inf
        min2 = mag2.min(axis=1)
        for j in range(tab.shape[1]):
            live = ~pad[:, j]
            m = np.where(idx == j, min2, min1)
            s = parity ^ neg[:, j]
            res = _clip(np.where(s == 1, -m, m), clip)
            out[tab[live, j]] = res[live]
    else:
        t = np.where(pad, 1.0, np.tanh(vals / 2.0))
        sgn = np.where(syn == 1, -1.0, 1.0)
        for j in range(tab.shape[1]):
            live = ~pad[:, j]
            prod = np.ones(tab.shape[0])
            for k in range(tab.shape[1]):
                if k != j:
                    prod = prod * t[:, k]
            with np.errstate(divide="ignore"):
                res = _clip(sgn * (2.0 * np.arctanh(prod)), clip)
            out[tab[live, j]] = res[live]


def _sum_pad(c2v, vtab):
    padded = np.append(c2v, 0.0)
    acc = np.zeros(vtab.shape[0])
    for j in range(vtab.shape[1]):
        acc = acc + padded[vtab[:, j]]
    return acc


def _parity_ok(chk_tab, dec, syn):
    if chk_tab.shape[0] == 0:
        return True
    padded = np.append(dec, np.uint8(0))
    par = np.bitwise_xor.reduce(padded[chk_tab], axis=1)
    return bool(np.array_equal(par, syn))


def mp_iterate(plan, syn_z, syn_x, lp, eps, clip, mode, phi_mode, decoupled, phi0,
               max_iters, stop_on_converge, v2c_z, v2c_x, c2v_z, c2v_x, h_x, h_z, mem_x, mem_z, xdec, zdec):
    """Run up to ``max_iters`` flooding iterations in place.

    The variable update damps towards ``mem_*``, the fields of the previous
    iteration; after the update the memory takes the current fields.

    Returns ``(iterations_run, converged_at)`` where ``converged_at`` is the
    first iteration whose hard decision satisfies the syndrome (0 if none).
    """
    om = 1.0 - eps
    nv = plan.nv
    ez_pad = plan.vz_tab
    ex_pad = plan.vx_tab
    first = 0
    for t in range(1, max_iters + 1):
        _side_check_update(plan.z_tab, v2c_z, syn_z[plan.z_rows], mode, clip, c2v_z)
        _side_check_update(plan.x_tab, v2c_x, syn_x[plan.x_rows], mode, clip, c2v_x)
        Sz = _sum_pad(c2v_z, ez_pad)
        Sx = _sum_pad(c2v_x, ex_pad)
        if decoupled:
            phx = np.full(nv, phi0[0])
            phz = np.full(nv, phi0[1])
        else:
            phx, phz = phi_pair(Sx, Sz, lp, phi_mode, clip)
        h_x[:] = _clip(Sz + phx, clip)
        h_z[:] = _clip(Sx + phz, clip)
        xdec[:] = h_x < 0
        zdec[:] = h_z < 0
        ok = _parity_ok(plan.z_chk, xdec, syn_z) and _parity_ok(plan.x_chk, zdec, syn_x)
        if ok and not first:
            first = t
            if stop_on_converge:
                return t, first
        if plan.nez:
            v = plan.z_edge_var
            others = np.append(c2v_z, 0.0)[plan.z_other]
            v2c_z[:] = _clip((others + om * phx[v]) + eps * mem_x[v], clip)
        if plan.nex:
            v = plan.x_edge_var
            others = np.append(c2v_x, 0.0)[plan.x_other]
            v2c_x[:] = _clip((others + om * phz[v]) + eps * mem_z[v], clip)
        mem_x[:] = h_x
        mem_z[:] = h_z
    return max_iters, first


INF_DIST = 1 << 28


def match_dp(defects, dist, dA, dB):
    """Minimum pairing weight per boundary-parity class: returns ``(W0, W1)``.

    Each defect is matched to another defect (shortest path) or to the A or B
    boundary; parity counts the A matches.
    """
    k = len(defects)
    full = (1 << k) - 1
    f = [[INF_DIST, INF_DIST] for _ in range(full + 1)]
    f[0][0] = 0
    for mask in range(full):
        i = 0
        while (mask >> i) & 1:
            i += 1
        vi = defects[i]
        m2 = mask | (1 << i)
        for par in (0, 1):
            cur = f[mask][par]
            if cur >= INF_DIST:
                continue
            f[m2][par ^ 1] = min(f[m2][par ^ 1], cur + int(dA[vi]))
            f[m2][par] = min(f[m2][par], cur + int(dB[vi]))
            for j in range(i + 1, k):
                if (mask >> j) & 1:
                    continue
                m3 = m2 | (1 << j)
                f[m3][par] = min(f[m3][par], cur + int(dist[vi, defects[j]]))
    return f[full][0], f[full][1]


def radius_scan(end0, end1, in_logical, dist, dA, dB, weight, first_lo, first_hi, max_witnesses=4, ties_ok=False):
    """Same contract as the compiled ``radius_scan``."""
    from itertools import combinations

    n = len(end0)
    first_hi = min(first_hi, n)
    checked = failures = 0
    witnesses = []
    for first in range(first_lo, first_hi):
        for rest in combinations(range(first + 1, n), weight - 1):
            combo = (first, *rest)
            par = {}
            cls = 0
            for q in combo:
                cls ^= int(in_logical[q])
                for e in (end0[q], end1[q]):
                    if e >= 0:
                        par[e] = par.get(e, 0) ^ 1
            defects = [v for v, b in par.items() if b]
            w0, w1 = match_dp(defects, dist, dA, dB)
            checked += 1
            own, other = (w0, w1) if cls == 0 else (w1, w0)
            if own >= INF_DIST or own > other or (own == other and not ties_ok):
                failures += 1
                if len(witnesses) < max_witnesses:
                    witnesses.append(combo)
    return checked, failures, witnesses
