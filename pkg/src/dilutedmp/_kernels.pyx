# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: flooding MP iterations and the exhaustive radius scan.

Arithmetic follows ``_pykernels`` step for step (same summation order, same
padding identities) so the two backends agree exactly in max mode.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, tanh, atanh, log1p, exp, INFINITY, isnan

cnp.import_array()

BACKEND_NAME = "cython"


cdef inline double _clip(double v, double c) noexcept nogil:
    # same operation order as np.minimum(np.maximum(v, -c), c)
    if v < -c:
        v = -c
    if v > c:
        v = c
    return v


cdef inline double _lae(double a, double b) noexcept nogil:
    cdef double m = a if a > b else b
    cdef double lo = b if a > b else a
    if lo == -INFINITY:
        return m
    return m + log1p(exp(lo - m))


cdef inline double _comb(double a, double b, int phi_mode) noexcept nogil:
    if phi_mode == 0:
        return a if a > b else b
    return _lae(a, b)


cdef inline double _nan0(double v) noexcept nogil:
    return 0.0 if isnan(v) else v


cdef void _check_side(const int[::1] ptr, const int[::1] var, const unsigned char[::1] syn,
                      double[::1] v2c, double[::1] c2v, int mode, double clip) noexcept nogil:
    cdef Py_ssize_t m = ptr.shape[0] - 1
    cdef Py_ssize_t a, j, k, s, e, idx
    cdef double v, mag, min1, min2, prod, res
    cdef int parity, sg
    cdef double t[64]
    for a in range(m):
        s = ptr[a]
        e = ptr[a + 1]
        if e == s:
            continue
        if mode == 0:
            min1 = INFINITY
            min2 = INFINITY
            idx = -1
            parity = syn[a] & 1
            for j in range(s, e):
                v = v2c[j]
                mag = fabs(v)
                if v < 0:
                    parity ^= 1
                if mag < min1:
                    min2 = min1
                    min1 = mag
                    idx = j
                elif mag < min2:
                    min2 = mag
            if idx == -1:
                idx = s
            for j in range(s, e):
                mag = min2 if j == idx else min1
                sg = parity ^ (1 if v2c[j] < 0 else 0)
                c2v[j] = _clip(-mag if sg else mag, clip)
        else:
            for j in range(s, e):
                t[j - s] = tanh(v2c[j] / 2.0)
            for j in range(s, e):
                prod = 1.0
                for k in range(s, e):
                    if k != j:
                        prod = prod * t[k - s]
                res = 2.0 * atanh(prod)
                if syn[a] & 1:
                    res = -1.0 * res
                c2v[j] = _clip(res, clip)


cdef bint _parity_ok(const int[::1] ptr, const int[::1] var, const unsigned char[::1] syn,
                     const unsigned char[::1] dec) noexcept nogil:
    cdef Py_ssize_t a, j
    cdef unsigned char par
    for a in range(ptr.shape[0] - 1):
        par = 0
        for j in range(ptr[a], ptr[a + 1]):
            par ^= dec[var[j]]
        if par != (syn[a] & 1):
            return False
    return True


def mp_iterate(plan, const unsigned char[::1] syn_z, const unsigned char[::1] syn_x,
               const double[::1] lp, double eps, double clip, int mode, int phi_mode,
               bint decoupled, const double[::1] phi0, int max_iters, bint stop_on_converge,
               double[::1] v2c_z, double[::1] v2c_x, double[::1] c2v_z, double[::1] c2v_x,
               double[::1] h_x, double[::1] h_z, double[::1] mem_x, double[::1] mem_z,
               unsigned char[::1] xdec, unsigned char[::1] zdec):
    """Run up to ``max_iters`` flooding iterations in place; see ``_pykernels.mp_iterate``."""
    cdef const int[::1] z_ptr = plan.z_ptr
    cdef const int[::1] z_var = plan.z_var
    cdef const int[::1] x_ptr = plan.x_ptr
    cdef const int[::1] x_var = plan.x_var
    cdef const int[:, ::1] vz = plan.vz_tab
    cdef const int[:, ::1] vx = plan.vx_tab
    cdef const int[::1] z_other = plan.z_other
    cdef const int[::1] x_other = plan.x_other
    cdef Py_ssize_t nv = plan.nv
    cdef Py_ssize_t nez = z_var.shape[0]
    cdef Py_ssize_t nex = x_var.shape[0]
    cdef Py_ssize_t wz = vz.shape[1]
    cdef Py_ssize_t wx = vx.shape[1]
    cdef double l00 = lp[0], l01 = lp[1], l10 = lp[2], l11 = lp[3]
    cdef double om = 1.0 - eps
    cdef double[::1] phx = np.empty(nv)
    cdef double[::1] phz = np.empty(nv)
    cdef Py_ssize_t i, j, e, o
    cdef double Sz, Sx, px, pz, others
    cdef int t, first = 0, done = max_iters
    cdef bint ok
    with nogil:
        for t in range(1, max_iters + 1):
            _check_side(z_ptr, z_var, syn_z, v2c_z, c2v_z, mode, clip)
            _check_side(x_ptr, x_var, syn_x, v2c_x, c2v_x, mode, clip)
            for i in range(nv):
                Sz = 0.0
                for j in range(wz):
                    e = vz[i, j]
                    if e < nez:
                        Sz = Sz + c2v_z[e]
                    else:
                        Sz = Sz + 0.0
                Sx = 0.0
                for j in range(wx):
                    e = vx[i, j]
                    if e < nex:
                        Sx = Sx + c2v_x[e]
                    else:
                        Sx = Sx + 0.0
                if decoupled:
                    px = phi0[0]
                    pz = phi0[1]
                else:
                    px = _nan0(_comb(l00, l01 - Sx, phi_mode) - _comb(l10, l11 - Sx, phi_mode))
                    pz = _nan0(_comb(l00, l10 - Sz, phi_mode) - _comb(l01, l11 - Sz, phi_mode))
                    px = _clip(px, clip)
                    pz = _clip(pz, clip)
                phx[i] = px
                phz[i] = pz
                h_x[i] = _clip(Sz + px, clip)
                h_z[i] = _clip(Sx + pz, clip)
                xdec[i] = 1 if h_x[i] < 0 else 0
                zdec[i] = 1 if h_z[i] < 0 else 0
            ok = _parity_ok(z_ptr, z_var, syn_z, xdec) and _parity_ok(x_ptr, x_var, syn_x, zdec)
            if ok and first == 0:
                first = t
                if stop_on_converge:
                    done = t
                    break
            for e in range(nez):
                i = z_var[e]
                o = z_other[e]
                others = c2v_z[o] if o < nez else 0.0
                v2c_z[e] = _clip((others + om * phx[i]) + eps * mem_x[i], clip)
            for e in range(nex):
                i = x_var[e]
                o = x_other[e]
                others = c2v_x[o] if o < nex else 0.0
                v2c_x[e] = _clip((others + om * phz[i]) + eps * mem_z[i], clip)
            for i in range(nv):
                mem_x[i] = h_x[i]
                mem_z[i] = h_z[i]
    return done, first


# ---------------------------------------------------------------------------
# Exhaustive error-correcting radius scan

cdef enum:
    MAXW = 6
    MAXDEF = 12
cdef int INFD = 1 << 28


cdef void _match_dp(int k, int* dv, const int[:, ::1] dist, const int[::1] dA, const int[::1] dB,
                    int* f, int* out0, int* out1) noexcept nogil:
    """Min-weight pairing of ``k`` defects with boundary parity tracking."""
    cdef int full = (1 << k) - 1
    cdef int mask, par, cur, i, j, m2, m3, c, vi
    for mask in range(full + 1):
        f[2 * mask] = INFD
        f[2 * mask + 1] = INFD
    f[0] = 0
    for mask in range(full):
        i = 0
        while (mask >> i) & 1:
            i += 1
        vi = dv[i]
        m2 = mask | (1 << i)
        for par in range(2):
            cur = f[2 * mask + par]
            if cur >= INFD:
                continue
            c = cur + dA[vi]
            if c < f[2 * m2 + (par ^ 1)]:
                f[2 * m2 + (par ^ 1)] = c
            c = cur + dB[vi]
            if c < f[2 * m2 + par]:
                f[2 * m2 + par] = c
            for j in range(i + 1, k):
                if (mask >> j) & 1:
                    continue
                m3 = m2 | (1 << j)
                c = cur + dist[vi, dv[j]]
                if c < f[2 * m3 + par]:
                    f[2 * m3 + par] = c
    out0[0] = f[2 * full]
    out1[0] = f[2 * full + 1]


def radius_scan(const int[::1] end0, const int[::1] end1, const unsigned char[::1] in_logical,
                const int[:, ::1] dist, const int[::1] dA, const int[::1] dB,
                int weight, int first_lo, int first_hi, int max_witnesses=4, bint ties_ok=False):
    """Check every error of exactly ``weight`` qubits whose lowest qubit lies in [first_lo, first_hi).

    ``end0``/``end1`` are each qubit's check endpoints on the full lattice
    (``-1`` for a boundary end).  Returns ``(checked, failures, witnesses)``;
    an error fails unless the minimum weight in its own logical class is
    strictly below the minimum in the other class (or equal to it, with
    ``ties_ok``).
    """
    cdef Py_ssize_t n = end0.shape[0]
    cdef Py_ssize_t nvert = dist.shape[0]
    if weight < 1 or weight > MAXW:
        raise ValueError(f"weight must lie in 1..{MAXW}")
    cdef unsigned char[::1] par = np.zeros(nvert, dtype=np.uint8)
    cdef int idx[MAXW]
    cdef int dv[MAXDEF]
    cdef int fbuf[2 << MAXDEF]
    cdef long long checked = 0, failures = 0
    cdef int lvl, k, q, cls, w0, w1, e, t, u
    cdef unsigned char applied[MAXW]
    witnesses = []
    if first_hi > n:
        first_hi = <int>n
    lvl = 0
    idx[0] = first_lo - 1
    applied[0] = 0
    # iterative combination walk with incremental defect parities
    while lvl >= 0:
        if applied[lvl]:
            q = idx[lvl]
            if end0[q] >= 0:
                par[end0[q]] ^= 1
            if end1[q] >= 0:
                par[end1[q]] ^= 1
            applied[lvl] = 0
        idx[lvl] += 1
        q = idx[lvl]
        if (lvl == 0 and q >= first_hi) or q > n - (weight - lvl):
            lvl -= 1
            continue
        if end0[q] >= 0:
            par[end0[q]] ^= 1
        if end1[q] >= 0:
            par[end1[q]] ^= 1
        applied[lvl] = 1
        if lvl + 1 < weight:
            lvl += 1
            idx[lvl] = q
            applied[lvl] = 0
            continue
        # leaf: collect defects among the touched endpoints
        k = 0
        cls = 0
        for t in range(weight):
            u = idx[t]
            cls ^= in_logical[u]
            e = end0[u]
            if e >= 0 and par[e] == 1:
                par[e] = 2
                dv[k] = e
                k += 1
            e = end1[u]
            if e >= 0 and par[e] == 1:
                par[e] = 2
                dv[k] = e
                k += 1
        for t in range(k):
            par[dv[t]] = 1
        _match_dp(k, dv, dist, dA, dB, fbuf, &w0, &w1)
        checked += 1
        if cls == 1:
            w0, w1 = w1, w0
        if w0 >= INFD or w0 > w1 or (w0 == w1 and not ties_ok):
            failures += 1
            if len(witnesses) < max_witnesses:
                witnesses.append(tuple(idx[t] for t in range(weight)))
    return checked, failures, witnesses
