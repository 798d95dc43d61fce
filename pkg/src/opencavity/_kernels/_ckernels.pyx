# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_fallback``.

Same signatures and results; complex arithmetic is written out in real and
imaginary parts so the loops vectorize.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def _phasor_table(k, n, w):
    """``exp(i k n_j w_j)`` for each distinct optical thickness, plus the map j -> column."""
    nn = np.asarray(n, dtype=np.float64)
    opt = nn[: nn.shape[0] - 1] * np.asarray(w, dtype=np.float64)
    uniq, col = np.unique(opt, return_inverse=True)
    ph = np.outer(np.asarray(k, dtype=np.float64).reshape(-1), uniq)
    return (np.ascontiguousarray(np.cos(ph)), np.ascontiguousarray(np.sin(ph)),
            np.ascontiguousarray(col, dtype=np.intp))


def recursion(k, n, w):
    cdef double[::1] nv = np.ascontiguousarray(n, dtype=np.float64)
    cr_, ci_, col_ = _phasor_table(k, n, w)
    cdef double[:, ::1] cr = cr_
    cdef double[:, ::1] ci = ci_
    cdef Py_ssize_t[::1] col = col_
    cdef Py_ssize_t K = cr.shape[0], R = nv.shape[0], i, j
    out = np.empty((K, R), dtype=np.complex128)
    cdef double[:, ::1] beta = out.view(np.float64)
    cdef double br, bi, xr, xi, rho, p, q
    with nogil:
        for i in range(K):
            br = 1.0
            bi = 0.0
            beta[i, 0] = br
            beta[i, 1] = bi
            for j in range(1, R):
                xr = br * cr[i, col[j - 1]] - bi * ci[i, col[j - 1]]
                xi = br * ci[i, col[j - 1]] + bi * cr[i, col[j - 1]]
                rho = nv[j - 1] / nv[j]
                p = 0.5 * (1.0 + rho)
                q = 0.5 * (rho - 1.0)
                # p*x + q*conj(x)
                br = (p + q) * xr
                bi = (p - q) * xi
                beta[i, 2 * j] = br
                beta[i, 2 * j + 1] = bi
    return out


def outgoing(k, n, w):
    cdef double[::1] nv = np.ascontiguousarray(n, dtype=np.float64)
    cr_, ci_, col_ = _phasor_table(k, n, w)
    cdef double[:, ::1] cr = cr_
    cdef double[:, ::1] ci = ci_
    cdef Py_ssize_t[::1] col = col_
    cdef Py_ssize_t K = cr.shape[0], R = nv.shape[0], i, j
    out = np.empty(K, dtype=np.complex128)
    cdef double[::1] res = out.view(np.float64)
    cdef double[::1] sr = np.empty(R)
    cdef double[::1] sd = np.empty(R)
    cdef double br, bi, xr, xi, rho
    for j in range(1, R):
        rho = nv[j - 1] / nv[j]
        sr[j] = rho          # p + q
        sd[j] = 1.0          # p - q
    with nogil:
        for i in range(K):
            br = 1.0
            bi = 0.0
            for j in range(1, R):
                xr = br * cr[i, col[j - 1]] - bi * ci[i, col[j - 1]]
                xi = br * ci[i, col[j - 1]] + bi * cr[i, col[j - 1]]
                br = sr[j] * xr
                bi = sd[j] * xi
            res[2 * i] = br
            res[2 * i + 1] = bi
    return out


cdef inline void _stage(Py_ssize_t M, const double* dv, const double* er, const double* ei,
                        const double* wer, const double* wei, const double* br, const double* bi,
                        const double* xr_in, const double* xi_in, double* tr, double* ti,
                        double* ar, double* ai, double ctr, double cti,
                        double fac, double hstep, int first, int last,
                        double* nsr_out, double* nsi_out) noexcept nogil:
    """One RK4 stage: slope at (t, c_t), accumulate it, form the next stage point."""
    cdef Py_ssize_t k
    cdef double kbr, kbi, xr, xi, nsr = 0.0, nsi = 0.0
    for k in range(M):
        # db/dt = -i d t - conj(eta) c
        kbr = dv[k] * xi_in[k] - (er[k] * ctr + ei[k] * cti)
        kbi = -dv[k] * xr_in[k] - (er[k] * cti - ei[k] * ctr)
        if first:
            ar[k] = kbr
            ai[k] = kbi
        else:
            ar[k] += fac * kbr
            ai[k] += fac * kbi
        if not last:
            xr = br[k] + hstep * kbr
            xi = bi[k] + hstep * kbi
            tr[k] = xr
            ti[k] = xi
            nsr += wer[k] * xr - wei[k] * xi
            nsi += wer[k] * xi + wei[k] * xr
    nsr_out[0] = nsr
    nsi_out[0] = nsi


def rk4_continuum(c0, b0, eta, weights, detuning, double dt, long n_steps, long stride):
    eta_c = np.ascontiguousarray(eta, dtype=np.complex128)
    w_np = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] wv = w_np
    cdef double[::1] dv = np.ascontiguousarray(detuning, dtype=np.float64)
    cdef double[::1] er = np.ascontiguousarray(eta_c.real)
    cdef double[::1] ei = np.ascontiguousarray(eta_c.imag)
    cdef double[::1] wer = np.ascontiguousarray(w_np * eta_c.real)
    cdef double[::1] wei = np.ascontiguousarray(w_np * eta_c.imag)
    cdef Py_ssize_t M = dv.shape[0], k
    b_in = np.asarray(b0, dtype=np.complex128)
    cdef double[::1] br = np.ascontiguousarray(b_in.real)
    cdef double[::1] bi = np.ascontiguousarray(b_in.imag)
    # running RK sum and stage point
    cdef double[::1] ar = np.empty(M)
    cdef double[::1] ai = np.empty(M)
    cdef double[::1] tr = np.empty(M)
    cdef double[::1] ti = np.empty(M)
    cdef long n_samples = n_steps // stride + 1 + (1 if n_steps % stride else 0)
    cs_arr = np.empty(n_samples, dtype=np.complex128)
    ss_arr = np.empty(n_samples, dtype=np.complex128)
    ns_arr = np.empty(n_samples, dtype=np.float64)
    cdef double[::1] cs = cs_arr.view(np.float64)
    cdef double[::1] ss = ss_arr.view(np.float64)
    cdef double[::1] ns = ns_arr
    cdef double cr = complex(c0).real, ci = complex(c0).imag
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    cdef double sr, si, s2r, s2i, s3r, s3i, s4r, s4i, dum_r, dum_i, nrm
    cdef long step, i = 0
    if M == 0:
        raise ValueError("empty frequency grid")
    cdef double* pd = &dv[0]
    cdef double* per = &er[0]
    cdef double* pei = &ei[0]
    cdef double* pwr = &wer[0]
    cdef double* pwi = &wei[0]
    cdef double* pbr = &br[0]
    cdef double* pbi = &bi[0]
    cdef double* par = &ar[0]
    cdef double* pai = &ai[0]
    cdef double* ptr = &tr[0]
    cdef double* pti = &ti[0]
    with nogil:
        sr = 0.0
        si = 0.0
        nrm = cr * cr + ci * ci
        for k in range(M):
            sr += wer[k] * br[k] - wei[k] * bi[k]
            si += wer[k] * bi[k] + wei[k] * br[k]
            nrm += wv[k] * (br[k] * br[k] + bi[k] * bi[k])
        cs[0] = cr
        cs[1] = ci
        ss[0] = sr
        ss[1] = si
        ns[0] = nrm
        i = 1
        for step in range(1, n_steps + 1):
            # (sr, si) = sum w eta b is the stage-1 slope of c
            _stage(M, pd, per, pei, pwr, pwi, pbr, pbi, pbr, pbi, ptr, pti, par, pai, cr, ci,
                   1.0, h2, 1, 0, &s2r, &s2i)
            _stage(M, pd, per, pei, pwr, pwi, pbr, pbi, ptr, pti, ptr, pti, par, pai,
                   cr + h2 * sr, ci + h2 * si, 2.0, h2, 0, 0, &s3r, &s3i)
            _stage(M, pd, per, pei, pwr, pwi, pbr, pbi, ptr, pti, ptr, pti, par, pai,
                   cr + h2 * s2r, ci + h2 * s2i, 2.0, dt, 0, 0, &s4r, &s4i)
            _stage(M, pd, per, pei, pwr, pwi, pbr, pbi, ptr, pti, ptr, pti, par, pai,
                   cr + dt * s3r, ci + dt * s3i, 1.0, 0.0, 0, 1, &dum_r, &dum_i)
            cr += h6 * (sr + 2.0 * s2r + 2.0 * s3r + s4r)
            ci += h6 * (si + 2.0 * s2i + 2.0 * s3i + s4i)
            sr = 0.0
            si = 0.0
            for k in range(M):
                pbr[k] += h6 * par[k]
                pbi[k] += h6 * pai[k]
                sr += pwr[k] * pbr[k] - pwi[k] * pbi[k]
                si += pwr[k] * pbi[k] + pwi[k] * pbr[k]
            if step % stride == 0 or step == n_steps:
                nrm = cr * cr + ci * ci
                for k in range(M):
                    nrm += wv[k] * (br[k] * br[k] + bi[k] * bi[k])
                cs[2 * i] = cr
                cs[2 * i + 1] = ci
                ss[2 * i] = sr
                ss[2 * i + 1] = si
                ns[i] = nrm
                i += 1
    b_out = np.asarray(br) + 1j * np.asarray(bi)
    return cs_arr, ss_arr, ns_arr, b_out
