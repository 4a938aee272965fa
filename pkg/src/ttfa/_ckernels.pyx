# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled direct quadrature kernels (two-dimensional base grids)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp

cnp.import_array()


def tconv_direct_2d(double complex[:, ::1] f, double complex[:, ::1] g,
                    double[::1] x, double[::1] u, double sigma):
    """Unscaled twisted convolution sum on a 2-D grid (see ``_pykernels``).

    The twist factors as ``exp(i sigma u_m x_k) exp(-i sigma x_m u_k)``, so
    both factors come from tables and the inner loop is a plain product sum.
    """
    cdef Py_ssize_t nx = f.shape[0], nu = f.shape[1]
    cdef Py_ssize_t cx = nx // 2, cu = nu // 2
    cdef Py_ssize_t mx, mu, kx, ku, rx, ru0, lo, hi
    cdef double sr, si, tr, ti, ar, ai, br, bi
    e1_ = np.exp(1j * sigma * np.outer(np.asarray(u), np.asarray(x)))    # [mu, kx]
    e2_ = np.exp(-1j * sigma * np.outer(np.asarray(x), np.asarray(u)))   # [mx, ku]
    cdef double complex[:, ::1] e1 = e1_
    ge_ = np.empty((nx, nu), dtype=np.complex128)
    cdef double complex[:, ::1] ge = ge_
    out = np.empty((nx, nu), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    for mx in range(nx):
        ge_[...] = np.asarray(g) * e2_[mx][None, :]
        with nogil:
            for mu in range(nu):
                sr = 0.0
                si = 0.0
                # ku with 0 <= mu - ku + cu < nu
                lo = mu + cu - nu + 1
                if lo < 0:
                    lo = 0
                hi = mu + cu + 1
                if hi > nu:
                    hi = nu
                for kx in range(nx):
                    rx = mx - kx + cx
                    if rx < 0 or rx >= nx:
                        continue
                    tr = 0.0
                    ti = 0.0
                    ru0 = mu + cu
                    for ku in range(lo, hi):
                        ar = f[rx, ru0 - ku].real
                        ai = f[rx, ru0 - ku].imag
                        br = ge[kx, ku].real
                        bi = ge[kx, ku].imag
                        tr = tr + ar * br - ai * bi
                        ti = ti + ar * bi + ai * br
                    br = e1[mu, kx].real
                    bi = e1[mu, kx].imag
                    sr = sr + tr * br - ti * bi
                    si = si + tr * bi + ti * br
                o[mx, mu] = sr + 1j * si
    return out


def holo_sum_2d(double complex[:, ::1] f, double[::1] x, double[::1] u,
                double complex[:, ::1] zetas, double log_pref, double a,
                double sigma, double complex[::1] const):
    """Holomorphic Gaussian sums for the direct Bargmann transform (n = 1)."""
    cdef Py_ssize_t nx = f.shape[0], nu = f.shape[1], m = zetas.shape[0]
    cdef Py_ssize_t p, i, j
    cdef double complex z, w, dz, dw, e, c
    cdef double er, ei, mag, sr, si, fr, fi, pr, pi_
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for p in range(m):
            z = zetas[p, 0]
            w = zetas[p, 1]
            c = const[p]
            sr = 0.0
            si = 0.0
            for i in range(nx):
                dz = z - x[i]
                for j in range(nu):
                    fr = f[i, j].real
                    fi = f[i, j].imag
                    if fr == 0.0 and fi == 0.0:
                        continue
                    dw = w - u[j]
                    # exponent: log_pref - a (dz^2 + dw^2) - i sigma (w x_i - z u_j) + c
                    e = log_pref - a * (dz * dz + dw * dw) - 1j * sigma * (w * x[i] - z * u[j]) + c
                    er = e.real
                    ei = e.imag
                    mag = exp(er)
                    pr = mag * cos(ei)
                    pi_ = mag * sin(ei)
                    sr = sr + fr * pr - fi * pi_
                    si = si + fr * pi_ + fi * pr
            o[p] = sr + 1j * si
    return out


def tstft_direct_2d(double complex[:, ::1] f, double complex[:, :, ::1] bc,
                    double[::1] x, double[::1] u, cnp.int64_t[::1] ix, cnp.int64_t[::1] iu,
                    double[::1] xs, double[::1] us, double[:, ::1] etas, double sigma, double kappa,
                    Py_ssize_t ox, Py_ssize_t ou):
    """Twisted STFT inner products, one lattice point at a time.

    ``out[e, p, q] = sum_a f(a) bc[e](a - xi) exp(i (sigma [a, xi] + kappa a.eta_e))``
    with ``xi = (xs[p], us[q])`` sitting at base indices ``(ix[p], iu[q])``
    (possibly outside the box); ``bc[e]`` is the conjugated window already
    displaced for ``eta_e``, stored with its origin at index ``(ox, ou)``.
    The phase splits into per-axis factors taken from tables.
    """
    cdef Py_ssize_t ne = bc.shape[0], nx = f.shape[0], nu = f.shape[1]
    cdef Py_ssize_t nbx = bc.shape[1], nbu = bc.shape[2]
    cdef Py_ssize_t npx = ix.shape[0], npu = iu.shape[0]
    cdef Py_ssize_t e, p, q, kx, ku, mx, px, pu, lo, hi
    cdef double sr, si, tr, ti, ar, ai, br, bi
    xa, ua = np.asarray(x), np.asarray(u)
    ex_ = np.exp(-1j * sigma * np.outer(np.asarray(us), xa))   # [q, kx]
    eu_ = np.exp(1j * sigma * np.outer(np.asarray(xs), ua))    # [p, ku]
    cdef double complex[:, ::1] exq = ex_
    fa = np.asarray(f)
    G_ = np.empty((nx, nu), dtype=np.complex128)
    cdef double complex[:, ::1] G = G_
    out = np.empty((ne, npx, npu), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    for e in range(ne):
        fe = fa * np.exp(1j * kappa * etas[e, 0] * xa)[:, None] * np.exp(1j * kappa * etas[e, 1] * ua)[None, :]
        for p in range(npx):
            np.multiply(fe, eu_[p][None, :], out=G_)
            px = ix[p]
            with nogil:
                for q in range(npu):
                    pu = iu[q]
                    # ku with 0 <= ku - pu + ou < nbu
                    lo = pu - ou
                    if lo < 0:
                        lo = 0
                    hi = pu - ou + nbu
                    if hi > nu:
                        hi = nu
                    sr = 0.0
                    si = 0.0
                    for kx in range(nx):
                        mx = kx - px + ox
                        if mx < 0 or mx >= nbx:
                            continue
                        tr = 0.0
                        ti = 0.0
                        for ku in range(lo, hi):
                            ar = G[kx, ku].real
                            ai = G[kx, ku].imag
                            br = bc[e, mx, ku - pu + ou].real
                            bi = bc[e, mx, ku - pu + ou].imag
                            tr = tr + ar * br - ai * bi
                            ti = ti + ar * bi + ai * br
                        br = exq[q, kx].real
                        bi = exq[q, kx].imag
                        sr = sr + tr * br - ti * bi
                        si = si + tr * bi + ti * br
                    o[e, p, q] = sr + 1j * si
    return out


def pair_fold(double complex[:, :, ::1] fa, double complex[:, :, ::1] fb,
              Py_ssize_t first, Py_ssize_t qx, Py_ssize_t npair, Py_ssize_t qu, Py_ssize_t mq):
    """Row-pair spectra folded to length ``mq``.

    ``out[e, p, k, r] = sum_t fa[e, k, r + t mq] fb[e, first - qx p + k, r + t mq]``
    for ``t < qu``.
    """
    cdef Py_ssize_t ne = fa.shape[0], nx = fa.shape[1]
    cdef Py_ssize_t e, p, k, r, t, m, c
    cdef double complex acc
    out = np.empty((ne, npair, nx, mq), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] o = out
    with nogil:
        for e in range(ne):
            for p in range(npair):
                for k in range(nx):
                    m = first - qx * p + k
                    for r in range(mq):
                        acc = 0
                        c = r
                        for t in range(qu):
                            acc = acc + fa[e, k, c] * fb[e, m, c]
                            c = c + mq
                        o[e, p, k, r] = acc
    return out
