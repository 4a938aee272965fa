"""Pure numpy versions of the direct quadrature kernels.

These mirror the compiled routines in ``_ckernels.pyx`` term for term and
serve as the fallback when the extension is not built.
"""

import numpy as np

__all__ = ["tconv_direct", "holo_sum", "tstft_direct", "pair_fold"]


def tconv_direct(f, g, axes, sigma):
    """Unscaled twisted convolution sum.

    ``out[m] = sum_k f[m - k + c] g[k] exp(i sigma [xi_m, eta_k])`` with
    ``c = N // 2`` per axis; out-of-box indices of ``f`` contribute zero.
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.ndim == 2:
        return _tconv_direct_2d(f, g, axes, sigma)
    return _tconv_direct_nd(f, g, axes, sigma)


def _tconv_direct_2d(f, g, axes, sigma):
    x, u = (np.asarray(a, dtype=float) for a in axes)
    nx, nu = f.shape
    cx, cu = nx // 2, nu // 2
    fp = np.zeros((nx, 3 * nu), dtype=complex)
    fp[:, nu : 2 * nu] = f
    kx = np.arange(nx)
    ku = np.arange(nu)
    out = np.empty((nx, nu), dtype=complex)
    # column index of f for (mu, ku): mu - ku + cu, shifted into the padding
    col = np.arange(nu)[:, None] - ku[None, :] + cu + nu
    for mx in range(nx):
        rows = mx - kx + cx
        ok = (rows >= 0) & (rows < nx)
        kk = kx[ok]
        fr = fp[rows[ok]][:, col]  # (k_x, mu, k_u)
        ph = np.exp(1j * sigma * (u[None, :, None] * x[kk][:, None, None] - x[mx] * u[None, None, :]))
        out[mx] = np.einsum("amb,ab,amb->m", fr, g[kk], ph)
    return out


def _tconv_direct_nd(f, g, axes, sigma):
    shape = f.shape
    d = len(shape)
    n = d // 2
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    idx = np.stack(np.unravel_index(np.arange(f.size), shape), axis=-1)
    c = np.array([k // 2 for k in shape])
    gf = g.ravel()
    out = np.empty(f.size, dtype=complex)
    for m in range(f.size):
        src = idx[m] - idx + c
        ok = np.all((src >= 0) & (src < np.array(shape)), axis=1)
        fv = f[tuple(src[ok].T)]
        xi = pts[m]
        eta = pts[ok]
        sy = eta[:, :n] @ xi[n:] - eta[:, n:] @ xi[:n]
        out[m] = np.sum(fv * gf[ok] * np.exp(1j * sigma * sy))
    return out.reshape(shape)


def holo_sum(f, axes, zetas, log_pref, a, sigma, const):
    """Holomorphic Gaussian sums used by the direct Bargmann transform.

    ``S(zeta) = sum_xi f(xi) exp(log_pref - a sum_j (zeta_j - xi_j)^2
    - i sigma [zeta, xi] + const(zeta))``.
    """
    f = np.asarray(f, dtype=complex)
    zetas = np.asarray(zetas, dtype=complex)
    const = np.asarray(const, dtype=complex)
    d = f.ndim
    n = d // 2
    mesh = np.meshgrid(*[np.asarray(a_, dtype=float) for a_ in axes], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    fv = f.ravel()
    out = np.empty(len(zetas), dtype=complex)
    chunk = max(1, 200000 // max(1, fv.size))
    for s in range(0, len(zetas), chunk):
        z = zetas[s : s + chunk]
        diff = z[:, None, :] - pts[None, :, :]
        q = np.sum(diff * diff, axis=-1)
        sy = z[:, None, n:] * pts[None, :, :n] - pts[None, :, n:] * z[:, None, :n]
        sy = np.sum(sy, axis=-1)
        e = log_pref - a * q - 1j * sigma * sy + const[s : s + chunk, None]
        out[s : s + chunk] = np.exp(e) @ fv
    return out


def _tstft_gather(shape, bshape, axes, offsets, xi_axes, sigma, origin):
    # gather index of a - xi into the window array for every (xi, a) pair and
    # the twist exp(i sigma [a, xi]), zeroed where a - xi is off the window
    d = len(shape)
    n = d // 2
    c = np.array([k // 2 for k in shape] if origin is None else origin)
    mesh = np.meshgrid(*[np.asarray(a, dtype=float) for a in axes], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    idx = np.stack(np.unravel_index(np.arange(int(np.prod(shape))), shape), axis=-1)
    subs = np.stack(np.meshgrid(*offsets, indexing="ij"), axis=-1).reshape(-1, d)
    xis = np.stack(np.meshgrid(*xi_axes, indexing="ij"), axis=-1).reshape(-1, d)
    src = idx[None, :, :] - subs[:, None, :] + c
    ok = np.all((src >= 0) & (src < np.array(bshape)), axis=-1)
    flat = np.where(ok, np.ravel_multi_index(np.where(ok[..., None], src, 0).transpose(2, 0, 1), bshape), 0)
    sy = pts[None, :, n:] * xis[:, None, :n] - xis[:, None, n:] * pts[None, :, :n]
    twist = np.exp(1j * sigma * sy.sum(axis=-1)) * ok
    return pts, flat, twist


def tstft_direct(f, bc, axes, offsets, xi_axes, etas, sigma, kappa, origin=None):
    """Twisted STFT inner products, one lattice point at a time.

    ``out[e, p] = sum_a f(a) bc[e](a - xi_p) exp(i (sigma [a, xi_p] + kappa a.eta_e))``
    where ``xi_p`` runs over the product of ``xi_axes``, sitting at per-axis
    base indices ``offsets`` (output axes ``(e, p_1, ..., p_d)``).  ``bc[e]`` is the
    conjugated window already displaced for ``eta_e``, with its origin at
    index ``origin`` (default: the centre of the base grid).
    """
    f = np.asarray(f, dtype=complex)
    bc = np.asarray(bc)
    pts, flat, twist = _tstft_gather(f.shape, bc.shape[1:], axes, offsets, xi_axes, sigma, origin)
    fv = f.ravel()
    out = np.empty((len(etas),) + tuple(len(o) for o in offsets), dtype=complex)
    for e, eta in enumerate(np.asarray(etas, dtype=float)):
        a = fv * np.exp(1j * kappa * (pts @ eta))
        b = bc[e].ravel()[flat]
        out[e] = np.einsum("pa,a->p", b * twist, a).reshape(out.shape[1:])
    return out


def tstft_synth_direct(F, G, axes, offsets, xi_axes, etas, sigma, kappa, origin=None):
    """Adjoint of :func:`tstft_direct` with un-conjugated windows ``G``.

    ``out(a) = sum_{e, p} F[e, p] G[e](a - xi_p) exp(-i (sigma [a, xi_p] + kappa a.eta_e))``.
    """
    G = np.asarray(G)
    shape = tuple(len(a) for a in axes)
    pts, flat, twist = _tstft_gather(shape, G.shape[1:], axes, offsets, xi_axes, sigma, origin)
    ctw = np.conj(twist)
    out = np.zeros(int(np.prod(shape)), dtype=complex)
    for e, eta in enumerate(np.asarray(etas, dtype=float)):
        b = G[e].ravel()[flat] * ctw
        out += (np.asarray(F[e]).ravel() @ b) * np.exp(-1j * kappa * (pts @ eta))
    return out.reshape(shape)


def pair_fold(fa, fb, first, qx, npair, qu, mq):
    """``sum_t fa[e, k, r + t mq] fb[e, first - qx p + k, r + t mq]`` as ``[e, p, k, r]``."""
    nx = fa.shape[1]
    win = np.lib.stride_tricks.sliding_window_view(fb, nx, axis=1)  # [e, start, r, k]
    V = np.moveaxis(win[:, first::-qx][:, :npair], -1, -2)
    y = np.multiply(fa[:, None, :, :mq], V[..., :mq])
    tmp = np.empty_like(y)
    for t in range(1, qu):
        np.multiply(fa[:, None, :, t * mq:(t + 1) * mq], V[..., t * mq:(t + 1) * mq], out=tmp)
        y += tmp
    return y
