"""Backend selection for the hot kernels.

The compiled extension ``ttfa._ckernels`` is used when it imports and the
grid is two-dimensional; otherwise the numpy fallback in ``_pykernels`` runs.
Set ``TTFA_BACKEND=python`` to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

__all__ = ["tconv_direct", "holo_sum", "tstft_direct", "pair_fold", "backend", "use_backend", "compiled_available"]

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_active = "python"
if _ckernels is not None and os.environ.get("TTFA_BACKEND", "").lower() != "python":
    _active = "compiled"


def compiled_available():
    return _ckernels is not None


def backend():
    """Name of the active backend, ``"compiled"`` or ``"python"``."""
    return _active


def use_backend(name):
    """Switch backends; returns the previous name."""
    global _active
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and _ckernels is None:
        raise RuntimeError("compiled kernels are not built")
    prev, _active = _active, name
    return prev


def tconv_direct(f, g, axes, sigma):
    f = np.ascontiguousarray(f, dtype=complex)
    g = np.ascontiguousarray(g, dtype=complex)
    if _active == "compiled" and f.ndim == 2:
        x, u = (np.ascontiguousarray(a, dtype=float) for a in axes)
        return _ckernels.tconv_direct_2d(f, g, x, u, float(sigma))
    return _pykernels.tconv_direct(f, g, axes, sigma)


def holo_sum(f, axes, zetas, log_pref, a, sigma, const):
    f = np.ascontiguousarray(f, dtype=complex)
    zetas = np.ascontiguousarray(np.atleast_2d(zetas), dtype=complex)
    const = np.array(np.broadcast_to(const, (len(zetas),)), dtype=complex)
    if _active == "compiled" and f.ndim == 2:
        x, u = (np.ascontiguousarray(a_, dtype=float) for a_ in axes)
        return _ckernels.holo_sum_2d(f, x, u, zetas, float(log_pref), float(a), float(sigma), const)
    return _pykernels.holo_sum(f, axes, zetas, log_pref, a, sigma, const)


def tstft_direct(f, bc, axes, offsets, xi_axes, etas, sigma, kappa, origin=None):
    f = np.ascontiguousarray(f, dtype=complex)
    if origin is None:
        origin = [k // 2 for k in f.shape]
    bc = np.ascontiguousarray(bc, dtype=complex)
    etas = np.ascontiguousarray(etas, dtype=float)
    if _active == "compiled" and f.ndim == 2:
        x, u = (np.ascontiguousarray(a, dtype=float) for a in axes)
        ix, iu = (np.ascontiguousarray(o, dtype=np.int64) for o in offsets)
        xs, us = (np.ascontiguousarray(a, dtype=float) for a in xi_axes)
        return _ckernels.tstft_direct_2d(f, bc, x, u, ix, iu, xs, us, etas, float(sigma), float(kappa),
                                         int(origin[0]), int(origin[1]))
    return _pykernels.tstft_direct(f, bc, axes, offsets, xi_axes, etas, sigma, kappa, origin)


def pair_fold(fa, fb, first, qx, npair, qu, mq):
    """Folded products of input-row and window-row spectra for the fast STFT."""
    fa = np.ascontiguousarray(fa, dtype=complex)
    fb = np.ascontiguousarray(fb, dtype=complex)
    if _active == "compiled":
        return _ckernels.pair_fold(fa, fb, int(first), int(qx), int(npair), int(qu), int(mq))
    return _pykernels.pair_fold(fa, fb, first, qx, npair, qu, mq)
