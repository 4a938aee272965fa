"""Twisted STFT, its synthesis operator and twisted modulation-space norms.

The twisted STFT is ``V_g f(xi, eta) = <f, e(eta) tau(xi) g>``.  Writing out
the two unitaries gives, for a fixed ``eta``,

    V_g f(xi, eta) = exp(i s t xi.eta) sum_a A(a) B(a - xi) exp(i s [a, xi])

with ``s = lam/2``, ``t = tanh(lam/2)``, ``A(a) = f(a) exp(i c a.eta)``
(``c = (lam/2) coth(lam/2)``) and ``B = conj(g(. - t J eta))``.  The sum is a
twisted correlation over the ``xi`` sub-lattice.  ``mode="direct"``
evaluates it point by point; ``mode="fast"`` splits the twist into row and
column chirps and does the remaining 1-D correlations by FFT.

Every lattice point is a base-grid point, so ``tau(xi)`` is an index shift.
The window displacement ``t J eta`` is split into a whole number of cells,
also applied as an index shift into a zero-padded window array, and a
sub-cell remainder done by a band-limited shift.  The window is therefore
never wrapped around the box, however large ``eta`` is.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import _pykernels, kernels, registry
from .grid import INF, BoxGrid, GridError, MixedNormSpec, PhaseField, SampledField, fft_wavenumbers, mixed_norm_lpq
from .twist import (
    TwistParameter,
    _check_even,
    _sublattice_offsets,
    as_twist,
    heat_kernel_field,
    lambda_matrix_apply,
    twisted_convolve,
)

__all__ = [
    "TwistedStft",
    "default_phase_grid",
    "twisted_stft",
    "twisted_stft_adjoint",
    "hull_report",
    "hull_mask",
    "m_lambda_norm",
    "window_equivalence_ratio",
    "synthesis_analysis_bound",
    "inclusion_check",
    "twisted_algebra_check",
    "twisted_young_check",
    "young_constant",
    "factorization_residual",
    "young_exponent",
    "calibrate_d_orth",
    "record",
]

SLACK = 1e-3
MARGIN = 0.9
SPREAD = 0.63


@dataclass
class TwistedStft:
    """Twisted STFT values together with the twist and window used."""

    lam: TwistParameter
    window: SampledField
    field: PhaseField

    @property
    def values(self):
        return self.field.values


def default_phase_grid(base, lam=None, half_width=None, stride=2):
    """Closed symmetric phase lattice on every ``stride``-th base point.

    The point count per axis is odd, so the lattice contains the origin and
    is closed under ``(xi, eta) -> (eta, -xi)``.  The twisted STFT of a
    function concentrated in the inner half of the box spreads by a factor
    ``cosh^2(lam/2)``, so the default half-width is
    ``L max(1, SPREAD cosh^2(lam/2))`` with ``L`` the base half-width.
    Going wider than needed costs accuracy at small ``lam``, where far
    lattice points alias in frequency.
    """
    h = base.spacing[0]
    if not np.allclose(base.spacing, h):
        raise GridError("default phase lattice needs equal base spacings")
    if half_width is None:
        c2 = 1.0 if lam is None else math.cosh(as_twist(lam, base.dim // 2).lam / 2) ** 2
        half_width = base.half_width[0] * max(1.0, SPREAD * c2)
    step = stride * h
    m = int(math.floor(half_width / step + 1e-9))
    if m < 1:
        raise GridError("phase lattice half-width is below one stride")
    return BoxGrid(2 * m + 1, m * step, dim=base.dim, closed=True)


# ---------------------------------------------------------------- set-up


def _jvec(eta, n):
    # J eta = (eta_u, -eta_x) row-wise
    return np.concatenate([eta[..., n:], -eta[..., :n]], axis=-1)


def hull_report(lam, base, phase_grid):
    """Where the Lambda-image of the lattice leaves the classical STFT hull.

    The hull is ``|xi'| < L`` (base box) and ``|eta'| < pi / h`` (Nyquist).

    Returns
    -------
    dict
        ``fraction`` of lattice points outside the hull, the maximal
        ``xi_reach`` and ``eta_reach`` per axis, and the base ``half_width``
        and ``spacing`` that would contain the whole image with margin.
    """
    lam = as_twist(lam, base.dim // 2)
    d = base.dim
    xis = phase_grid.points().reshape(-1, d)
    L = np.asarray(base.half_width)
    nyq = np.pi / np.asarray(base.spacing)
    bad = 0
    xr = np.zeros(d)
    er = np.zeros(d)
    for eta in xis:
        xp, ep = lambda_matrix_apply(lam, xis, np.broadcast_to(eta, xis.shape))
        bad += int(np.sum(np.any(np.abs(xp) >= L, axis=1) | np.any(np.abs(ep) >= nyq, axis=1)))
        xr = np.maximum(xr, np.abs(xp).max(axis=0))
        er = np.maximum(er, np.abs(ep).max(axis=0))
    return {
        "fraction": bad / len(xis) ** 2,
        "xi_reach": xr,
        "eta_reach": er,
        "half_width_needed": xr / MARGIN,
        "spacing_needed": MARGIN * np.pi / np.maximum(er, 1e-300),
    }


class _Plan:
    """Shared bookkeeping for the analysis and synthesis maps."""

    def __init__(self, lam, base, phase_grid, strict=False):
        n = _check_even(base)
        self.lam = lam = as_twist(lam, n)
        self.n = n
        self.base = base
        if phase_grid is None:
            phase_grid = default_phase_grid(base, lam)
        if phase_grid.dim != base.dim:
            raise GridError("phase lattice dimension differs from the base grid")
        self.phase = phase_grid
        for k in base.shape:
            if k % 2:
                raise GridError("base grid needs even points per axis")
        if strict:
            self._check_hull()
        offs = _sublattice_offsets(base, phase_grid)
        self.index = [o + k // 2 for o, k in zip(offs, base.shape)]
        self.etas = phase_grid.points().reshape(-1, base.dim)
        # whole-cell and sub-cell parts of the window displacement t J eta
        shifts = lam.tanh_half * _jvec(self.etas, n)
        h = np.asarray(base.spacing)
        self.ishift = np.rint(shifts / h).astype(np.int64)
        self.fshift = shifts - self.ishift * h
        self.pad = np.abs(self.ishift).max(axis=0)
        self.wshape = tuple(int(k + 2 * p) for k, p in zip(base.shape, self.pad))
        self.origin = tuple(int(k // 2 + p) for k, p in zip(base.shape, self.pad))

    def _check_hull(self):
        rep = hull_report(self.lam, self.base, self.phase)
        if rep["fraction"] == 0:
            return
        L = np.asarray(self.base.half_width)
        h = np.asarray(self.base.spacing)
        need_l = rep["half_width_needed"]
        need_h = rep["spacing_needed"]
        j = int(np.argmax(np.maximum(need_l / L, h / need_h)))
        raise GridError(
            f"Lambda-image of the phase lattice leaves the STFT hull on axis {j} "
            f"({rep['fraction']:.1%} of points): needs base half-width >= {need_l[j]:.4g} "
            f"(have {L[j]:.4g}) and spacing <= {need_h[j]:.4g} (have {h[j]:.4g})"
        )

    def window_coords(self):
        """Coordinates of the padded window array, per axis."""
        return [
            ax[0] + (np.arange(w) - p) * h
            for ax, w, p, h in zip(self.base.axes(), self.wshape, self.pad, self.base.spacing)
        ]

    def displaced_windows(self, g, conj=True, rows=None):
        """``g(. - t J eta)`` (conjugated by default) on the padded window array."""
        sel = np.arange(len(self.etas)) if rows is None else np.arange(len(self.etas))[rows]
        grid = self.base
        d = grid.dim
        if getattr(self, "_gkey", None) is not g:
            self._gkey, self._G = g, np.fft.fftn(g.values)
        out = np.zeros((len(sel),) + self.wshape, dtype=complex)
        for lo in range(0, len(sel), 256):
            blk = sel[lo:lo + 256]
            v = np.broadcast_to(self._G, (len(blk),) + grid.shape)
            for j in range(d):
                # batched shift_ramps along axis j
                k = fft_wavenumbers(grid, j)
                sh = self.fshift[blk, j][:, None]
                r = np.exp(-1j * k * sh)
                if grid.shape[j] % 2 == 0:
                    m = grid.shape[j] // 2
                    r[:, m] = np.cos(k[m] * sh[:, 0])
                shp = [len(blk)] + [1] * d
                shp[j + 1] = -1
                v = v * r.reshape(shp)
            v = sfft.ifftn(v, axes=tuple(range(1, d + 1)), overwrite_x=True)
            for e, k in enumerate(blk):
                at = tuple(slice(p + s, p + s + m) for p, s, m in zip(self.pad, self.ishift[k], grid.shape))
                out[(lo + e,) + at] = v[e]
        return np.conj(out) if conj else out


def hull_mask(lam, base, phase_grid, margin=1.0):
    """True where the Lambda-image of ``(xi, eta)`` lies in the classical hull.

    On the base grid the sampled STFT is periodic in ``eta'`` with period
    ``2 pi / h``; outside ``|xi'| < L``, ``|eta'| < pi / h`` it only repeats
    values from inside.  ``margin < 1`` shrinks the hull.  Shape
    ``phase_grid.shape * 2``.
    """
    lam = as_twist(lam, base.dim // 2)
    d = base.dim
    pts = phase_grid.points().reshape(-1, d)
    L = margin * np.asarray(base.half_width)
    nyq = margin * np.pi / np.asarray(base.spacing)
    out = np.empty((len(pts), len(pts)), dtype=bool)  # [xi, eta]
    step = max(1, 2**20 // len(pts))  # bounded working set on large lattices
    for lo in range(0, len(pts), step):
        et = pts[lo:lo + step]
        xp, ep = lambda_matrix_apply(lam, pts[:, None, :], et[None, :, :])
        out[:, lo:lo + step] = np.all(np.abs(xp) < L, axis=-1) & np.all(np.abs(ep) < nyq, axis=-1)
    return out.reshape(phase_grid.shape + phase_grid.shape)


def _wrap(plan, W, mask=True):
    # W[e, xi...] -> PhaseField with xi axes first, including the xi.eta phase
    lam = plan.lam
    d = plan.base.dim
    xis = plan.phase.points().reshape(-1, d)
    ph = np.exp(1j * lam.sigma * lam.tanh_half * (plan.etas @ xis.T))  # [e, xi]
    vals = W.reshape(len(plan.etas), -1) * ph * plan.base.cell_volume
    if mask:
        vals *= hull_mask(lam, plan.base, plan.phase).reshape(len(xis), -1).T
    vals = vals.T.reshape(plan.phase.shape + plan.phase.shape)
    return PhaseField(plan.phase, plan.phase, vals)


# ---------------------------------------------------------------- analysis


def twisted_stft(lam, f, g, phase_grid=None, mode="fast", hull="mask"):
    """Twisted STFT ``V_g f(xi, eta) = <f, e(eta) tau(xi) g>`` on a phase lattice.

    Parameters
    ----------
    lam : float or TwistParameter
    f, g : SampledField
        Signal and window on the same half-open base grid.
    phase_grid : BoxGrid, optional
        Lattice for both ``xi`` and ``eta``; defaults to
        :func:`default_phase_grid`.  Its points must be base-grid points.
    mode : {"fast", "direct"}
    hull : {"mask", "keep", "raise"}
        Treatment of lattice points whose Lambda-image leaves the classical
        hull (see :func:`hull_mask`): set them to zero, keep the periodised
        values, or raise :class:`GridError` with the base grid needed.

    Returns
    -------
    TwistedStft
    """
    if f.grid != g.grid:
        raise GridError("grid mismatch")
    if hull not in ("mask", "keep", "raise"):
        raise ValueError(f"unknown hull treatment {hull!r}")
    plan = _Plan(lam, f.grid, phase_grid, hull == "raise")
    lam = plan.lam
    if mode == "direct" or (mode == "fast" and plan.n > 1):
        bc = plan.displaced_windows(g)
        W = kernels.tstft_direct(
            f.values, bc, f.grid.axes(), plan.index, plan.phase.axes(), plan.etas, lam.sigma, lam.c_half, plan.origin
        )
    elif mode == "fast":
        W = _tstft_fast_2d(plan, f.values, g)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TwistedStft(lam, g, _wrap(plan, W, hull == "mask"))


def _pair_table(rows_out, n_in, c, n_win):
    """Pairs (sub-lattice row p, base row k) with window row ``k - rows_out[p] + c`` in range."""
    P, K = np.meshgrid(np.arange(len(rows_out)), np.arange(n_in), indexing="ij")
    m = K - np.asarray(rows_out)[P] + c
    ok = (m >= 0) & (m < n_win)
    return P[ok], K[ok], m[ok]


_CHUNK = 16


_CHUNK_A = 8


def _tstft_fast_2d(plan, f, g):
    # With b = a - xi, the twist exp(i s (a_u xi_x - xi_u a_x)) factors as
    # exp(i s a_u a_x) exp(-i s b_u b_x) exp(-2i s xi_u a_x) exp(i s xi_u xi_x),
    # so each (xi_x, a_x) row pair needs a plain correlation along u.  The
    # pairs form a strided view of the window spectra, and the lattice
    # stride along u is folded into the spectrum so the inverse FFT only
    # produces the lags that are kept.
    lam = plan.lam
    s, kap = lam.sigma, lam.c_half
    grid = plan.base
    x, u = grid.axes()
    nx, nu = grid.shape
    wx, wu = plan.wshape
    ox, ou = plan.origin
    ix, iu = (np.asarray(i) for i in plan.index)
    xs, us = plan.phase.axes()
    P, L = len(ix), len(iu)
    qx = int(ix[1] - ix[0]) if P > 1 else 1
    qu = int(iu[1] - iu[0]) if L > 1 else 1
    lags = iu - ou
    need = max(wu + int(lags.max()), nu - int(lags.min()), wu, nu)
    Mq = sfft.next_fast_len(-(-need // qu))
    M = qu * Mq
    # window row k - ix[p] + ox, zero rows where it falls off the window
    lo_m = min(0, ox - int(ix.max()))
    hi_m = max(wx, nx + ox - int(ix.min()))
    first = ox - int(ix[0]) - lo_m
    rot = np.exp(2j * np.pi * np.arange(M) * int(lags[0]) / M)
    e_out = np.exp(-2j * s * np.outer(x, us))
    e_fin = np.exp(1j * s * np.outer(xs, us)) * (M / qu)
    base_a = f * np.exp(1j * s * np.outer(x, u))
    bx, bu = plan.window_coords()
    tw_b = np.exp(-1j * s * np.outer(bx, bu))
    etas = plan.etas
    out = np.empty((len(etas), P, L), dtype=complex)
    for lo in range(0, len(etas), _CHUNK_A):
        sl = slice(lo, lo + _CHUNK_A)
        et = etas[sl]
        E = len(et)
        a = np.zeros((E, nx, M), dtype=complex)
        a[:, :, :nu] = base_a * np.exp(1j * kap * (x[None, :, None] * et[:, 0, None, None] + u[None, None, :] * et[:, 1, None, None]))
        fa = sfft.fft(a, axis=-1, overwrite_x=True)
        fa *= rot
        b = np.zeros((E, hi_m - lo_m, M), dtype=complex)
        b[:, -lo_m:wx - lo_m, :wu] = plan.displaced_windows(g, rows=sl) * tw_b
        fb = sfft.ifft(b, axis=-1, overwrite_x=True)
        y = kernels.pair_fold(fa, fb, first, qx, P, qu, Mq)  # [E, p, k, r]
        c = sfft.ifft(y, axis=-1, overwrite_x=True)[..., :L]
        out[sl] = np.einsum("epkl,kl->epl", c, e_out) * e_fin
    return out


# ---------------------------------------------------------------- synthesis


def twisted_stft_adjoint(lam, F, g, mode="fast", hull="mask"):
    """Synthesis ``sum_{xi,eta} F(xi, eta) e(eta) tau(xi) g`` (quadrature-weighted).

    This is the Hilbert-space adjoint of :func:`twisted_stft` on the phase
    lattice of ``F`` with the same ``hull`` treatment.
    """
    if F.xi_grid != F.eta_grid:
        raise GridError("xi and eta lattices must coincide")
    plan = _Plan(lam, g.grid, F.xi_grid)
    lam = plan.lam
    d = g.grid.dim
    xis = plan.phase.points().reshape(-1, d)
    vals = F.values.reshape(plan.phase.size, plan.phase.size)  # [xi, eta]
    if hull == "mask":
        vals = vals * hull_mask(lam, plan.base, plan.phase).reshape(vals.shape)
    ph = np.exp(-1j * lam.sigma * lam.tanh_half * (xis @ plan.etas.T))
    Fp = (vals * ph).T * F.cell_volume  # [eta, xi]
    if mode == "direct" or (mode == "fast" and plan.n > 1):
        G = plan.displaced_windows(g, conj=False)
        out = _pykernels.tstft_synth_direct(
            Fp, G, g.grid.axes(), plan.index, plan.phase.axes(), plan.etas, lam.sigma, lam.c_half, plan.origin
        )
    elif mode == "fast":
        out = _synth_fast_2d(plan, Fp, g)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SampledField(g.grid, out)


def _synth_fast_2d(plan, Fp, g):
    # Transpose of the analysis path: for output row a_x the contributions of
    # all xi_x rows are summed in the frequency domain before one inverse FFT.
    lam = plan.lam
    s, kap = lam.sigma, lam.c_half
    grid = plan.base
    x, u = grid.axes()
    nx, nu = grid.shape
    wx, wu = plan.wshape
    ox, ou = plan.origin
    ix, iu = plan.index
    xs, us = plan.phase.axes()
    jmin, jmax = int(min(iu)), int(max(iu))
    M = sfft.next_fast_len(jmax - jmin + wu)
    pos = np.asarray(iu) - jmin
    read = np.arange(nu) + ou - jmin
    pp, kk, mm = _pair_table(ix, nx, ox, wx)
    total = np.zeros((nx, nu), dtype=complex)
    if not len(pp):
        return total
    order = np.argsort(kk, kind="stable")
    pp, kk, mm = pp[order], kk[order], mm[order]
    starts = np.flatnonzero(np.r_[True, kk[1:] != kk[:-1]])
    krows = kk[starts]
    # F row p modulated by exp(i s xi_u (2 a_x - xi_x)) for each pair
    fmod = np.exp(1j * s * us[None, :] * (2 * x[kk] - xs[pp])[:, None])
    bx, bu = plan.window_coords()
    tw_g = np.exp(1j * s * np.outer(bx, bu))
    out_tw = np.exp(-1j * s * np.outer(x, u))
    X, U = grid.mesh()
    nxi = (len(ix), len(iu))
    etas = plan.etas
    for lo in range(0, len(etas), _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        et = etas[sl]
        E = len(et)
        fr = np.zeros((E, len(pp), M), dtype=complex)
        rows = Fp[sl].reshape((E,) + nxi)
        fr[:, :, pos] = rows[:, pp, :] * fmod
        ff = sfft.fft(fr, axis=-1, overwrite_x=True)
        gb = np.zeros((E, wx, M), dtype=complex)
        gb[:, :, :wu] = plan.displaced_windows(g, conj=False, rows=sl) * tw_g
        fg = sfft.fft(gb, axis=-1, overwrite_x=True)
        ff *= fg[:, mm]
        acc = np.add.reduceat(ff, starts, axis=1)
        r = sfft.ifft(acc, axis=-1, overwrite_x=True)[..., read]
        s_e = np.zeros((E, nx, nu), dtype=complex)
        s_e[:, krows] = r
        s_e *= out_tw
        mod = np.exp(-1j * kap * (X[None] * et[:, 0, None, None] + U[None] * et[:, 1, None, None]))
        total += np.einsum("eij,eij->ij", s_e, mod)
    return total


# ---------------------------------------------------------------- norms and checks


def m_lambda_norm(lam, f, g, spec, phase_grid=None, mode="fast"):
    """Twisted modulation-space norm ``||V_g f||_{p,q}`` on the phase lattice."""
    if not isinstance(spec, MixedNormSpec):
        spec = MixedNormSpec(*spec)
    V = twisted_stft(lam, f, g, phase_grid, mode).field
    return mixed_norm_lpq(V, spec)


def _d_orth(n):
    return registry.get("d_orth_measured", n)


def window_equivalence_ratio(lam, f, g, g2, spec, phase_grid=None):
    """Ratio ``||V_{g2} f|| / ||V_g f||`` and its upper bound.

    The bound is ``c_lam^2 ||V_g g2||_{1,1} / (d ||g||^2)`` where ``d`` is the
    measured orthogonality constant.

    Returns
    -------
    (ratio, bound) : tuple of float
    """
    if not isinstance(spec, MixedNormSpec):
        spec = MixedNormSpec(*spec)
    lam = as_twist(lam, f.grid.dim // 2)
    ng = g.norm()
    if ng == 0 or g2.norm() == 0:
        raise ValueError("zero window")
    num = m_lambda_norm(lam, f, g2, spec, phase_grid)
    den = m_lambda_norm(lam, f, g, spec, phase_grid)
    vgg2 = m_lambda_norm(lam, g2, g, (1, 1), phase_grid)
    bound = lam.c_lam**2 * vgg2 / (_d_orth(lam.n) * ng**2)
    return num / den, bound


def young_exponent(p1, p2):
    """``r`` with ``1/p1 + 1/r = 1 + 1/p2``."""
    inv = 1.0 + (0.0 if p2 == INF else 1.0 / p2) - (0.0 if p1 == INF else 1.0 / p1)
    if not 0 <= inv <= 1 + 1e-15:
        raise ValueError("exponents out of order")
    return INF if inv <= 1e-15 else 1.0 / min(inv, 1.0)


def record(test, lam, spec, lhs, rhs, tol=SLACK, paper_ref=""):
    """Report entry ``{test, lambda, spec, lhs, rhs, ratio, pass}`` for ``lhs <= rhs``."""
    lam_v = lam.lam if isinstance(lam, TwistParameter) else lam
    ratio = lhs / rhs if rhs else (0.0 if lhs == 0 else math.inf)
    return {
        "test": test,
        "lambda": lam_v,
        "spec": str(spec),
        "lhs": float(lhs),
        "rhs": float(rhs),
        "ratio": float(ratio),
        "pass": bool(lhs <= rhs * (1 + tol) + 1e-14),
        "paper_ref": paper_ref,
    }


def inclusion_check(lam, f, g, spec1, spec2, phase_grid=None):
    """Young-type inclusion bound between two mixed norms.

    Checks ``||V_g f||_{p2,q2} <= c_lam^2 / (d <g,g>) ||V_g f||_{p1,q1} ||V_g g||_{r,s}``.
    """
    s1 = spec1 if isinstance(spec1, MixedNormSpec) else MixedNormSpec(*spec1)
    s2 = spec2 if isinstance(spec2, MixedNormSpec) else MixedNormSpec(*spec2)
    if s1.p > s2.p or s1.q > s2.q:
        raise ValueError("inclusion needs p1 <= p2 and q1 <= q2")
    lam = as_twist(lam, f.grid.dim // 2)
    r, s = young_exponent(s1.p, s2.p), young_exponent(s1.q, s2.q)
    V = twisted_stft(lam, f, g, phase_grid).field
    W = twisted_stft(lam, g, g, phase_grid).field
    lhs = mixed_norm_lpq(V, s2)
    rhs = lam.c_lam**2 / (_d_orth(lam.n) * g.norm() ** 2) * mixed_norm_lpq(V, s1) * mixed_norm_lpq(W, MixedNormSpec(r, s))
    return record("inclusion", lam, f"{s1}->{s2}", lhs, rhs, paper_ref="lambda inclusion estimate")


def synthesis_analysis_bound(lam, F, g, h):
    """Pointwise bound ``|V_h(Vtilde_g F)| <= |F| * |V_h g|``.

    The kernel is the modulus of ``<Pi(w) g, Pi(z) h> = <g, Pi(z - w) h>``
    up to a phase, i.e. ``|V_h g(z - w)|`` in the convention
    ``V_g f = <f, e tau g>`` (``|V_g h|`` reflected through the origin).
    ``F`` should vanish outside the inner half of its lattice; both sides are
    compared there so that every difference of lattice points stays on the
    lattice.

    Returns
    -------
    (lhs, rhs) : ndarrays over the inner sub-lattice
    """
    from scipy.signal import fftconvolve

    lam = as_twist(lam, g.grid.dim // 2)
    pg = F.xi_grid
    synth = twisted_stft_adjoint(lam, F, g)
    lhs = np.abs(twisted_stft(lam, synth, h, pg).values)
    vhg = np.abs(twisted_stft(lam, g, h, pg).values)
    conv = fftconvolve(np.abs(F.values), vhg, mode="same") * F.cell_volume
    inner = tuple(slice(k // 4, k - k // 4) for k in F.values.shape)
    return lhs[inner], conv[inner]


def factorization_residual(lam, f, g, h, phase_grid=None, inner_radius=None):
    """Sup-difference in ``<f *_lam g, Pi(xi,eta) h> = f_eta *_lam G_eta(xi)``.

    ``f_eta(x) = f(x) exp(i (lam/2) coth(lam) x.eta)`` and
    ``G_eta(x) = <g, Pi(x, eta) h>``.  The right side is a sum over base-grid
    points ``x``, so the phase lattice must have the base spacing; ``f`` must
    be concentrated within ``phase half-width - inner_radius`` of the origin.
    Both sides are compared for ``|xi| <= inner_radius``.

    Returns
    -------
    (residual, scale) : tuple of float
    """
    lam = as_twist(lam, f.grid.dim // 2)
    grid = f.grid
    d = grid.dim
    if phase_grid is None:
        phase_grid = default_phase_grid(grid, half_width=0.5 * grid.half_width[0], stride=1)
    pg = phase_grid
    if not np.allclose(pg.spacing, grid.spacing):
        raise GridError("factorization check needs a phase lattice with the base spacing")
    if inner_radius is None:
        inner_radius = 0.4 * min(pg.half_width)
    nps = pg.size
    lhs = _pi_coeffs(lam, twisted_convolve(lam, f, g), h, pg).reshape(nps, nps)
    G = _pi_coeffs(lam, g, h, pg).reshape(nps, nps)  # [xi, eta]
    xis = pg.points().reshape(-1, d)
    lat = np.stack(np.unravel_index(np.arange(nps), pg.shape), axis=-1)
    sel = np.flatnonzero(np.all(np.abs(xis) <= inner_radius + 1e-12, axis=1))
    # base points where f lives, in lattice index units
    pts = grid.points().reshape(-1, d)
    fv = f.values.ravel()
    keep = np.abs(fv) > 0
    pts, fv = pts[keep], fv[keep]
    pidx = np.rint(pts / np.asarray(grid.spacing)).astype(np.int64) + np.array(pg.shape) // 2
    diff = lat[sel][:, None, :] - pidx[None, :, :] + np.array(pg.shape) // 2
    ok = np.all((diff >= 0) & (diff < np.array(pg.shape)), axis=-1)
    flat = np.where(ok, np.ravel_multi_index(np.where(ok[..., None], diff, 0).transpose(2, 0, 1), pg.shape), 0)
    n = d // 2
    xs = xis[sel]
    sy = xs[:, None, :n] * pts[None, :, n:] - xs[:, None, n:] * pts[None, :, :n]
    tw = np.exp(1j * lam.sigma * sy.sum(axis=-1)) * ok * grid.cell_volume
    # rows of the lattice seen by the xi - x lookup: f_eta(x) G_eta(xi - x) e^{-i s [x, xi]}
    fe = fv[None, :] * np.exp(1j * lam.half_lam_coth * (xis @ pts.T))  # [eta, x]
    rhs = np.empty((len(sel), nps), dtype=complex)
    for lo in range(0, nps, _CHUNK):
        e = slice(lo, lo + _CHUNK)
        rhs[:, e] = np.einsum("ia,iae,ea->ie", tw, G[flat, e], fe[e])
    res = float(np.abs(rhs - lhs[sel]).max())
    return res, float(np.abs(lhs).max())


def _pi_coeffs(lam, f, h, pg):
    """``<f, Pi(xi, eta) h>`` on the phase lattice via the twisted STFT."""
    V = twisted_stft(lam, f, h, pg).values
    d = f.grid.dim
    pts = pg.points().reshape(-1, d)
    ph = np.exp(-1j * lam.half_lam_coth * (pts @ pts.T))  # conj of the Pi prefactor
    return V * ph.reshape(V.shape)


def twisted_algebra_check(lam, f, g, p, h=None, phase_grid=None, constant="interpolated"):
    """Banach-algebra inequality for twisted convolution in ``M^{p,p}``.

    Reports ``||f *_lam g||_{(p,p)} <= C ||f||_p ||g||_{(p,p)}``, the form the
    factorization identity yields, where ``C`` is the twisted Young constant
    of :func:`young_constant` (``constant="unit"`` takes ``C = 1``).  The
    ratio ``||f *_lam g||_{(p,p)} / (||f||_{(p,p)} ||g||_{(p,p)})`` is
    reported alongside as information.
    """
    if not 1 <= p <= 2:
        raise ValueError("p must lie in [1, 2]")
    lam = as_twist(lam, f.grid.dim // 2)
    if h is None:
        h = heat_kernel_field(lam, 0.5, f.grid)
    spec = MixedNormSpec(p, p)
    C = young_constant(lam, p, constant)
    fg = twisted_convolve(lam, f, g)
    lhs = m_lambda_norm(lam, fg, h, spec, phase_grid)
    ng = m_lambda_norm(lam, g, h, spec, phase_grid)
    rec = record("twisted-algebra", lam, spec, lhs, C * _lp(f, p) * ng, paper_ref="Banach algebra theorem")
    nf = m_lambda_norm(lam, f, h, spec, phase_grid)
    rec["algebra_ratio"] = lhs / (nf * ng) if nf * ng else 0.0
    rec["constant"] = C
    return rec


def _lp(f, p):
    return float((np.sum(np.abs(f.values) ** p) * f.grid.cell_volume) ** (1.0 / p))


def young_constant(lam, p, constant="interpolated"):
    """Constant in ``||f *_lam g||_p <= C ||f||_p ||g||_p`` (see :func:`twisted_young_check`)."""
    if constant == "unit":
        return 1.0
    if constant != "interpolated":
        raise ValueError(f"unknown constant {constant!r}")
    if lam.lam == 0:
        return 1.0 if p == 1 else INF
    return (2 * math.pi / abs(lam.lam)) ** (lam.n * (1 - 1 / p))


def twisted_young_check(lam, f, g, p, constant="unit", tol=1e-9):
    """``||f *_lam g||_p <= C ||f||_p ||g||_p`` for ``1 <= p <= 2``.

    ``constant="unit"`` takes ``C = 1``.  ``constant="interpolated"`` takes
    ``C = (2 pi / |lam|)^{n (1 - 1/p)}``, the Riesz-Thorin interpolant of
    the exact endpoint constants: ``1`` at ``p = 1`` (from
    ``|f *_lam g| <= |f| * |g|``) and ``(2 pi / |lam|)^{n/2}`` at ``p = 2``
    (Weyl-transform Plancherel; two equal Gaussians attain it at ``lam = 2``).
    The unit constant therefore fails for ``p > 1`` once ``|lam| < 2 pi``.
    """
    if not 1 <= p <= 2:
        raise ValueError("p must lie in [1, 2]")
    lam = as_twist(lam, f.grid.dim // 2)
    C = young_constant(lam, p, constant)
    lhs = _lp(twisted_convolve(lam, f, g), p)
    rhs = C * _lp(f, p) * _lp(g, p)
    rec = record(f"twisted-young-{constant}", lam, f"p={p:g}", lhs, rhs, tol=tol, paper_ref="twisted Young inequality")
    rec["constant"] = C
    return rec


# ---------------------------------------------------------------- calibration


def calibration_fixture(grid, lam):
    """Signals and windows used to measure ``d_orth``."""
    X, U = grid.mesh()
    f = SampledField(grid, np.exp(-((X - 0.4) ** 2 + (U + 0.3) ** 2) / 1.6) * (1 + 0.3j * U))
    h = SampledField(grid, np.exp(-((X + 0.2) ** 2 + U**2) / 2.2))
    g = heat_kernel_field(lam, 0.5, grid)
    g2 = SampledField(grid, np.exp(-(X**2 + (U - 0.2) ** 2) / 1.2))
    return f, h, g, g2


def calibrate_d_orth(lam=1.0, grid=None):
    """Measure ``c_lam^2 <V_g f, V_g' h> / (<f,h> <g',g>)``; returns ``(d, hash)``."""
    lam = as_twist(lam, 1)
    grid = grid or BoxGrid(48, 10.0, dim=2)
    f, h, g, g2 = calibration_fixture(grid, lam)
    a = twisted_stft(lam, f, g).field
    b = twisted_stft(lam, h, g2).field
    d = lam.c_lam**2 * a.inner(b) / (f.inner(h) * g2.inner(g))
    return float(d.real), registry.fixture_hash(f.values, h.values, g.values, g2.values)
