"""Twist constants, group laws and the unitaries tau, e, Pi on sampled fields.

Coordinates on R^{2n} are ordered ``(x_1..x_n, u_1..u_n)``.  The symplectic
form is ``[(x,u),(y,v)] = u.y - v.x`` and extends bilinearly (no conjugation)
to complex vectors.  Sampled fields on R^{2n} live on a :class:`BoxGrid` of
dimension ``2n``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .grid import BoxGrid, GridError, PhaseField, SampledField, fourier_transform, fractional_shift
from . import kernels

__all__ = [
    "TwistError",
    "TwistParameter",
    "symp",
    "symplectic_j",
    "GroupElementGn",
    "GroupElementTwistedH",
    "group_mul_gn",
    "group_inv_gn",
    "group_mul_twisted",
    "build_theta_lambda",
    "lambda_matrix",
    "lambda_matrix_apply",
    "lambda_det_closed",
    "heat_kernel_special_hermite",
    "heat_kernel_field",
    "twisted_translate",
    "twisted_modulate",
    "rep_pi_lambda",
    "schrodinger_rep_2n",
    "twisted_convolve",
    "classical_stft",
    "coords",
]

SERIES_CUTOFF = 1e-4


class TwistError(ValueError):
    """Raised for degenerate or mismatched twist parameters."""


def _x_coth_x(x):
    """``x coth x`` with its removable singularity at 0."""
    if abs(x) < SERIES_CUTOFF:
        x2 = x * x
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0
    return x / math.tanh(x)


def _x_over_sinh(x):
    """``x / sinh x`` with its removable singularity at 0."""
    if abs(x) < SERIES_CUTOFF:
        x2 = x * x
        return 1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0
    return x / math.sinh(x)


class TwistParameter:
    """A real twist ``lam`` together with its derived constants.

    Attributes
    ----------
    c_lam : float
        ``(4 pi)^{-n} (lam / sinh lam)^n``.
    c_half : float
        ``(lam/2) coth(lam/2)``, always ``>= 1``.
    tanh_half : float
        ``tanh(lam/2)``.
    lam_coth : float
        ``lam coth lam`` (equal to 1 at ``lam = 0``).
    sigma : float
        ``lam / 2``, the phase scale in the twisted translation.
    """

    def __init__(self, lam, n=1):
        lam = float(lam)
        if not math.isfinite(lam):
            raise TwistError("lam must be finite")
        n = int(n)
        if n < 1:
            raise TwistError("n must be positive")
        self.lam = lam
        self.n = n
        self.sigma = lam / 2
        self.lam_over_sinh = _x_over_sinh(lam)
        self.c_lam = (4 * math.pi) ** (-n) * self.lam_over_sinh**n
        self.c_half = max(1.0, _x_coth_x(lam / 2))
        self.lam_coth = _x_coth_x(lam)
        self.tanh_half = math.tanh(lam / 2)

    @property
    def coth_lam(self):
        if self.lam == 0:
            return math.inf
        return 1.0 / math.tanh(self.lam)

    @property
    def half_lam_coth(self):
        """``(lam/2) coth lam``, tending to 1/2 at ``lam = 0``."""
        return 0.5 * self.lam_coth

    def __repr__(self):
        return f"TwistParameter(lam={self.lam!r}, n={self.n})"

    def __eq__(self, other):
        return isinstance(other, TwistParameter) and (self.lam, self.n) == (other.lam, other.n)

    def __hash__(self):
        return hash((self.lam, self.n))


def as_twist(lam, n=1):
    return lam if isinstance(lam, TwistParameter) else TwistParameter(lam, n)


def symplectic_j(n):
    """The ``2n x 2n`` matrix ``[[0, I], [-I, 0]]``."""
    eye = np.eye(n)
    z = np.zeros((n, n))
    return np.block([[z, eye], [-eye, z]])


def symp(a, b):
    """``[a, b] = a_u . b_x - b_u . a_x`` over the last axis (length 2n)."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.shape[-1] // 2
    return np.sum(a[..., n:] * b[..., :n], axis=-1) - np.sum(b[..., n:] * a[..., :n], axis=-1)


def _symp_coords(cs, v):
    # [xi, v] for a coordinate list ``cs`` and a fixed vector ``v``
    n = len(cs) // 2
    out = 0
    for j in range(n):
        out = out + cs[n + j] * v[j] - v[n + j] * cs[j]
    return out


def _dot_coords(cs, v):
    out = 0
    for c, a in zip(cs, v):
        out = out + c * a
    return out


def coords(grid):
    """Coordinate arrays of ``grid`` (one per axis, each of ``grid.shape``)."""
    return grid.mesh()


# ---------------------------------------------------------------- group laws


@dataclass(frozen=True)
class GroupElementGn:
    """Element ``(zeta, s)`` of ``C^{2n} x C``."""

    zeta: np.ndarray
    s: complex

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=complex)
        if z.ndim != 1 or z.size % 2 or not np.all(np.isfinite(z)) or not np.isfinite(self.s):
            raise TwistError("GroupElementGn needs a finite vector of even length")
        object.__setattr__(self, "zeta", z)
        object.__setattr__(self, "s", complex(self.s))


def group_mul_gn(g1, g2):
    """Product ``(z + z', s + s' + Re[z, conj z']/2 + i Im(z . conj z')/2)``."""
    if g1.zeta.shape != g2.zeta.shape:
        raise TwistError("dimension mismatch")
    zb = np.conj(g2.zeta)
    c = 0.5 * symp(g1.zeta, zb).real + 0.5j * np.dot(g1.zeta, zb).imag
    return GroupElementGn(g1.zeta + g2.zeta, g1.s + g2.s + c)


def group_inv_gn(g):
    return GroupElementGn(-g.zeta, -g.s)


@dataclass(frozen=True)
class GroupElementTwistedH:
    """Element ``(zeta, t)`` of the twisted Heisenberg group at twist ``lam``."""

    zeta: np.ndarray
    t: float
    lam: TwistParameter

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=complex)
        if z.ndim != 1 or z.size != 2 * self.lam.n or not np.all(np.isfinite(z)):
            raise TwistError("zeta must be a finite vector of length 2n")
        if not math.isfinite(self.t):
            raise TwistError("t must be finite")
        object.__setattr__(self, "zeta", z)
        object.__setattr__(self, "t", float(self.t))


def group_mul_twisted(g1, g2):
    """Twisted Heisenberg product at a common ``lam``."""
    if g1.lam != g2.lam:
        raise TwistError("lam mismatch")
    lam = g1.lam
    zb = np.conj(g2.zeta)
    c = lam.half_lam_coth * np.dot(g1.zeta, zb).imag - lam.sigma * symp(g1.zeta, zb).real
    return GroupElementTwistedH(g1.zeta + g2.zeta, g1.t + g2.t + c, lam)


def build_theta_lambda(lam, n=1):
    """``Theta = lam [[J, -coth(lam) I], [coth(lam) I, J]]`` (size ``4n``)."""
    lam = as_twist(lam, n)
    if lam.lam == 0:
        raise TwistError("degenerate twist")
    J = symplectic_j(lam.n)
    eye = np.eye(2 * lam.n)
    ct = lam.coth_lam
    return lam.lam * np.block([[J, -ct * eye], [ct * eye, J]])


def lambda_matrix(lam, n=1):
    """``Lambda = [[I, tanh(lam/2) J], [(lam/2) J, -(lam/2)coth(lam/2) I]]``."""
    lam = as_twist(lam, n)
    J = symplectic_j(lam.n)
    eye = np.eye(2 * lam.n)
    return np.block([[eye, lam.tanh_half * J], [lam.sigma * J, -lam.c_half * eye]])


def lambda_det_closed(lam, n=1):
    """Closed form ``(lam / sinh lam)^{2n}`` of ``det Lambda``."""
    lam = as_twist(lam, n)
    return lam.lam_over_sinh ** (2 * lam.n)


def lambda_matrix_apply(lam, xi, eta):
    """Return ``(xi', eta') = Lambda (xi, eta)``.

    Explicitly ``xi' = xi + tanh(lam/2) J eta`` and
    ``eta' = (lam/2) J xi - (lam/2)coth(lam/2) eta``; ``xi`` and ``eta``
    may carry leading batch axes.
    """
    lam = as_twist(lam, np.shape(xi)[-1] // 2)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    J = symplectic_j(lam.n)
    xp = xi + lam.tanh_half * eta @ J.T
    ep = lam.sigma * xi @ J.T - lam.c_half * eta
    return xp, ep


# ---------------------------------------------------------------- heat kernel


def heat_kernel_special_hermite(lam, t, z):
    """Special Hermite heat kernel ``p_t^lam`` and its holomorphic extension.

    Parameters
    ----------
    lam : float or TwistParameter
    t : float
        Positive time.
    z : array_like, shape (..., 2n)
        Real or complex points; the quadratic term is ``sum z_j^2`` without
        conjugation.
    """
    z = np.asarray(z)
    n = z.shape[-1] // 2
    lam = as_twist(lam, n)
    if not t > 0:
        raise TwistError("heat kernel needs t > 0")
    tl = t * lam.lam
    pref = (4 * math.pi * t) ** (-n) * _x_over_sinh(tl) ** n
    a = 0.25 * _x_coth_x(tl) / t
    q = np.sum(z * z, axis=-1)
    return pref * np.exp(-a * q)


def heat_kernel_log_parts(lam, t):
    """``(log prefactor, a)`` with ``p_t(z) = exp(log_pref - a sum z^2)``."""
    tl = t * lam.lam
    n = lam.n
    return -n * math.log(4 * math.pi * t) + n * math.log(_x_over_sinh(tl)), 0.25 * _x_coth_x(tl) / t


def heat_kernel_field(lam, t, grid):
    """Sample ``p_t^lam`` on a ``2n``-dimensional grid."""
    lam = as_twist(lam, grid.dim // 2)
    pts = np.stack(grid.mesh(), axis=-1)
    return SampledField(grid, heat_kernel_special_hermite(lam, t, pts))


# ---------------------------------------------------------------- unitaries


def _check_even(grid):
    if grid.dim % 2:
        raise TwistError("fields on R^{2n} need an even grid dimension")
    return grid.dim // 2


def twisted_translate(lam, eta, f):
    """``tau(eta) f(xi) = f(xi - eta) exp(-i lam/2 [xi, eta])``."""
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    eta = np.asarray(eta, dtype=float)
    if not np.any(eta):
        return f.copy()
    g = fractional_shift(f, eta)
    cs = f.grid.mesh()
    return SampledField(f.grid, g.values * np.exp(-1j * lam.sigma * _symp_coords(cs, eta)))


def twisted_modulate(lam, ab, f):
    """``e(a,b) f(x,u) = f(x - tb, u + ta) exp(-i c (x.a + u.b))``.

    Here ``t = tanh(lam/2)`` and ``c = (lam/2) coth(lam/2)``.
    """
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    ab = np.asarray(ab, dtype=float)
    if not np.any(ab):
        return f.copy()
    shift = lam.tanh_half * np.concatenate([ab[n:], -ab[:n]])
    g = fractional_shift(f, shift) if np.any(shift) else f
    cs = f.grid.mesh()
    return SampledField(f.grid, g.values * np.exp(-1j * lam.c_half * _dot_coords(cs, ab)))


def rep_pi_lambda(lam, xi, eta, f):
    """``Pi(xi, eta) = exp(i (lam/2) coth(lam) xi.eta) e(eta) tau(xi)``."""
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    h = twisted_modulate(lam, eta, twisted_translate(lam, xi, f))
    return h * np.exp(1j * lam.half_lam_coth * float(np.dot(xi, eta)))


def schrodinger_rep_2n(x, y, f):
    """``pi(x, y) f(xi) = exp(i (x.xi + x.y/2)) f(xi + y)`` on R^{2n}."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = fractional_shift(f, -y) if np.any(y) else f.copy()
    cs = f.grid.mesh()
    ph = np.exp(1j * (_dot_coords(cs, x) + 0.5 * float(np.dot(x, y))))
    return SampledField(f.grid, g.values * ph)


# ---------------------------------------------------------------- convolution


def _conv_layout(grid):
    for k in grid.shape:
        if k % 2:
            raise TwistError("twisted convolution needs even points per axis")
    if grid.closed:
        raise TwistError("twisted convolution needs a half-open grid")


def twisted_convolve(lam, f, g, mode="fast"):
    """Twisted convolution ``int f(eta) tau(eta) g(xi) d eta`` on the grid.

    Samples outside the box are treated as zero.  ``mode="direct"`` sums the
    defining integral pair by pair; ``mode="fast"`` splits the twist into
    separable phases and evaluates the row convolutions by FFT.
    """
    if f.grid != g.grid:
        raise GridError("grid mismatch")
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    _conv_layout(f.grid)
    if mode == "direct":
        out = kernels.tconv_direct(f.values, g.values, f.grid.axes(), lam.sigma)
    elif mode == "fast":
        if n != 1:
            out = kernels.tconv_direct(f.values, g.values, f.grid.axes(), lam.sigma)
        else:
            out = _tconv_fast_2d(f.values, g.values, f.grid, lam.sigma)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SampledField(f.grid, out * f.grid.cell_volume)


def _next_fast(m):
    import scipy.fft

    return scipy.fft.next_fast_len(int(m))


_PAIR_CACHE = {}


def _row_pairs(nx):
    """Output/input row pairs ``(mx, kx)`` whose f-row ``mx - kx + cx`` is in range."""
    if nx not in _PAIR_CACHE:
        cx = nx // 2
        mx, kx = np.meshgrid(np.arange(nx), np.arange(nx), indexing="ij")
        d = mx - kx + cx
        ok = (d >= 0) & (d < nx)
        mx, kx, d = mx[ok], kx[ok], d[ok]
        starts = np.flatnonzero(np.r_[True, mx[1:] != mx[:-1]])
        _PAIR_CACHE[nx] = (kx, d, starts)
    return _PAIR_CACHE[nx]


def _tconv_fast_2d(f, g, grid, sigma):
    # out[mx,mu] = sum_{kx,ku} f[d, j] g[kx,ku] e^{i s (u_mu x_kx - x_mx u_ku)},
    # d = mx-kx+cx, j = mu-ku+cu.  Writing x_mx = x_kx + delta_d and
    # u_ku = u_mu - lag_j splits the twist into a phase on g (kx, ku), a phase
    # on f (d, j) and an output phase (kx, mu).  Each of the nx f-rows and nx
    # g-rows is transformed once; one inverse FFT runs per valid row pair.
    import scipy.fft as sfft

    nx, nu = grid.shape
    x, u = grid.axes()
    hx, hu = grid.spacing
    cx, cu = nx // 2, nu // 2
    # shortest padding whose wrap-around misses the centered output window
    m = _next_fast(max(cu + nu, 2 * nu - 1 - cu))
    xu = np.outer(x, u)
    gp = np.zeros((nx, m), dtype=complex)
    gp[:, :nu] = g * np.exp(-1j * sigma * xu)
    fg = sfft.fft(gp, axis=-1, overwrite_x=True)
    delta = (np.arange(nx) - cx) * hx
    lag = (np.arange(nu) - cu) * hu
    fp = np.zeros((nx, m), dtype=complex)
    fp[:, :nu] = f * np.exp(1j * sigma * np.outer(delta, lag))
    ff = sfft.fft(fp, axis=-1, overwrite_x=True)
    kx, d, starts = _row_pairs(nx)
    prod = fg[kx]
    prod *= ff[d]
    r = sfft.ifft(prod, axis=-1, overwrite_x=True)[:, cu : cu + nu]
    r = r * np.exp(2j * sigma * xu)[kx]
    out = np.add.reduceat(r, starts, axis=0)
    return out * np.exp(-1j * sigma * xu)


# ---------------------------------------------------------------- classical STFT


def classical_stft(f, g, shift_grid=None):
    """Classical STFT ``V_g f(x, y) = int f(a) conj(g(a - x)) exp(-i y.a) da``.

    Shifts run over ``shift_grid`` (a sub-lattice of ``f.grid`` with the same
    spacing, default ``f.grid``) and are applied as circular index shifts.
    Frequencies run over ``f.grid.dual()``.
    """
    if f.grid != g.grid:
        raise GridError("grid mismatch")
    grid = f.grid
    sg = grid if shift_grid is None else shift_grid
    offs = _sublattice_offsets(grid, sg)
    gconj = np.conj(g.values)
    d = grid.dim
    dual = grid.dual()
    out = np.empty(sg.shape + dual.shape, dtype=complex)
    scale = (2 * math.pi) ** (d / 2)
    for idx in np.ndindex(*sg.shape):
        sh = tuple(int(offs[j][idx[j]]) for j in range(d))
        prod = f.values * np.roll(gconj, sh, axis=tuple(range(d)))
        out[idx] = fourier_transform(SampledField(grid, prod), -1).values * scale
    return PhaseField(sg, dual, out)


def _sublattice_offsets(grid, sub):
    """Integer index offsets (from the origin) of the points of ``sub`` on ``grid``.

    ``sub`` may be coarser than ``grid`` by an integer factor and may extend
    beyond it; only its points must be base-lattice points.
    """
    if sub.dim != grid.dim:
        raise GridError("sub-lattice dimension mismatch")
    offs = []
    for j in range(grid.dim):
        h = grid.spacing[j]
        r = sub.spacing[j] / h
        if abs(r - round(r)) > 1e-9 or round(r) < 1:
            raise GridError("sub-lattice spacing is not a multiple of the base spacing")
        k = sub.axis(j) / h
        ki = np.rint(k)
        if np.max(np.abs(k - ki)) > 1e-9:
            raise GridError("sub-lattice points are not base-grid points")
        offs.append(ki.astype(int))
    return offs
