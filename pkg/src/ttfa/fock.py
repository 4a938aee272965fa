"""Twisted Bargmann transform and the geometry of the twisted Fock space.

A point of ``C^{2n}`` is written ``zeta = xi + i eta``; a :class:`FockField`
samples an entire function on a product lattice ``xi_grid x eta_grid`` (both
the same closed symmetric grid).  Entire functions in the Fock space grow
like ``exp(lam coth(lam) |zeta|^2 / 4)``, so fields store the bounded product
``F sqrt(w_lam)`` and only form ``F`` itself on request.

The inner product integrates against ``w_lam`` with measure ``4^n d xi d eta``.
With this normalisation the Bargmann transform is isometric and the
reproducing-kernel constant measures 1 (see :func:`calibrate_d_n`).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, registry
from .grid import BoxGrid, GridError, SampledField, fourier_transform
from .twist import _check_even, as_twist, heat_kernel_field, heat_kernel_log_parts

__all__ = [
    "FockField",
    "log_weight",
    "weight_w_lambda",
    "bargmann_transform",
    "bargmann_points",
    "fock_inner",
    "fock_norm",
    "reproducing_kernel",
    "reproduce",
    "calibrate_d_n",
    "u_lambda_apply",
    "u_lambda_adjoint",
    "fock_rotate",
    "rho_apply",
    "ladder_apply",
    "ladder_identity_residuals",
    "matrix_bargmann_ratio",
    "decay_diagnostic",
]

# exp(LOG_MAX) is comfortably inside float64
LOG_MAX = 700.0
# base-grid fraction inside which the direct quadrature is trusted
VALID_FRACTION = 0.5
# fraction of the Nyquist band the holomorphic integrand may oscillate at
VALID_BAND = 0.35
# shrink factor of the classical hull for fast-path values; near the edge the
# window's own spectral tail aliases at the 1e-6 level
HULL_MARGIN = 0.8


def _split(zeta):
    zeta = np.asarray(zeta, dtype=complex)
    return zeta.real, zeta.imag


def _symp_last(a, b):
    # [a, b] over the last axis, bilinear in complex arguments
    n = a.shape[-1] // 2
    return np.sum(a[..., n:] * b[..., :n] - b[..., n:] * a[..., :n], axis=-1)


def log_weight(lam, zeta):
    """``log w_lam(zeta)`` for ``zeta`` of shape ``(..., 2n)``."""
    zeta = np.asarray(zeta, dtype=complex)
    lam = as_twist(lam, zeta.shape[-1] // 2)
    xi, eta = _split(zeta)
    q = np.sum(xi * xi + eta * eta, axis=-1)
    return math.log(lam.c_lam) - 0.5 * lam.lam_coth * q + lam.lam * _symp_last(xi, eta)


def weight_w_lambda(lam, zeta):
    """Fock weight ``c_lam exp(-lam coth(lam) |zeta|^2 / 2) exp(lam [Re zeta, Im zeta])``."""
    return np.exp(log_weight(lam, zeta))


@dataclass
class FockField:
    """Samples ``F(xi + i eta)`` of an entire function on ``lattice x lattice``.

    Attributes
    ----------
    lam : TwistParameter
    lattice : BoxGrid
        Closed grid of dimension ``2n`` used for both ``xi`` and ``eta``.
    scaled : ndarray
        ``F sqrt(w_lam)``, shape ``lattice.shape * 2``; NaN where flagged.
    valid : ndarray of bool
        False where the value could not be computed reliably.
    generator : SampledField or None
        ``f`` with ``F = U^rot B_lam f``, kept so that shifted evaluations
        re-run the transform instead of interpolating.
    rot : int
        Number of quarter rotations ``zeta -> -i zeta`` applied to ``B f``.
    """

    lam: object
    lattice: BoxGrid
    scaled: np.ndarray
    valid: np.ndarray
    generator: SampledField = None
    rot: int = 0
    meta: dict = field(default_factory=dict)

    def zeta_points(self):
        return zeta_lattice_points(self.lattice)

    @property
    def values(self):
        """``F`` itself; ``inf`` where ``w_lam`` underflows the float range."""
        lw = log_weight(self.lam, self.zeta_points())
        with np.errstate(over="ignore", invalid="ignore"):
            return self.scaled * np.exp(-0.5 * lw)

    @property
    def cell_volume(self):
        return 4.0**self.lam.n * self.lattice.cell_volume**2

    def copy(self):
        return FockField(self.lam, self.lattice, self.scaled.copy(), self.valid.copy(), self.generator, self.rot, dict(self.meta))


def zeta_lattice_points(lattice):
    """Complex points ``xi + i eta``, shape ``lattice.shape * 2 + (2n,)``."""
    d = lattice.dim
    pts = lattice.points().reshape(lattice.shape + (d,))
    xi = pts.reshape(lattice.shape + (1,) * d + (d,))
    eta = pts.reshape((1,) * d + lattice.shape + (d,))
    return xi + 1j * eta


def _default_lattice(grid, lam):
    from .modspace import default_phase_grid

    return default_phase_grid(grid, lam)


# ---------------------------------------------------------------- transform


def bargmann_points(lam, f, zetas, scaled=False):
    """Direct quadrature of ``B_lam f`` at arbitrary complex points.

    ``B f(zeta) = c_lam p_1(zeta)^{-1} int f(x) p_{1/2}(zeta - x) exp(-i lam/2 [zeta, x]) dx``
    with the heat kernels continued holomorphically.  The whole integrand is
    summed in the log domain.

    Parameters
    ----------
    zetas : array_like, shape (m, 2n)
    scaled : bool
        Return ``B f sqrt(w_lam)`` instead of ``B f``.

    Returns
    -------
    values : ndarray, shape (m,)
    valid : ndarray of bool
        False where ``|Re zeta|_inf`` exceeds half the base half-width (the
        shifted Gaussians leave the quadrature box) or where the integrand
        oscillates at ``2 a |Im zeta|_inf`` beyond ``VALID_BAND`` of the
        Nyquist band and the sum would alias.
    """
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    zetas = np.atleast_2d(np.asarray(zetas, dtype=complex))
    if zetas.shape[-1] != 2 * n:
        raise GridError("points have the wrong dimension")
    lp_half, a_half = heat_kernel_log_parts(lam, 0.5)
    lim = VALID_FRACTION * np.asarray(f.grid.half_width)
    ilim = VALID_BAND * np.pi / (2 * a_half * np.asarray(f.grid.spacing))
    valid = np.all((np.abs(zetas.real) <= lim + 1e-12) & (np.abs(zetas.imag) <= ilim + 1e-12), axis=-1)
    lp_one, a_one = heat_kernel_log_parts(lam, 1.0)
    z = zetas[valid]
    const = math.log(lam.c_lam) - (lp_one - a_one * np.sum(z * z, axis=-1)) + math.log(f.grid.cell_volume)
    if scaled:
        const = const + 0.5 * log_weight(lam, z)
    out = np.full(len(zetas), np.nan, dtype=complex)
    if len(z):
        out[valid] = kernels.holo_sum(f.values, f.grid.axes(), z, lp_half, a_half, lam.sigma, const)
    return out, valid


def bargmann_transform(lam, f, lattice=None, mode="fast"):
    """Twisted Bargmann transform of ``f`` on ``lattice x lattice``.

    Parameters
    ----------
    lam : float or TwistParameter
    f : SampledField
        Rapidly decaying samples on a half-open base grid of dimension ``2n``.
    lattice : BoxGrid, optional
        Closed symmetric lattice whose points are base-grid points.
    mode : {"fast", "direct"}
        ``"fast"`` uses ``B f(xi+i eta) sqrt(w) = sqrt(c_lam) <f, Pi(xi,eta) p_{1/2}>``
        with the FFT twisted STFT and flags points near the edge of the
        classical hull; ``"direct"`` sums the holomorphic integrand point by
        point and flags points outside its validity region.

    Returns
    -------
    FockField
    """
    from .modspace import hull_mask, twisted_stft

    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    if lattice is None:
        lattice = _default_lattice(f.grid, lam)
    zeta = zeta_lattice_points(lattice)
    if mode == "fast":
        p = heat_kernel_field(lam, 0.5, f.grid)
        V = twisted_stft(lam, f, p, lattice).values
        xi, eta = _split(zeta)
        scaled = math.sqrt(lam.c_lam) * V * np.exp(-1j * lam.half_lam_coth * np.sum(xi * eta, axis=-1))
        # points near the hull edge carry aliasing of order the STFT there
        valid = (-0.5 * log_weight(lam, zeta) < LOG_MAX) & hull_mask(lam, f.grid, lattice, HULL_MARGIN)
    elif mode == "direct":
        vals, valid = bargmann_points(lam, f, zeta.reshape(-1, 2 * n), scaled=True)
        scaled = vals.reshape(zeta.shape[:-1])
        valid = valid.reshape(zeta.shape[:-1])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return FockField(lam, lattice, scaled, valid, f, 0, {"mode": mode})


def _check_same(F, G):
    if F.lattice != G.lattice or F.lam != G.lam:
        raise GridError("Fock fields live on different lattices")


def fock_inner(F, G):
    """``<F, G> = int F conj(G) w_lam 4^n d xi d eta`` over points valid in both."""
    _check_same(F, G)
    ok = F.valid & G.valid
    s = np.sum(np.where(ok, F.scaled * np.conj(G.scaled), 0))
    return complex(s * F.cell_volume)


def fock_norm(F):
    return math.sqrt(max(fock_inner(F, F).real, 0.0))


# ---------------------------------------------------------------- reproducing kernel


def _log_kernel(lam, zeta, zetap, d_n):
    zb = np.conj(zeta)
    return (
        math.log(d_n * lam.c_lam)
        + 0.5 * lam.lam_coth * np.sum(zb * zetap, axis=-1)
        + 1j * lam.sigma * _symp_last(zb, zetap)
    )


def reproducing_kernel(lam, zeta, zetap, d_n=None):
    """``K_zeta(zeta') = d_n c_lam exp(lam coth(lam) conj(zeta).zeta' / 2) exp(i lam/2 [conj(zeta), zeta'])``.

    ``d_n`` defaults to the registry value.
    """
    zeta = np.asarray(zeta, dtype=complex)
    lam = as_twist(lam, zeta.shape[-1] // 2)
    if d_n is None:
        d_n = registry.get("d_n_measured", lam.n)
    return np.exp(_log_kernel(lam, zeta, np.asarray(zetap, dtype=complex), d_n))


def reproduce(F, zeta, d_n=None):
    """``<F, K_zeta>`` by quadrature over the lattice of ``F``."""
    lam = F.lam
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    if d_n is None:
        d_n = registry.get("d_n_measured", lam.n)
    zp = F.zeta_points()
    ok = F.valid
    zp_ok = zp[ok]
    half_w = 0.5 * log_weight(lam, zp_ok)
    out = np.empty(len(zeta), dtype=complex)
    for i, z in enumerate(zeta):
        # conj K_zeta(zeta') = K_zeta'(zeta); sqrt(w) moves onto the kernel
        lk = _log_kernel(lam, zp_ok, z[None, :], d_n) + half_w
        out[i] = np.sum(F.scaled[ok] * np.exp(lk)) * F.cell_volume
    return out


def calibration_signal(grid):
    X, U = grid.mesh()[:2] if grid.dim == 2 else (None, None)
    if X is None:
        raise NotImplementedError("calibration fixtures exist for n = 1 only")
    v = np.exp(-((X - 0.3) ** 2 + (U + 0.2) ** 2) / 1.5) * (1 + 0.3j * X)
    v = v + 0.6 * np.exp(-((X + 0.5) ** 2 + (U - 0.4) ** 2) / 1.1)
    return SampledField(grid, v)


CALIBRATION_POINTS = np.array(
    [
        [0.3 + 0.2j, -0.5 + 0.4j],
        [0.0 + 0.0j, 0.0 + 0.0j],
        [1.0 - 0.5j, 0.2 + 0.6j],
        [-0.8 + 0.3j, 0.5 - 0.7j],
        [0.4 + 1.1j, -1.0 - 0.2j],
    ]
)


def calibrate_d_n(lam=1.0, grid=None):
    """Measure ``d_n`` from the reproducing property.

    ``B f(zeta) = conj(d_n) <B f, K^1_zeta>`` where ``K^1`` is the kernel with
    ``d_n = 1``.  The direct quadrature gives the left side at a few interior
    points and the fast transform on the default lattice gives the right.

    Returns
    -------
    (d_n, fixture_hash, spread) : the mean estimate, a hash of the fixture
        and the largest relative deviation of the individual estimates.
    """
    lam = as_twist(lam, 1)
    grid = grid or BoxGrid(48, 10.0, dim=2)
    f = calibration_signal(grid)
    F = bargmann_transform(lam, f)
    lhs, _ = bargmann_points(lam, f, CALIBRATION_POINTS)
    rhs = reproduce(F, CALIBRATION_POINTS, d_n=1.0)
    est = (lhs / rhs).real
    d = float(np.mean(est))
    spread = float(np.max(np.abs(est / d - 1)))
    return d, registry.fixture_hash(f.values, CALIBRATION_POINTS), spread


# ---------------------------------------------------------------- U_lam and the rotation U


def _u_matrices(lam, grid, sign):
    # per-axis band-limited DTFT evaluated at the dilated points c x,
    # masked to the Nyquist band |c x| < pi / h
    c = lam.c_half
    mats = []
    for j in range(grid.dim):
        x = grid.axis(j)
        h = grid.spacing[j]
        band = np.abs(c * x) < math.pi / h
        m = math.sqrt(c / (2 * math.pi)) * h * np.exp(sign * 1j * c * np.outer(x, x))
        mats.append(m * band[:, None])
    return mats


def _apply_axes(mats, v):
    for j, m in enumerate(mats):
        v = np.moveaxis(np.tensordot(m, v, axes=([1], [j])), 0, j)
    return v


def _coverage_leak(f, radius):
    # relative energy of f outside |x_j| < radius on every axis
    inside = np.ones(f.grid.shape, dtype=bool)
    for j, ax in enumerate(f.grid.mesh()):
        inside &= np.abs(ax) < radius[j]
    tot = np.sum(np.abs(f.values) ** 2)
    return float(np.sum(np.abs(f.values[~inside]) ** 2) / tot) if tot else 0.0


def u_lambda_apply(lam, f, tol=1e-10, check=True):
    """``U_lam f(x) = c^n fhat(c x)`` with ``c = (lam/2) coth(lam/2)``.

    ``fhat`` is the unitary Fourier transform on ``R^{2n}``, evaluated
    exactly at the dilated points as a band-limited DTFT.

    Raises
    ------
    GridError
        If more than ``tol`` of the spectral energy of ``f`` lies outside
        ``|omega| < c L``, the part the output box can hold.
    """
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    if check:
        F = fourier_transform(f)
        radius = [lam.c_half * L for L in f.grid.half_width]
        leak = _coverage_leak(F, radius)
        if leak > tol:
            raise GridError(f"spectrum leaves the dilated box: relative energy {leak:.2e} beyond |omega| < {radius[0]:.4g}")
    return SampledField(f.grid, _apply_axes(_u_matrices(lam, f.grid, -1), f.values))


def u_lambda_adjoint(lam, f, tol=1e-10, check=True):
    """Inverse of :func:`u_lambda_apply` on band-limited data.

    Raises
    ------
    GridError
        If more than ``tol`` of the energy of ``f`` lies outside
        ``|x| < pi / (c h)``, beyond the band the forward map can produce.
    """
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    if check:
        radius = [math.pi / (lam.c_half * h) for h in f.grid.spacing]
        leak = _coverage_leak(f, radius)
        if leak > tol:
            raise GridError(f"field extends beyond the Nyquist band: relative energy {leak:.2e} beyond |x| < {radius[0]:.4g}")
    return SampledField(f.grid, _apply_axes(_u_matrices(lam, f.grid, +1), f.values))


def fock_rotate(F, k=1):
    """``U F(zeta) = F(-i zeta)``, applied ``k`` times (exact index permutation)."""
    lat = F.lattice
    if not lat.closed or len(set(lat.shape)) != 1 or not np.allclose(lat.half_width, lat.half_width[0]):
        raise GridError("rotation needs a square closed symmetric lattice")
    scaled = _rotate_index_values(F.scaled, lat, k)
    valid = _rotate_index_values(F.valid, lat, k)
    return FockField(F.lam, lat, scaled, valid, F.generator, (F.rot + k) % 4, dict(F.meta))


def _rotate_index_values(a, lattice, k):
    d = lattice.dim
    xi_ax = tuple(range(d))
    eta_ax = tuple(range(d, 2 * d))
    for _ in range(k % 4):
        # new[xi, eta] = old[eta, -xi]
        b = np.moveaxis(a, eta_ax + xi_ax, xi_ax + eta_ax)
        a = np.flip(b, axis=xi_ax)
    return a


def _generator_for(F):
    if F.generator is None:
        raise GridError("need analytic re-evaluation: the field carries no generator")
    f = F.generator
    for _ in range(F.rot % 4):
        f = u_lambda_apply(F.lam, f, check=False)
    return f


def _lattice_shift(lattice, z0):
    # integer lattice offsets of Re z0 and Im z0, or None when off the lattice
    h = np.asarray(lattice.spacing)
    k = np.concatenate([z0.real / h, z0.imag / h])
    r = np.rint(k)
    if np.all(np.abs(k - r) < 1e-9):
        return r.astype(int)
    return None


def rho_apply(lam, zeta0, F, mode="auto"):
    """``rho_lam(zeta0) F(zeta)``, the Fock-space twisted translation.

    ``F(zeta - zeta0)`` is obtained by re-running the transform of the
    generator, never by interpolating ``F``.  With ``mode="fast"`` (the
    ``"auto"`` choice when ``zeta0`` is a lattice vector) the fast transform
    is evaluated on the lattice enlarged by the shift; ``"direct"`` uses the
    holomorphic quadrature at the shifted points and flags those outside
    its validity region.
    """
    lam = as_twist(lam, F.lattice.dim // 2)
    if lam != F.lam:
        raise GridError("twist differs from the field's")
    f = _generator_for(F)
    n = lam.n
    d = 2 * n
    lat = F.lattice
    z0 = np.asarray(zeta0, dtype=complex).reshape(d)
    zeta = F.zeta_points()
    flat = zeta.reshape(-1, d)
    shift = _lattice_shift(lat, z0)
    if mode == "auto":
        mode = "fast" if shift is not None else "direct"
    if mode == "fast":
        if shift is None:
            raise GridError("fast rho needs zeta0 on the lattice")
        m = int(np.abs(shift).max())
        ext = BoxGrid([k + 2 * m for k in lat.shape], [L + m * h for L, h in zip(lat.half_width, lat.spacing)], closed=True)
        E = bargmann_transform(lam, f, ext)
        idx = [np.arange(k) + m - s_ for k, s_ in zip(lat.shape * 2, shift)]
        sel = np.ix_(*idx)
        vals = E.scaled[sel].reshape(-1)
        ok = E.valid[sel].reshape(-1)
    elif mode == "direct":
        vals, ok = bargmann_points(lam, f, flat - z0, scaled=True)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    x0, e0 = z0.real, z0.imag
    # rho factor times sqrt(w(zeta) / w(zeta - zeta0)), all in the exponent
    lf = (
        0.5 * lam.lam_coth * (flat @ np.conj(z0))
        - 1j * lam.sigma * _symp_last(flat, np.conj(z0)[None, :])
        - 0.25 * lam.lam_coth * float(np.sum(np.abs(z0) ** 2))
        + lam.sigma * float(_symp_last(x0, e0))
        + 0.5 * log_weight(lam, flat)
        - 0.5 * log_weight(lam, flat - z0)
    )
    out = np.where(ok, vals * np.exp(np.where(ok, lf, 0)), np.nan)
    valid = ok.reshape(zeta.shape[:-1])
    return FockField(lam, lat, out.reshape(zeta.shape[:-1]), valid, None, 0, {"rho": z0})


# ---------------------------------------------------------------- ladder operators


def _derivative(f, j, method):
    grid = f.grid
    h = grid.spacing[j]
    v = f.values
    if method == "spectral":
        N = grid.shape[j]
        k = 2 * math.pi * np.fft.fftfreq(N, d=h)
        if N % 2 == 0:
            k[N // 2] = 0.0
        shp = [1] * grid.dim
        shp[j] = -1
        return np.fft.ifft(np.fft.fft(v, axis=j) * (1j * k).reshape(shp), axis=j)
    if method == "fd4":
        pad = [(0, 0)] * grid.dim
        pad[j] = (2, 2)
        p = np.pad(v, pad)
        N = grid.shape[j]

        def s(o):
            return np.take(p, np.arange(2 + o, 2 + o + N), axis=j)

        return (-s(2) + 8 * s(1) - 8 * s(-1) + s(-2)) / (12 * h)
    raise ValueError(f"unknown derivative method {method!r}")


def ladder_apply(lam, j, which, f, method="spectral"):
    """Apply a ladder operator along coordinate pair ``j``.

    ``A_j = d/dx_j - a x_j`` and ``B_j = -d/du_j + a u_j`` with
    ``a = (lam/2) coth(lam/2)``; ``P`` and ``Q`` are the combinations
    ``-(a^2+b^2)^{-1} (a A_j - b B_j)`` and ``(a^2+b^2)^{-1} (b A_j + a B_j)``
    with ``b = i lam/2``, which the Bargmann transform turns into
    multiplication by ``z_j`` and ``w_j``.

    Parameters
    ----------
    method : {"spectral", "fd4"}
        FFT derivative or fourth-order central differences.
    """
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    if not 0 <= j < n:
        raise IndexError("ladder index out of range")
    a = lam.c_half
    b = 0.5j * lam.lam
    cs = f.grid.mesh()

    def A(g):
        return _derivative(g, j, method) - a * cs[j] * g.values

    def B(g):
        return -_derivative(g, n + j, method) + a * cs[n + j] * g.values

    s = a * a + b * b
    if which == "A":
        v = A(f)
    elif which == "B":
        v = B(f)
    elif which == "P":
        v = -(a * A(f) - b * B(f)) / s
    elif which == "Q":
        v = (b * A(f) + a * B(f)) / s
    else:
        raise ValueError(f"unknown ladder operator {which!r}")
    return SampledField(f.grid, v)


def ladder_identity_residuals(lam, f, zetas, j=0, method="spectral"):
    """Relative residuals of ``B(P_j f) = z_j B f`` and ``B(Q_j f) = w_j B f``.

    Returns
    -------
    (res_z, res_w) : ndarrays over the points
    """
    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    zetas = np.atleast_2d(np.asarray(zetas, dtype=complex))
    bf, _ = bargmann_points(lam, f, zetas)
    bp, _ = bargmann_points(lam, ladder_apply(lam, j, "P", f, method), zetas)
    bq, _ = bargmann_points(lam, ladder_apply(lam, j, "Q", f, method), zetas)
    ez = zetas[:, j] * bf
    ew = zetas[:, n + j] * bf
    return np.abs(bp - ez) / np.abs(ez), np.abs(bq - ew) / np.abs(ew)


# ---------------------------------------------------------------- diagnostics


def matrix_bargmann_ratio(lam, f, zetas):
    """``<f, Pi(xi,eta) p_{1/2}> / (B f(zeta) sqrt(w(zeta)))`` at the given points.

    The matrix coefficient is taken from the sampled operators, the
    denominator from the direct holomorphic quadrature.
    """
    from .twist import rep_pi_lambda

    n = _check_even(f.grid)
    lam = as_twist(lam, n)
    zetas = np.atleast_2d(np.asarray(zetas, dtype=complex))
    p = heat_kernel_field(lam, 0.5, f.grid)
    num = np.array([f.inner(rep_pi_lambda(lam, z.real, z.imag, p)) for z in zetas])
    den, _ = bargmann_points(lam, f, zetas, scaled=True)
    return num / den


def decay_diagnostic(F, orders=(2, 4)):
    """``sup |F| sqrt(w) (1 + |zeta|)^N`` over valid lattice points, per ``N``."""
    r = np.linalg.norm(np.abs(F.zeta_points()), axis=-1)
    a = np.where(F.valid, np.abs(F.scaled), 0)
    return {int(N): float(np.max(a * (1 + r) ** N)) for N in orders}
