"""Uniform grids, quadrature, Fourier conventions, interpolation and mixed norms.

Every continuous integral over R^d is replaced by a Riemann sum over a box
``[-L, L)^d`` sampled on a uniform lattice.  Field values are stored as
``numpy`` arrays whose shape equals ``grid.shape`` in C order (axis 0 varies
slowest); this is the "axis-major" layout used by the serialization format.
"""

import json
import math
from pathlib import Path

import numpy as np

__all__ = [
    "BoxGrid",
    "SampledField",
    "PhaseField",
    "MixedNormSpec",
    "INF",
    "GridError",
    "quadrature_integral",
    "pairwise_sum",
    "mixed_norm_lpq",
    "fourier_transform",
    "fractional_shift",
    "resample_linear",
    "save_field",
    "load_field",
    "save_phase_field",
    "load_phase_field",
]

INF = math.inf


class GridError(ValueError):
    """Raised for invalid grids, fields or sampling requests."""


class BoxGrid:
    """Uniform lattice on a box in R^d.

    Parameters
    ----------
    points_per_axis : int or sequence of int
        Number of samples ``N_j`` along each axis.
    half_width : float or sequence of float
        Half extent ``L_j``.  Unless ``closed`` is set the axis covers
        ``[-L_j, L_j)`` with point ``k`` at ``-L_j + k * 2L_j / N_j``.
    dim : int, optional
        Broadcasts scalar arguments to ``dim`` axes.
    closed : bool
        Use the symmetric lattice ``{-L, ..., L}`` with ``N`` odd and spacing
        ``2L / (N - 1)``.  Such lattices are closed under ``x -> -x`` and
        contain the origin; phase-space lattices use this form.
    """

    def __init__(self, points_per_axis, half_width, dim=None, closed=False):
        if dim is not None:
            if np.isscalar(points_per_axis):
                points_per_axis = [points_per_axis] * dim
            if np.isscalar(half_width):
                half_width = [half_width] * dim
        n = tuple(int(k) for k in np.atleast_1d(points_per_axis))
        L = tuple(float(x) for x in np.atleast_1d(half_width))
        if len(n) != len(L):
            raise GridError("points_per_axis and half_width differ in length")
        if not n or any(k <= 0 for k in n):
            raise GridError("points_per_axis must be positive")
        if any(not (x > 0 and math.isfinite(x)) for x in L):
            raise GridError("half_width must be positive and finite")
        if closed and any(k % 2 == 0 or k < 3 for k in n):
            raise GridError("closed lattices need an odd point count >= 3")
        self.points_per_axis = n
        self.half_width = L
        self.closed = bool(closed)
        if closed:
            self.spacing = tuple(2 * x / (k - 1) for x, k in zip(L, n))
        else:
            self.spacing = tuple(2 * x / k for x, k in zip(L, n))

    @property
    def dim(self):
        return len(self.points_per_axis)

    @property
    def shape(self):
        return self.points_per_axis

    @property
    def size(self):
        return int(np.prod(self.points_per_axis))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axis(self, j):
        """Coordinates along axis ``j``."""
        k = np.arange(self.points_per_axis[j])
        return -self.half_width[j] + k * self.spacing[j]

    def axes(self):
        return [self.axis(j) for j in range(self.dim)]

    def mesh(self):
        """Coordinate arrays, each of shape ``self.shape``."""
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self):
        """All lattice points as an array of shape ``(size, dim)``."""
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)

    def dual(self):
        """Frequency grid matched to the FFT of this grid."""
        if self.closed:
            raise GridError("closed lattices have no FFT dual")
        return BoxGrid(self.points_per_axis, [math.pi / h for h in self.spacing])

    def is_symmetric(self):
        return self.closed

    def __eq__(self, other):
        return (
            isinstance(other, BoxGrid)
            and self.points_per_axis == other.points_per_axis
            and self.closed == other.closed
            and np.allclose(self.half_width, other.half_width, rtol=1e-14, atol=0)
        )

    def __hash__(self):
        return hash((self.points_per_axis, self.half_width, self.closed))

    def __repr__(self):
        kind = ", closed=True" if self.closed else ""
        return f"BoxGrid({list(self.points_per_axis)}, {list(self.half_width)}{kind})"

    def to_dict(self):
        d = {
            "dim": self.dim,
            "points_per_axis": list(self.points_per_axis),
            "half_width": list(self.half_width),
        }
        if self.closed:
            d["closed"] = True
        return d

    @classmethod
    def from_dict(cls, d):
        g = cls(d["points_per_axis"], d["half_width"], closed=d.get("closed", False))
        if int(d.get("dim", g.dim)) != g.dim:
            raise GridError("manifest dim does not match axis lists")
        return g


class SampledField:
    """Complex samples of a function on a :class:`BoxGrid`."""

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=complex)
        if values.size != grid.size:
            raise GridError(f"expected {grid.size} values, got {values.size}")
        self.grid = grid
        self.values = values.reshape(grid.shape)

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(*coords)`` on ``grid``."""
        return cls(grid, func(*grid.mesh()))

    def copy(self):
        return SampledField(self.grid, self.values.copy())

    def norm(self):
        return math.sqrt(quadrature_integral(np.abs(self.values) ** 2, self.grid).real)

    def inner(self, other):
        """``<self, other> = int self * conj(other)``."""
        _same_grid(self.grid, other.grid)
        return quadrature_integral(self.values * np.conj(other.values), self.grid)

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return SampledField(self.grid, self.values - other.values)

    def __mul__(self, c):
        return SampledField(self.grid, self.values * c)

    __rmul__ = __mul__


class PhaseField:
    """Values ``F(xi, eta)`` on a product lattice ``xi_grid x eta_grid``.

    ``values`` has shape ``xi_grid.shape + eta_grid.shape``.
    """

    def __init__(self, xi_grid, eta_grid, values):
        values = np.asarray(values, dtype=complex)
        if values.size != xi_grid.size * eta_grid.size:
            raise GridError("PhaseField values do not match the product lattice")
        self.xi_grid = xi_grid
        self.eta_grid = eta_grid
        self.values = values.reshape(xi_grid.shape + eta_grid.shape)

    @property
    def cell_volume(self):
        return self.xi_grid.cell_volume * self.eta_grid.cell_volume

    def inner(self, other):
        if self.xi_grid != other.xi_grid or self.eta_grid != other.eta_grid:
            raise GridError("phase lattices differ")
        s = pairwise_sum((self.values * np.conj(other.values)).ravel())
        return s * self.cell_volume

    def copy(self):
        return PhaseField(self.xi_grid, self.eta_grid, self.values.copy())


class MixedNormSpec:
    """Exponent pair ``(p, q)`` with ``math.inf`` as the infinity sentinel."""

    def __init__(self, p, q):
        p = _parse_exponent(p)
        q = _parse_exponent(q)
        self.p = p
        self.q = q

    @classmethod
    def parse(cls, text):
        """Parse ``"p,q"``, accepting ``inf`` for either entry."""
        parts = str(text).split(",")
        if len(parts) != 2:
            raise GridError(f"cannot parse exponent pair {text!r}")
        return cls(parts[0], parts[1])

    def __iter__(self):
        return iter((self.p, self.q))

    def __repr__(self):
        return f"MixedNormSpec({self.p}, {self.q})"

    def __str__(self):
        return f"{_fmt_exp(self.p)},{_fmt_exp(self.q)}"


def _fmt_exp(p):
    return "inf" if p == INF else f"{p:g}"


def _parse_exponent(p):
    if isinstance(p, str):
        p = p.strip().lower()
        p = INF if p in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if not (1.0 <= p <= INF) or math.isnan(p):
        raise GridError(f"exponent {p} outside [1, inf]")
    return p


def _same_grid(a, b):
    if a != b:
        raise GridError(f"grid mismatch: {a!r} vs {b!r}")


def pairwise_sum(x):
    """Deterministic pairwise sum of a 1-D array.

    ``numpy.add.reduce`` on a contiguous 1-D array uses blocked pairwise
    summation, so the order of additions depends only on the length.
    """
    x = np.ascontiguousarray(x).ravel()
    return np.add.reduce(x)


def quadrature_integral(f, grid=None):
    """Riemann-sum approximation of ``int f``.

    Parameters
    ----------
    f : SampledField or ndarray
        Samples; when an array is passed ``grid`` must be given.
    grid : BoxGrid, optional

    Returns
    -------
    complex
    """
    if isinstance(f, SampledField):
        grid, vals = f.grid, f.values
    else:
        vals = np.asarray(f)
        if grid is None:
            raise GridError("grid required for raw arrays")
    if not np.all(np.isfinite(vals)):
        raise GridError("non-finite field")
    return complex(pairwise_sum(vals.astype(complex, copy=False))) * grid.cell_volume


def _lp_over_axes(a, p, cell, naxes):
    """L^p norm of nonnegative ``a`` over its first ``naxes`` axes."""
    if naxes == 0:
        return a
    flat = a.reshape((-1,) + a.shape[naxes:])
    if p == INF:
        return flat.max(axis=0)
    if p == 1:
        return np.add.reduce(flat, axis=0) * cell
    if p == 2:
        return np.sqrt(np.add.reduce(flat * flat, axis=0) * cell)
    return (np.add.reduce(flat**p, axis=0) * cell) ** (1.0 / p)


def mixed_norm_lpq(F, spec):
    """Mixed norm ``(int (int |F|^p dxi)^{q/p} deta)^{1/q}``.

    The inner ``L^p`` runs over ``xi`` and the outer ``L^q`` over ``eta``;
    an infinite exponent takes the grid maximum of ``|F|``.
    """
    if not isinstance(spec, MixedNormSpec):
        spec = MixedNormSpec(*spec)
    a = np.abs(F.values)
    if not np.all(np.isfinite(a)):
        raise GridError("non-finite field")
    inner = _lp_over_axes(a, spec.p, F.xi_grid.cell_volume, F.xi_grid.dim)
    outer = _lp_over_axes(inner, spec.q, F.eta_grid.cell_volume, F.eta_grid.dim)
    return float(outer)


def _axis_ft_factors(n, L, h, sign):
    # continuous FT samples on the dual grid via one FFT plus phase ramps
    k = np.arange(n)
    om = math.pi / h
    dw = 2 * math.pi / (n * h)
    pre = np.exp(-1j * sign * om * k * h)
    post = np.exp(-1j * sign * k * dw * L) * np.exp(1j * sign * om * L)
    return pre, post * h / math.sqrt(2 * math.pi)


def fourier_transform(f, sign=-1):
    """Continuous Fourier transform sampled on the dual grid.

    Uses ``fhat(w) = (2 pi)^{-d/2} int f(x) exp(sign * i x.w) dx``; the default
    ``sign=-1`` is the forward transform and ``sign=+1`` its inverse.  The
    output lives on ``f.grid.dual()``, whose dual is again ``f.grid``.
    """
    if sign not in (-1, 1):
        raise GridError("sign must be +1 or -1")
    grid = f.grid
    v = f.values
    for j in range(grid.dim):
        pre, post = _axis_ft_factors(grid.shape[j], grid.half_width[j], grid.spacing[j], sign)
        shp = [1] * grid.dim
        shp[j] = -1
        v = v * pre.reshape(shp)
        if sign < 0:
            v = np.fft.fft(v, axis=j)
        else:
            v = np.fft.ifft(v, axis=j) * grid.shape[j]
        v = v * post.reshape(shp)
    return SampledField(grid.dual(), v)


def fft_wavenumbers(grid, j):
    """Angular wavenumbers of ``numpy.fft.fft`` along axis ``j``."""
    return 2 * math.pi * np.fft.fftfreq(grid.shape[j], grid.spacing[j])


def shift_ramps(grid, shift):
    """Per-axis Fourier multipliers realizing ``f(x - shift)``.

    For even ``N`` the Nyquist bin is multiplied by ``cos`` so that shifts
    of real data stay real and lattice shifts stay exact.
    """
    out = []
    for j in range(grid.dim):
        k = fft_wavenumbers(grid, j)
        r = np.exp(-1j * k * shift[j])
        if grid.shape[j] % 2 == 0:
            m = grid.shape[j] // 2
            r[m] = math.cos(k[m] * shift[j])
        out.append(r)
    return out


def fractional_shift(f, shift):
    """Band-limited translation ``x -> f(x - shift)`` via an FFT phase ramp."""
    grid = f.grid
    shift = np.broadcast_to(np.asarray(shift, dtype=float), (grid.dim,))
    for j in range(grid.dim):
        if abs(shift[j]) >= grid.half_width[j]:
            raise GridError("shift out of range")
    if not np.any(shift):
        return f.copy()
    v = np.fft.fftn(f.values)
    for j, r in enumerate(shift_ramps(grid, shift)):
        shp = [1] * grid.dim
        shp[j] = -1
        v = v * r.reshape(shp)
    return SampledField(grid, np.fft.ifftn(v))


def resample_linear(F, points):
    """Multilinear interpolation of a :class:`PhaseField`.

    Parameters
    ----------
    F : PhaseField
    points : array_like, shape (m, dim_xi + dim_eta)

    Returns
    -------
    ndarray of complex, shape (m,)
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    axes = F.xi_grid.axes() + F.eta_grid.axes()
    if pts.shape[1] != len(axes):
        raise GridError("point dimension does not match the lattice")
    idx = []
    frac = []
    for j, ax in enumerate(axes):
        h = ax[1] - ax[0]
        t = (pts[:, j] - ax[0]) / h
        i0 = np.floor(t).astype(int)
        # points exactly on the last node use the cell to its left
        on_last = np.isclose(t, len(ax) - 1, rtol=0, atol=1e-12)
        i0 = np.where(on_last, len(ax) - 2, i0)
        bad = (i0 < 0) | (i0 > len(ax) - 2) | ~np.isfinite(t)
        if np.any(bad):
            first = int(np.flatnonzero(bad)[0])
            raise GridError(f"point {first} lies outside the lattice hull (axis {j})")
        idx.append(i0)
        frac.append(t - i0)
    vals = F.values
    out = np.zeros(len(pts), dtype=complex)
    d = len(axes)
    for corner in range(2**d):
        w = np.ones(len(pts))
        ind = []
        for j in range(d):
            bit = (corner >> j) & 1
            w = w * (frac[j] if bit else 1 - frac[j])
            ind.append(idx[j] + bit)
        out += w * vals[tuple(ind)]
    return out


def save_field(field, path):
    """Write ``path`` (JSON manifest) and ``path`` + ``.bin`` (payload)."""
    path = Path(path)
    manifest = field.grid.to_dict()
    manifest.update({"dtype": "c128", "layout": "axis-major", "data": path.name + ".bin"})
    data = np.ascontiguousarray(field.values, dtype="<c16")
    path.write_text(json.dumps(manifest, indent=2))
    data.tofile(str(path) + ".bin")


def load_field(path):
    """Inverse of :func:`save_field`."""
    path = Path(path)
    manifest = json.loads(path.read_text())
    if manifest.get("dtype") != "c128" or manifest.get("layout") != "axis-major":
        raise GridError("unsupported manifest dtype or layout")
    grid = BoxGrid.from_dict(manifest)
    data_path = path.parent / manifest.get("data", path.name + ".bin")
    data = np.fromfile(str(data_path), dtype="<c16")
    if data.size != grid.size:
        raise GridError(f"payload has {data.size} values, manifest expects {grid.size}")
    return SampledField(grid, data.astype(complex))


def save_phase_field(field, path, meta=None):
    """Write a :class:`PhaseField` as a JSON manifest plus a ``.bin`` payload.

    ``meta`` is stored verbatim under ``"meta"`` (for instance the twist
    parameter of a twisted STFT).
    """
    path = Path(path)
    manifest = {
        "kind": "phase",
        "xi_grid": field.xi_grid.to_dict(),
        "eta_grid": field.eta_grid.to_dict(),
        "dtype": "c128",
        "layout": "axis-major",
        "data": path.name + ".bin",
        "meta": meta or {},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    np.ascontiguousarray(field.values, dtype="<c16").tofile(str(path) + ".bin")


def load_phase_field(path):
    """Inverse of :func:`save_phase_field`; returns ``(field, meta)``."""
    path = Path(path)
    manifest = json.loads(path.read_text())
    if manifest.get("kind") != "phase":
        raise GridError("manifest does not describe a phase-space field")
    if manifest.get("dtype") != "c128" or manifest.get("layout") != "axis-major":
        raise GridError("unsupported manifest dtype or layout")
    xg, eg = BoxGrid.from_dict(manifest["xi_grid"]), BoxGrid.from_dict(manifest["eta_grid"])
    data = np.fromfile(str(path.parent / manifest["data"]), dtype="<c16")
    if data.size != xg.size * eg.size:
        raise GridError(f"payload has {data.size} values, manifest expects {xg.size * eg.size}")
    return PhaseField(xg, eg, data.astype(complex)), manifest.get("meta", {})
