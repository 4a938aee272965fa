"""Heisenberg-group machinery built slice by slice over the central frequency.

A function ``f(xi, t)`` on ``H^n = R^{2n} x R`` is sampled on a product of a
half-open base grid and a half-open ``t`` grid with a power-of-two point
count.  Its central transform ``f^lam(xi) = int f(xi, t) exp(i lam t) dt`` is
taken on the DFT-dual lattice ``lam_k = pi k / T``, which makes the
transform exactly invertible and turns every ``lam``-integral into a Riemann
sum with spacing ``pi / T``.

Operators on ``H^n`` (the lifted representation, the rotation, the central
multiplier, the transform ``V`` and its adjoint) act on each slice with the
corresponding ``R^{2n}`` operator and recompose.  Slices whose energy is
below ``SLICE_TOL`` of the largest slice carry nothing measurable and are
skipped by the phase-space transforms.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fock, registry
from .grid import BoxGrid, GridError, MixedNormSpec, PhaseField, SampledField, mixed_norm_lpq
from .modspace import default_phase_grid, record, twisted_stft, twisted_stft_adjoint, young_exponent
from .twist import TwistParameter, as_twist, heat_kernel_field, rep_pi_lambda, symp

__all__ = [
    "HeisenbergField",
    "LambdaStack",
    "VStack",
    "HeisenbergGroupElement",
    "default_t_grid",
    "lambda_grid",
    "central_inverse_ft",
    "central_ft",
    "heisenberg_group_mul",
    "heisenberg_group_inv",
    "big_pi_apply",
    "heisenberg_translate",
    "heisenberg_modulate",
    "u_tilde_apply",
    "u_tilde_adjoint",
    "t_multiplier_apply",
    "v_transform",
    "v_adjoint",
    "k_lambda_kernel",
    "k_lambda_mass",
    "k_lambda_mixed_norm",
    "m_pq_heisenberg_norm",
    "m1_norm",
    "dual_bracket",
    "heisenberg_inclusion_check",
    "heat_kernel_sublaplacian",
    "bargmann_heisenberg",
    "bargmann_identity_ratio",
    "matrix_coefficient_growth",
    "save_stack",
    "load_stack",
    "save_vstack",
    "load_vstack",
]

SLICE_TOL = 1e-12


# ---------------------------------------------------------------- containers


def default_t_grid():
    return BoxGrid(64, 16.0)


def _check_t_grid(t_grid):
    if t_grid.dim != 1 or t_grid.closed:
        raise GridError("the t grid must be a half-open 1-D grid")
    N = t_grid.shape[0]
    if N < 2 or N & (N - 1):
        raise GridError(f"N_t = {N} is not a power of two")


def lambda_grid(t_grid):
    """Central frequencies ``lam_k = pi k / T`` for ``k = -N/2 .. N/2 - 1``."""
    _check_t_grid(t_grid)
    N = t_grid.shape[0]
    return math.pi * np.arange(-N // 2, N // 2) / t_grid.half_width[0]


class HeisenbergField:
    """Samples ``f(xi, t)`` with values of shape ``base_grid.shape + (N_t,)``."""

    def __init__(self, base_grid, t_grid, values):
        _check_t_grid(t_grid)
        values = np.asarray(values, dtype=complex)
        shape = tuple(base_grid.shape) + tuple(t_grid.shape)
        if values.size != int(np.prod(shape)):
            raise GridError(f"expected values of shape {shape}")
        values = values.reshape(shape)
        if not np.all(np.isfinite(values)):
            raise GridError("non-finite field")
        self.base_grid = base_grid
        self.t_grid = t_grid
        self.values = values

    @classmethod
    def from_function(cls, base_grid, t_grid, func):
        """Sample ``func(*xi_coords, t)`` on the product grid."""
        axes = base_grid.axes() + [t_grid.axis(0)]
        return cls(base_grid, t_grid, func(*np.meshgrid(*axes, indexing="ij")))

    @property
    def cell_volume(self):
        return self.base_grid.cell_volume * self.t_grid.cell_volume

    def norm(self):
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.cell_volume)

    def inner(self, other):
        self._same(other)
        return complex(np.sum(self.values * np.conj(other.values)) * self.cell_volume)

    def _same(self, other):
        if self.base_grid != other.base_grid or self.t_grid != other.t_grid:
            raise GridError("Heisenberg fields live on different grids")

    def copy(self):
        return HeisenbergField(self.base_grid, self.t_grid, self.values.copy())

    def __sub__(self, other):
        self._same(other)
        return HeisenbergField(self.base_grid, self.t_grid, self.values - other.values)

    def __add__(self, other):
        self._same(other)
        return HeisenbergField(self.base_grid, self.t_grid, self.values + other.values)

    def __mul__(self, c):
        return HeisenbergField(self.base_grid, self.t_grid, self.values * c)

    __rmul__ = __mul__


@dataclass
class LambdaStack:
    """Central slices ``f^{lam_k}``; ``slices`` has shape ``(N_t,) + base.shape``."""

    base_grid: BoxGrid
    t_grid: BoxGrid
    slices: np.ndarray

    @property
    def lams(self):
        return lambda_grid(self.t_grid)

    @property
    def dlam(self):
        return math.pi / self.t_grid.half_width[0]

    def slice(self, k):
        return SampledField(self.base_grid, self.slices[k])

    def energies(self):
        """``||f^lam_k||_2^2`` per slice."""
        return np.sum(np.abs(self.slices.reshape(len(self.slices), -1)) ** 2, axis=1) * self.base_grid.cell_volume

    def active(self, tol=SLICE_TOL):
        e = self.energies()
        top = e.max()
        return e > tol * top if top > 0 else np.zeros(len(e), dtype=bool)

    def copy(self):
        return LambdaStack(self.base_grid, self.t_grid, self.slices.copy())


def central_inverse_ft(f):
    """``f^lam(xi) = int f(xi, t) exp(i lam t) dt`` on the dual lattice (no ``(2 pi)^{-1/2}``).

    With ``t_j = -T + j dt`` one has ``lam_k t_j = -pi k + 2 pi k j / N``,
    so the sum is an inverse FFT times ``N dt (-1)^k``.
    """
    N = f.t_grid.shape[0]
    dt = f.t_grid.spacing[0]
    s = np.fft.fftshift(np.fft.ifft(f.values, axis=-1), axes=-1) * (N * dt)
    k = np.arange(-N // 2, N // 2)
    s = s * np.where(k % 2, -1.0, 1.0)
    return LambdaStack(f.base_grid, f.t_grid, np.moveaxis(s, -1, 0).copy())


def central_ft(stack):
    """Inverse of :func:`central_inverse_ft`: ``f(t) = (2 pi)^{-1} int exp(-i lam t) f^lam dlam``."""
    N = stack.t_grid.shape[0]
    k = np.arange(-N // 2, N // 2)
    s = np.moveaxis(stack.slices, 0, -1) * np.where(k % 2, -1.0, 1.0)
    v = np.fft.fft(np.fft.ifftshift(s, axes=-1), axis=-1) * (stack.dlam / (2 * math.pi))
    return HeisenbergField(stack.base_grid, stack.t_grid, v)


def _map_slices(f, op, ks=None):
    # apply op(k, lam_k, SampledField) -> ndarray to each slice and recompose
    st = central_inverse_ft(f)
    out = np.zeros_like(st.slices)
    lams = st.lams
    for k in range(len(lams)) if ks is None else ks:
        out[k] = op(k, lams[k], st.slice(k))
    return central_ft(LambdaStack(f.base_grid, f.t_grid, out))


# ---------------------------------------------------------------- group


@dataclass
class HeisenbergGroupElement:
    xi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        self.t = float(self.t)
        if not (np.all(np.isfinite(self.xi)) and math.isfinite(self.t)):
            raise ValueError("group element must be finite")


def heisenberg_group_mul(g1, g2):
    """``(xi, t)(eta, s) = (xi + eta, t + s + [xi, eta] / 2)``."""
    return HeisenbergGroupElement(g1.xi + g2.xi, g1.t + g2.t + 0.5 * float(symp(g1.xi, g2.xi)))


def heisenberg_group_inv(g):
    return HeisenbergGroupElement(-g.xi, -g.t)


# ---------------------------------------------------------------- lifted operators


def big_pi_apply(zeta, s, f):
    """``Pi(zeta, s) f``: each slice gets ``exp(i lam s) Pi_lam(Re zeta, Im zeta)``.

    For real ``zeta = xi`` this is the left translation
    ``f((xi, s)^{-1} h)``.
    """
    zeta = np.asarray(zeta, dtype=complex)
    s = float(s)
    n = f.base_grid.dim // 2

    def op(k, lam, g):
        return np.exp(1j * lam * s) * rep_pi_lambda(TwistParameter(lam, n), zeta.real, zeta.imag, g).values

    return _map_slices(f, op)


def heisenberg_translate(g, f):
    """Left translation ``tau(g) f = Pi(xi, s) f`` for ``g = (xi, s)``."""
    return big_pi_apply(g.xi, g.t, f)


def heisenberg_modulate(eta, s, f):
    """``e(eta, s) f = Pi(i eta, s) f``."""
    return big_pi_apply(1j * np.asarray(eta, dtype=float), s, f)


def u_tilde_apply(f, tol=1e-10, slice_tol=SLICE_TOL):
    """``U~ f``: ``U_lam`` on every slice; coverage is checked on the non-negligible ones."""
    st = central_inverse_ft(f)
    act = st.active(slice_tol)
    n = f.base_grid.dim // 2

    def op(k, lam, g):
        return fock.u_lambda_apply(TwistParameter(lam, n), g, tol=tol, check=bool(act[k])).values

    return _map_slices(f, op)


def u_tilde_adjoint(f, tol=1e-10, slice_tol=SLICE_TOL):
    st = central_inverse_ft(f)
    act = st.active(slice_tol)
    n = f.base_grid.dim // 2

    def op(k, lam, g):
        return fock.u_lambda_adjoint(TwistParameter(lam, n), g, tol=tol, check=bool(act[k])).values

    return _map_slices(f, op)


def t_multiplier_apply(f):
    """Central multiplier with symbol ``sqrt(c_lam)``."""
    n = f.base_grid.dim // 2
    return _map_slices(f, lambda k, lam, g: math.sqrt(TwistParameter(lam, n).c_lam) * g.values)


# ---------------------------------------------------------------- V and its adjoint


@dataclass
class VStack:
    """Slices ``V_lam f = B_lam f^lam sqrt(w_lam)`` on a common phase lattice.

    ``values`` and ``valid`` have shape ``(N_t,) + lattice.shape * 2``;
    invalid points and skipped slices hold zeros.
    """

    base_grid: BoxGrid
    t_grid: BoxGrid
    lattice: BoxGrid
    values: np.ndarray
    valid: np.ndarray
    active: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def lams(self):
        return lambda_grid(self.t_grid)

    @property
    def dlam(self):
        return math.pi / self.t_grid.half_width[0]

    @property
    def cell_volume(self):
        return self.lattice.cell_volume**2

    def slice(self, k):
        return PhaseField(self.lattice, self.lattice, self.values[k])

    def fock(self, k):
        n = self.base_grid.dim // 2
        return fock.FockField(TwistParameter(self.lams[k], n), self.lattice, self.values[k], self.valid[k])

    def l2_mass(self):
        """``sum_k dlam int |V_lam f|^2 d xi d eta``."""
        return float(np.sum(np.abs(self.values) ** 2)) * self.cell_volume * self.dlam

    def rotate(self, k=1):
        """``zeta -> -i zeta`` on every slice (exact lattice permutation)."""
        vals = np.stack([fock._rotate_index_values(v, self.lattice, k) for v in self.values])
        ok = np.stack([fock._rotate_index_values(v, self.lattice, k) for v in self.valid])
        return VStack(self.base_grid, self.t_grid, self.lattice, vals, ok, self.active.copy(), dict(self.meta))


def heisenberg_lattice(stack, slice_tol=SLICE_TOL):
    """Default phase lattice sized for the largest active ``|lam_k|``."""
    act = stack.active(slice_tol)
    lmax = float(np.max(np.abs(stack.lams[act]))) if act.any() else 0.0
    return default_phase_grid(stack.base_grid, lmax)


def v_transform(f, lattice=None, slice_tol=SLICE_TOL, mode="fast"):
    """``V_lam f(zeta) = B_lam f^lam(zeta) sqrt(w_lam(zeta))`` for every active slice.

    Parameters
    ----------
    f : HeisenbergField or LambdaStack
    lattice : BoxGrid, optional
        Common closed phase lattice; by default sized for the largest active
        ``|lam_k|``.
    slice_tol : float
        Slices with energy below this fraction of the largest are skipped.
    """
    st = f if isinstance(f, LambdaStack) else central_inverse_ft(f)
    act = st.active(slice_tol)
    if lattice is None:
        lattice = heisenberg_lattice(st, slice_tol)
    n = st.base_grid.dim // 2
    shp = (len(act),) + tuple(lattice.shape) * 2
    vals = np.zeros(shp, dtype=complex)
    valid = np.zeros(shp, dtype=bool)
    lams = st.lams
    for k in np.flatnonzero(act):
        F = fock.bargmann_transform(TwistParameter(lams[k], n), st.slice(k), lattice, mode)
        valid[k] = F.valid
        vals[k] = np.where(F.valid, F.scaled, 0)
    return VStack(st.base_grid, st.t_grid, lattice, vals, valid, act, {"mode": mode})


def v_adjoint(V):
    """Adjoint of :func:`v_transform` (Lebesgue measure on the lattice, Riemann sum in ``lam``).

    Each slice is ``sqrt(c_lam)`` times the twisted STFT synthesis with
    window ``p_{1/2}^lam`` of ``V_lam`` with the phase of the fast transform
    undone; ``v_adjoint(v_transform(f))`` is a constant multiple of ``f``.
    """
    n = V.base_grid.dim // 2
    zeta = fock.zeta_lattice_points(V.lattice)
    xe = np.sum(zeta.real * zeta.imag, axis=-1)
    out = np.zeros((len(V.active),) + tuple(V.base_grid.shape), dtype=complex)
    for k in np.flatnonzero(V.active):
        lam = TwistParameter(V.lams[k], n)
        F = np.where(V.valid[k], V.values[k], 0) * np.exp(1j * lam.half_lam_coth * xe)
        p = heat_kernel_field(lam, 0.5, V.base_grid)
        g = twisted_stft_adjoint(lam, PhaseField(V.lattice, V.lattice, F), p)
        out[k] = math.sqrt(lam.c_lam) * g.values
    return central_ft(LambdaStack(V.base_grid, V.t_grid, out))


# ---------------------------------------------------------------- K_lam


def k_lambda_kernel(lam, xi, eta):
    """``c_lam^2 exp(-lam coth(lam) (|xi|^2 + |eta|^2) / 4) exp(lam [xi, eta] / 2)``."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    lam = as_twist(lam, xi.shape[-1] // 2)
    q = np.sum(xi * xi, axis=-1) + np.sum(eta * eta, axis=-1)
    return lam.c_lam**2 * np.exp(-0.25 * lam.lam_coth * q + 0.5 * lam.lam * fock._symp_last(xi, eta))


def _pair_rates(lam):
    # per coordinate pair (x_j, v_j) the exponent of K is a quadratic form with
    # eigenvalues (lam/4)(coth lam +- 1) along the diagonals x = -+ v
    if lam.lam == 0:
        return 0.25, 0.25
    c = 1.0 / math.tanh(lam.lam)
    return 0.25 * lam.lam * (c + 1), 0.25 * lam.lam * (c - 1)


def _pair_grid(lam, r, s, width=11.0, ppsd=1.5):
    fast, slow = _pair_rates(lam)
    sd_big = 1.0 / math.sqrt(2 * slow * min(r, s))
    sd_small = 1.0 / math.sqrt(2 * fast * max(r, s))
    h = sd_small / ppsd
    m = int(math.ceil(width * sd_big / h))
    return np.arange(-m, m + 1) * h, h


def _pair_profiles(lam, r, s, chunk=256):
    """Per-pair inner ``L^r`` profiles of ``K / c_lam^2`` as functions of the eta coordinate.

    ``K`` restricted to ``xi = (x, 0), eta = (0, v)`` and to
    ``xi = (0, u), eta = (y, 0)`` (``n = 1`` slices of the pair structure);
    the ``L^r`` norm runs over the first coordinate.
    """
    ax, h = _pair_grid(lam, min(r, 4.0), min(s, 4.0))
    n1 = TwistParameter(lam.lam, 1)
    g1 = np.empty(len(ax))
    g2 = np.empty(len(ax))
    for i0 in range(0, len(ax), chunk):
        e = ax[i0 : i0 + chunk]
        A = np.broadcast_to(ax[:, None], (len(ax), len(e)))
        B = np.broadcast_to(e[None, :], A.shape)
        Z = np.zeros(A.shape)
        k1 = k_lambda_kernel(n1, np.stack([A, Z], -1), np.stack([Z, B], -1)) / n1.c_lam**2
        k2 = k_lambda_kernel(n1, np.stack([Z, A], -1), np.stack([B, Z], -1)) / n1.c_lam**2
        g1[i0 : i0 + chunk] = _lp_1d(k1, r, h, 0)
        g2[i0 : i0 + chunk] = _lp_1d(k2, r, h, 0)
    return g1, g2, h


def k_lambda_mass(lam, n=1, method="closed"):
    """``int int K_lam d xi d eta``.

    ``"closed"`` evaluates the Gaussian integral after the rotation
    ``(x, v) -> (x + v, x - v)`` (Jacobian ``2^{-2n}``); ``"quadrature"``
    sums samples of :func:`k_lambda_kernel` over the coordinate pairs the
    kernel factors into.
    """
    lam = as_twist(lam, n)
    if method == "closed":
        fast, slow = _pair_rates(lam)
        # exponents (lam/8)(coth +- 1) in the rotated coordinates
        return lam.c_lam**2 * 2.0 ** (-2 * n) * (2 * math.pi / fast) ** n * (2 * math.pi / slow) ** n
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    g1, g2, h = _pair_profiles(lam, 1.0, 1.0)
    return float(lam.c_lam**2 * ((np.sum(g1) * h) * (np.sum(g2) * h)) ** n)


def _lp_1d(a, p, h, axis):
    if p == math.inf:
        return a.max(axis=axis)
    return (np.sum(a**p, axis=axis) * h) ** (1.0 / p)


def k_lambda_mixed_norm(lam, r, s, n=1, method="closed"):
    """``||K_lam||_{r,s}``: ``L^r`` over ``xi``, then ``L^s`` over ``eta``.

    The closed form is
    ``c_lam^2 (pi / (r a))^{n/r} (pi / (s b))^{n/s}`` with
    ``a = lam coth(lam) / 4`` and ``b = lam / (2 sinh 2 lam)``; infinite
    exponents drop their factor.  The quadrature works pair by pair since
    both the kernel and the mixed norm factor over coordinate pairs.
    """
    lam = as_twist(lam, n)
    r = float(r)
    s = float(s)
    if method == "closed":
        a = 0.25 * lam.lam_coth
        b = 0.5 * lam.lam / math.sinh(2 * lam.lam) if lam.lam else 0.25
        out = lam.c_lam**2
        if r != math.inf:
            out *= (math.pi / (r * a)) ** (n / r)
        if s != math.inf:
            out *= (math.pi / (s * b)) ** (n / s)
        return out
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    g1, g2, h = _pair_profiles(lam, r, s)
    # n copies of each pair multiply
    if s == math.inf:
        val = (g1.max() * g2.max()) ** n
    else:
        val = ((np.sum(g1**s) * h) * (np.sum(g2**s) * h)) ** (n / s)
    return float(lam.c_lam**2 * val)


# ---------------------------------------------------------------- norms


def _spec(spec):
    return spec if isinstance(spec, MixedNormSpec) else MixedNormSpec(*spec)


def _as_v(f, lattice=None):
    return f if isinstance(f, VStack) else v_transform(f, lattice)


def slice_norms(V, spec):
    """``||V_lam_k f||_{p,q}`` per slice (zero for skipped slices)."""
    spec = _spec(spec)
    out = np.zeros(len(V.active))
    for k in np.flatnonzero(V.active):
        out[k] = mixed_norm_lpq(V.slice(k), spec)
    return out


def m_pq_heisenberg_norm(f, spec, lattice=None):
    """``(int ||V_lam f||_{p,q}^2 dlam)^{1/2}`` as a Riemann sum over ``lam_k``."""
    V = _as_v(f, lattice)
    return math.sqrt(float(np.sum(slice_norms(V, spec) ** 2)) * V.dlam)


def m1_norm(f, spec, lattice=None):
    """Mixed norm over ``(xi, eta)`` of ``(int |V_lam f(xi + i eta)|^2 dlam)^{1/2}``."""
    V = _as_v(f, lattice)
    G = np.sqrt(np.sum(np.abs(V.values) ** 2, axis=0) * V.dlam)
    return mixed_norm_lpq(PhaseField(V.lattice, V.lattice, G), _spec(spec))


def _dual_exponent(p):
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1)


def dual_bracket(f, g, spec, lattice=None):
    """``<f, g>_0 = int <V_lam f, V_lam g> dlam`` with its Hoelder bound.

    Returns
    -------
    dict
        ``bracket`` (complex) and the record of
        ``|<f, g>_0| <= ||f||_{(p,q)} ||g||_{(p',q')}``.
    """
    spec = _spec(spec)
    Vf = _as_v(f, lattice)
    Vg = _as_v(g, Vf.lattice)
    if Vf.lattice != Vg.lattice:
        raise GridError("phase lattices differ")
    b = complex(np.sum(Vf.values * np.conj(Vg.values)) * Vf.cell_volume * Vf.dlam)
    dual = MixedNormSpec(_dual_exponent(spec.p), _dual_exponent(spec.q))
    rhs = m_pq_heisenberg_norm(Vf, spec) * m_pq_heisenberg_norm(Vg, dual)
    rec = record("dual_bracket_holder", None, f"{spec}|{dual}", abs(b), rhs, paper_ref="duality pairing Hoelder bound")
    rec["bracket"] = [b.real, b.imag]
    return rec


def heisenberg_inclusion_check(f, spec1, spec2, lattice=None):
    """``||f||_{(p2,q2)} <= (int C_lam^2 ||V_lam f||_{p1,q1}^2 dlam)^{1/2}``.

    ``C_lam = ||K_lam||_{r,s} / d`` with ``1/p1 + 1/r = 1 + 1/p2`` (same for
    ``q, s``) and ``d`` the measured orthogonality constant; the slicewise
    Young bound then integrates over ``lam``.  ``sup C_lam`` is reported as
    the uniform constant.
    """
    s1, s2 = _spec(spec1), _spec(spec2)
    if s1.p > s2.p or s1.q > s2.q:
        raise ValueError("inclusion needs p1 <= p2 and q1 <= q2")
    V = _as_v(f, lattice)
    n = V.base_grid.dim // 2
    r, s = young_exponent(s1.p, s2.p), young_exponent(s1.q, s2.q)
    d = registry.get("d_orth_measured", n)
    C = np.array([k_lambda_mixed_norm(lam, r, s, n) / d for lam in V.lams])
    lhs = m_pq_heisenberg_norm(V, s2)
    rhs = math.sqrt(float(np.sum((C * slice_norms(V, s1)) ** 2)) * V.dlam)
    rec = record("heisenberg_inclusion", None, f"{s1}->{s2}", lhs, rhs, paper_ref="Heisenberg inclusion theorem")
    rec["sup_constant"] = float(C.max())
    return rec


# ---------------------------------------------------------------- heat kernels


def heat_kernel_sublaplacian(t, base_grid, t_grid=None, full=False):
    """Heat kernel of the sublaplacian (or, with ``full``, of the full Laplacian).

    Slices are ``p_t^lam``; the full-Laplacian slices carry the extra factor
    ``exp(-lam^2 / 2)`` exactly as the slice formula reads (independent of
    ``t``).
    """
    if not t > 0:
        raise ValueError("heat kernel needs t > 0")
    t_grid = default_t_grid() if t_grid is None else t_grid
    lams = lambda_grid(t_grid)
    n = base_grid.dim // 2
    sl = np.empty((len(lams),) + tuple(base_grid.shape), dtype=complex)
    for k, lam in enumerate(lams):
        sl[k] = heat_kernel_field(TwistParameter(lam, n), t, base_grid).values
        if full:
            sl[k] *= math.exp(-0.5 * lam * lam)
    st = LambdaStack(base_grid, t_grid, sl)
    return central_ft(st), st


# ---------------------------------------------------------------- B_H


def _lattice_index(lattice, zeta):
    zeta = np.asarray(zeta, dtype=complex)
    h = np.asarray(lattice.spacing)
    L = np.asarray(lattice.half_width)
    out = []
    for part in (zeta.real, zeta.imag):
        k = (part + L) / h
        ki = np.rint(k)
        if np.any(np.abs(k - ki) > 1e-8) or np.any(ki < 0) or np.any(ki >= np.asarray(lattice.shape)):
            raise GridError(f"{zeta} is not a lattice point")
        out.extend(int(v) for v in ki)
    return tuple(out)


def bargmann_heisenberg(f, zeta, s, lattice=None):
    """``B_H f(zeta, s) = exp(s^2 / 4) int exp(-i lam s) exp(-lam^2 / 2) V_lam f(zeta) dlam``.

    ``s`` may be complex; ``zeta`` must be a point of the phase lattice.
    """
    V = _as_v(f, lattice)
    v = V.values[(slice(None),) + _lattice_index(V.lattice, zeta)]
    return _bh_from_profile(V.lams, V.dlam, v, s)


def _bh_from_profile(lams, dlam, v, s):
    s = np.asarray(s, dtype=complex)
    damp = np.exp(-0.5 * lams**2) * v
    ph = np.exp(-1j * np.multiply.outer(s, lams) + 0.25 * s[..., None] ** 2)
    return ph @ damp * dlam


def bargmann_identity_ratio(f, zetas, lattice=None, b_half_width=8.0, nb=65):
    """Both sides of ``int_C |B_H f(zeta, s)|^2 exp(-|s|^2/2) ds = c int |V_lam f(zeta)|^2 dlam``.

    The ``Re s`` integral runs over one period ``[-T, T)`` of the
    ``lam``-lattice (exact discrete Parseval), the ``Im s`` integral is a
    Riemann sum on ``[-b, b]``.  Also reports the measured constant of the
    pointwise bound ``|B_H f(zeta, s)|^2 <= C exp(s^2/2) int |V_lam f|^2``
    over real ``s``.

    Returns
    -------
    dict with arrays ``lhs``, ``rhs``, ``ratio`` over ``zetas`` and float ``pointwise_C``.
    """
    V = _as_v(f, lattice)
    a = V.t_grid.axis(0)
    da = V.t_grid.spacing[0]
    b = np.linspace(-b_half_width, b_half_width, nb)
    db = b[1] - b[0]
    S = a[:, None] + 1j * b[None, :]
    lhs, rhs, C = [], [], 0.0
    for z in zetas:
        v = V.values[(slice(None),) + _lattice_index(V.lattice, z)]
        BH = _bh_from_profile(V.lams, V.dlam, v, S)
        lhs.append(float(np.sum(np.abs(BH) ** 2 * np.exp(-0.5 * np.abs(S) ** 2)) * da * db))
        m = float(np.sum(np.abs(v) ** 2) * V.dlam)
        rhs.append(m)
        if m > 0:
            real = _bh_from_profile(V.lams, V.dlam, v, a)
            C = max(C, float(np.max(np.abs(real) ** 2 * np.exp(-0.5 * a**2)) / m))
    lhs, rhs = np.array(lhs), np.array(rhs)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = lhs / rhs
    return {"lhs": lhs, "rhs": rhs, "ratio": ratio, "pointwise_C": C}


# ---------------------------------------------------------------- square integrability


def matrix_coefficient_growth(f, g, max_lam=2.0, slice_tol=SLICE_TOL):
    """Slicewise ``int |<f^lam, Pi_lam(xi, eta) g^lam>|^2`` against ``(sinh lam / lam)^{2n} ||f^lam||^2 ||g^lam||^2``.

    Each active slice with ``|lam| <= max_lam`` is evaluated on its own
    default phase lattice.  The ratio column is ``(2 pi)^{2n}`` when the
    growth law holds, so it is constant in ``lam`` while the integrand
    itself grows like ``(sinh lam / lam)^{2n}``.

    Returns
    -------
    dict with arrays ``lams``, ``integrand``, ``predicted``, ``ratio``.
    """
    sf = central_inverse_ft(f)
    sg = central_inverse_ft(g)
    n = f.base_grid.dim // 2
    act = sf.active(slice_tol) & sg.active(slice_tol) & (np.abs(sf.lams) <= max_lam + 1e-12)
    ef, eg = sf.energies(), sg.energies()
    lams, meas, pred = [], [], []
    for k in np.flatnonzero(act):
        lam = TwistParameter(sf.lams[k], n)
        W = twisted_stft(lam, sf.slice(k), sg.slice(k), default_phase_grid(f.base_grid, lam)).field
        lams.append(lam.lam)
        meas.append(float(np.sum(np.abs(W.values) ** 2)) * W.cell_volume)
        pred.append((1.0 / lam.lam_over_sinh) ** (2 * n) * ef[k] * eg[k])
    lams, meas, pred = map(np.array, (lams, meas, pred))
    return {"lams": lams, "integrand": meas, "predicted": pred, "ratio": meas / pred}


# ---------------------------------------------------------------- serialization


def save_stack(stack, path):
    """Write a manifest ``stack.json`` and one ``.npy`` payload per slice into ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    files = []
    for k in range(len(stack.slices)):
        name = f"slice_{k:04d}.npy"
        np.save(path / name, np.ascontiguousarray(stack.slices[k], dtype=np.complex128))
        files.append(name)
    manifest = {
        "base_grid": stack.base_grid.to_dict(),
        "t_grid": stack.t_grid.to_dict(),
        "lam_grid": {"spacing": stack.dlam, "k_min": -len(files) // 2, "count": len(files)},
        "slices": files,
    }
    (path / "stack.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_stack(path):
    path = Path(path)
    m = json.loads((path / "stack.json").read_text())
    base = BoxGrid.from_dict(m["base_grid"])
    tg = BoxGrid.from_dict(m["t_grid"])
    if len(m["slices"]) != tg.shape[0]:
        raise GridError("slice count does not match the t grid")
    sl = np.stack([np.load(path / name) for name in m["slices"]])
    if sl.shape[1:] != tuple(base.shape):
        raise GridError("slice payload shape does not match the base grid")
    return LambdaStack(base, tg, sl)


def save_vstack(V, path):
    """Write ``vstack.json`` plus one ``.npy`` payload per active slice into ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    files = {}
    for k in np.flatnonzero(V.active):
        name = f"v_{k:04d}.npy"
        np.save(path / name, np.where(V.valid[k], V.values[k], np.nan + 0j))
        files[str(int(k))] = name
    manifest = {
        "base_grid": V.base_grid.to_dict(),
        "t_grid": V.t_grid.to_dict(),
        "lattice": V.lattice.to_dict(),
        "lam_grid": {"spacing": V.dlam, "k_min": -len(V.active) // 2, "count": len(V.active)},
        "slices": files,
        "meta": V.meta,
    }
    (path / "vstack.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_vstack(path):
    """Inverse of :func:`save_vstack`; NaN payload entries become invalid points."""
    path = Path(path)
    m = json.loads((path / "vstack.json").read_text())
    base, tg, lat = (BoxGrid.from_dict(m[k]) for k in ("base_grid", "t_grid", "lattice"))
    nt = tg.shape[0]
    shp = (nt,) + tuple(lat.shape) * 2
    vals = np.zeros(shp, dtype=complex)
    valid = np.zeros(shp, dtype=bool)
    active = np.zeros(nt, dtype=bool)
    for k, name in m["slices"].items():
        k = int(k)
        v = np.load(path / name)
        if v.shape != shp[1:]:
            raise GridError("slice payload shape does not match the lattice")
        valid[k] = ~np.isnan(v)
        vals[k] = np.where(valid[k], v, 0)
        active[k] = True
    return VStack(base, tg, lat, vals, valid, active, m.get("meta", {}))
