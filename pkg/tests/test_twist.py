import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttfa import fock, twist
from ttfa.grid import BoxGrid, SampledField
from ttfa.twist import TwistError, TwistParameter

def test_constants_closed_forms():
    t = TwistParameter(1.0)
    assert t.c_lam == pytest.approx((4 * math.pi) ** -1 / math.sinh(1.0))
    assert t.c_half == pytest.approx(0.5 / math.tanh(0.5))
    assert t.tanh_half * t.c_half == pytest.approx(0.5)
    assert t.sigma == 0.5


def test_small_lambda_series_continuity():
    a, b = TwistParameter(1e-9), TwistParameter(0.0)
    assert a.lam_coth == pytest.approx(1.0, abs=1e-15)
    assert b.c_lam == pytest.approx((4 * math.pi) ** -1)
    assert b.c_half == 1.0 and b.half_lam_coth == 0.5


def test_invalid_twist():
    with pytest.raises(TwistError):
        TwistParameter(math.nan)
    with pytest.raises(TwistError):
        TwistParameter(1.0, n=0)
    with pytest.raises(TwistError):
        twist.build_theta_lambda(0.0)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("lam", [0.1, 0.5, 1.0, 2.0, 4.0])
def test_lambda_det_closed_form(lam, n):
    num = np.linalg.det(twist.lambda_matrix(lam, n))
    assert abs(num - twist.lambda_det_closed(lam, n)) / abs(num) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 3.0), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_lambda_apply_matches_matrix(lam, v):
    xi, eta = np.array(v[:2]), np.array(v[2:])
    xp, ep = twist.lambda_matrix_apply(lam, xi, eta)
    np.testing.assert_allclose(np.concatenate([xp, ep]), twist.lambda_matrix(lam) @ np.array(v), atol=1e-12)


def _gn(r):
    return twist.GroupElementGn(r.normal(size=2) + 1j * r.normal(size=2), r.normal() + 1j * r.normal())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_gn_group_axioms(seed):
    r = np.random.default_rng(seed)
    a, b, c = _gn(r), _gn(r), _gn(r)
    x = twist.group_mul_gn(twist.group_mul_gn(a, b), c)
    y = twist.group_mul_gn(a, twist.group_mul_gn(b, c))
    np.testing.assert_allclose(x.zeta, y.zeta, atol=1e-12)
    assert abs(x.s - y.s) < 1e-12
    e = twist.group_mul_gn(a, twist.group_inv_gn(a))
    assert np.allclose(e.zeta, 0) and abs(e.s) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 3.0))
def test_twisted_group_associative(seed, lam):
    r = np.random.default_rng(seed)
    t = TwistParameter(lam)
    g = [twist.GroupElementTwistedH(r.normal(size=2) + 1j * r.normal(size=2), r.normal(), t) for _ in range(3)]
    x = twist.group_mul_twisted(twist.group_mul_twisted(g[0], g[1]), g[2])
    y = twist.group_mul_twisted(g[0], twist.group_mul_twisted(g[1], g[2]))
    np.testing.assert_allclose(x.zeta, y.zeta, atol=1e-12)
    assert x.t == pytest.approx(y.t, abs=1e-12)


def test_heat_kernel_unit_mass_and_semigroup(base):
    for lam in (0.5, 1.0, 2.0):
        t = TwistParameter(lam)
        p = twist.heat_kernel_field(t, 1.0, base)
        q = twist.heat_kernel_field(t, 0.5, base)
        c = twist.twisted_convolve(t, q, q)
        np.testing.assert_allclose(c.values, p.values, atol=1e-8 * np.abs(p.values).max())


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_convolve_fast_matches_direct(base, mixture, lam):
    f, g = mixture(1), mixture(2)
    a = twist.twisted_convolve(lam, f, g, "fast").values
    b = twist.twisted_convolve(lam, f, g, "direct").values
    assert np.abs(a - b).max() < 1e-8 * np.abs(b).max()


def test_convolve_zero_twist_is_ordinary(base):
    # lam = 0 reduces to the ordinary convolution; Gaussians convolve in closed form
    f = SampledField.from_function(base, lambda x, u: np.exp(-(x**2 + u**2) / 2))
    c = twist.twisted_convolve(0.0, f, f)
    X, U = base.mesh()
    np.testing.assert_allclose(c.values, math.pi * np.exp(-(X**2 + U**2) / 4), atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.2, 2.0))
def test_pi_lambda_unitary(seed, lam):
    base = BoxGrid(48, 10.0, dim=2)
    from ttfa.fixtures import gaussian_mixture

    f = gaussian_mixture(base, seed)
    r = np.random.default_rng(seed)
    g = twist.rep_pi_lambda(lam, r.uniform(-1, 1, 2), r.uniform(-1, 1, 2), f)
    assert g.norm() == pytest.approx(f.norm(), rel=1e-9)


def test_translations_compose_with_cocycle(base, mixture):
    # tau(a) tau(b) = exp(i lam/2 [a, b]) tau(a + b)
    lam = TwistParameter(1.0)
    f = mixture(3, center=0.5)
    a, b = np.array([0.4, -0.2]), np.array([-0.3, 0.5])
    lhs = twist.twisted_translate(lam, a, twist.twisted_translate(lam, b, f)).values
    rhs = twist.twisted_translate(lam, a + b, f).values * np.exp(1j * lam.sigma * twist.symp(a, b))
    # the FFT shift of a chirped atom is band-limited only to ~1e-8
    assert np.abs(lhs - rhs).max() < 1e-7 * np.abs(rhs).max()


@pytest.mark.parametrize("lam", [0.5, 1.0])
def test_intertwining_modulation_translation(base, lam):
    from ttfa.fixtures import gaussian_mixture

    t = TwistParameter(lam)
    f = gaussian_mixture(base, 7, center=0.5, widths=(0.6, 0.9), chirp=0.2)
    r = np.random.default_rng(4)
    for _ in range(5):
        eta = r.uniform(-1, 1, 2)
        lhs = twist.twisted_modulate(t, eta, f).values
        rhs = fock.u_lambda_apply(t, twist.twisted_translate(t, eta, fock.u_lambda_adjoint(t, f))).values
        assert np.abs(lhs - rhs).max() < 1e-6


def test_classical_stft_gaussian(base):
    f = SampledField.from_function(base, lambda x, u: np.exp(-(x**2 + u**2) / 2))
    V = twist.classical_stft(f, f)
    assert np.isfinite(V.values).all()
