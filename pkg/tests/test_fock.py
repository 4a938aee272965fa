import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttfa import fock, registry, twist
from ttfa.fixtures import gaussian_mixture
from ttfa.grid import BoxGrid, GridError
from ttfa.modspace import default_phase_grid
from ttfa.twist import TwistParameter

POINTS = np.array(
    [
        [0.3 + 0.2j, -0.5 + 0.4j],
        [0.6 - 0.3j, 0.1 + 0.5j],
        [1.0 - 0.5j, 0.2 + 0.6j],
        [-0.8 + 0.3j, 0.5 - 0.7j],
        [0.4 + 1.1j, -1.0 - 0.2j],
    ]
)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_bargmann_isometry(mixture, lam):
    f = mixture(11)
    F = fock.bargmann_transform(lam, f)
    assert fock.fock_norm(F) ** 2 == pytest.approx(f.norm() ** 2, rel=1e-5)


@pytest.mark.slow
def test_bargmann_isometry_large_twist(mixture):
    f = mixture(11)
    F = fock.bargmann_transform(3.0, f)
    assert fock.fock_norm(F) ** 2 == pytest.approx(f.norm() ** 2, rel=1e-4)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_bargmann_of_heat_kernel_is_constant(base, lam):
    t = TwistParameter(lam)
    v, ok = fock.bargmann_points(t, twist.heat_kernel_field(t, 0.5, base), POINTS)
    assert ok.all()
    np.testing.assert_allclose(v, t.c_lam, rtol=1e-8)


def test_fast_and_direct_bargmann_agree(base, mixture):
    f = mixture(12)
    lat = default_phase_grid(base, half_width=4.0)
    a = fock.bargmann_transform(1.0, f, lat, "fast")
    b = fock.bargmann_transform(1.0, f, lat, "direct")
    ok = a.valid & b.valid
    assert ok.sum() > 100
    assert np.abs(a.scaled[ok] - b.scaled[ok]).max() < 1e-7 * np.abs(b.scaled[ok]).max()


def test_reproducing_property(base):
    f = fock.calibration_signal(base)
    F = fock.bargmann_transform(1.0, f)
    lhs, ok = fock.bargmann_points(1.0, f, POINTS)
    assert ok.all()
    rhs = fock.reproduce(F, POINTS)
    assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) < 1e-4


def test_registry_constants_near_unity():
    assert registry.get("d_n_measured", 1) == pytest.approx(1.0, abs=1e-6)
    assert registry.get("d_orth_measured", 1) == pytest.approx(0.25, rel=1e-6)


@pytest.mark.parametrize("method", ["spectral", "fd4"])
def test_ladder_identities(mixture, method):
    f = mixture(13)
    tol = 1e-4 if method == "spectral" else 1e-2
    rz, rw = fock.ladder_identity_residuals(1.0, f, POINTS, 0, method)
    assert rz.max() < tol and rw.max() < tol


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 1.0, 2.0]))
def test_u_lambda_unitary_and_invertible(seed, lam):
    base = BoxGrid(48, 10.0, dim=2)
    f = gaussian_mixture(base, seed, center=0.5, widths=(0.6, 0.9), chirp=0.2)
    g = fock.u_lambda_apply(lam, f)
    assert g.norm() == pytest.approx(f.norm(), rel=1e-9)
    back = fock.u_lambda_adjoint(lam, g)
    # the Nyquist masks make the round trip exact only to the band-limit error
    assert np.abs(back.values - f.values).max() < 1e-5 * np.abs(f.values).max()


def test_u_lambda_adjoint_rejects_wide_field(base):
    X, U = base.mesh()
    f = twist.SampledField(base, np.exp(-((X - 8) ** 2 + U**2) / 2))
    with pytest.raises(GridError):
        fock.u_lambda_adjoint(1.0, f)


def test_rotation_is_bargmann_of_u(mixture):
    # B(U f)(zeta) = B f(-i zeta)
    lam = TwistParameter(1.0)
    f = mixture(14, center=0.5, widths=(0.6, 0.9), chirp=0.2)
    F = fock.bargmann_transform(lam, f)
    G = fock.bargmann_transform(lam, fock.u_lambda_apply(lam, f), F.lattice)
    R = fock.fock_rotate(F, 1)
    ok = G.valid & R.valid
    assert np.abs(G.scaled[ok] - R.scaled[ok]).max() < 1e-6 * np.abs(F.scaled[F.valid]).max()


def test_rotate_four_times_is_identity(mixture):
    F = fock.bargmann_transform(1.0, mixture(15))
    R = fock.fock_rotate(F, 4)
    assert np.array_equal(R.valid, F.valid)
    assert np.array_equal(np.nan_to_num(R.scaled), np.nan_to_num(F.scaled))


def test_rho_fast_and_direct_agree(base, mixture):
    f = mixture(16)
    lat = default_phase_grid(base, half_width=4.0)
    F = fock.bargmann_transform(1.0, f, lat)
    h = lat.spacing[0]
    z0 = np.array([h + 0.0j, -h + h * 1j])
    a = fock.rho_apply(1.0, z0, F, "fast")
    b = fock.rho_apply(1.0, z0, F, "direct")
    ok = a.valid & b.valid
    assert ok.sum() > 50
    assert np.abs(a.scaled[ok] - b.scaled[ok]).max() < 1e-6 * np.abs(b.scaled[ok]).max()


def test_rho_needs_generator(mixture):
    F = fock.bargmann_transform(1.0, mixture(17))
    F.generator = None
    with pytest.raises(GridError):
        fock.rho_apply(1.0, np.zeros(2, dtype=complex), F)


def test_matrix_coefficient_relation(mixture):
    lam = TwistParameter(1.0)
    r = fock.matrix_bargmann_ratio(lam, mixture(18), POINTS)
    np.testing.assert_allclose(np.abs(r), 1 / math.sqrt(lam.c_lam), rtol=1e-7)


def test_weight_and_kernel_shapes():
    lam = TwistParameter(1.0)
    w = fock.weight_w_lambda(lam, POINTS)
    assert w.shape == (5,) and np.all(w > 0)
    K = fock.reproducing_kernel(lam, POINTS[0], POINTS, d_n=1.0)
    # K_zeta(zeta) is real and positive
    assert abs(K[0].imag) < 1e-12 * abs(K[0]) and K[0].real > 0


def test_decay_diagnostic(mixture):
    F = fock.bargmann_transform(1.0, mixture(19))
    d = fock.decay_diagnostic(F)
    assert set(d) == {2, 4} and all(np.isfinite(v) for v in d.values())
