import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttfa import heisenberg as H
from ttfa import twist
from ttfa.fixtures import heisenberg_mixture
from ttfa.grid import BoxGrid, GridError
from ttfa.twist import TwistParameter


@pytest.fixture(scope="module")
def tg():
    return H.default_t_grid()


def gauss_field(base, tg, t_width=1.0):
    return H.HeisenbergField.from_function(base, tg, lambda x, u, t: np.exp(-((x - 0.3) ** 2 + u**2) / 2 - t**2 / (2 * t_width**2)))


# ---------------------------------------------------------------- central FT


def test_lambda_grid(tg):
    lams = H.lambda_grid(tg)
    assert len(lams) == 64 and lams[32] == 0
    assert lams[33] == pytest.approx(math.pi / 16)
    with pytest.raises(GridError):
        H.lambda_grid(BoxGrid(48, 16.0))
    with pytest.raises(GridError):
        H.lambda_grid(BoxGrid(65, 16.0, closed=True))


def test_central_ft_gaussian_and_roundtrip(base, tg):
    f = gauss_field(base, tg)
    stk = H.central_inverse_ft(f)
    X, U = base.mesh()
    g = np.exp(-((X - 0.3) ** 2 + U**2) / 2)
    ref = np.stack([g * math.sqrt(2 * math.pi) * math.exp(-lam**2 / 2) for lam in stk.lams])
    assert np.abs(stk.slices - ref).max() < 1e-8
    assert np.abs(H.central_ft(stk).values - f.values).max() < 1e-12


def test_central_ft_plancherel(base, tg):
    f = heisenberg_mixture(base, tg, 3)
    stk = H.central_inverse_ft(f)
    assert np.sum(stk.energies()) * stk.dlam / (2 * math.pi) == pytest.approx(f.norm() ** 2, rel=1e-12)


def test_field_validation(base, tg):
    with pytest.raises(GridError):
        H.HeisenbergField(base, tg, np.zeros(5))
    with pytest.raises(GridError):
        H.HeisenbergField(base, tg, np.full(base.shape + (64,), np.nan))


# ---------------------------------------------------------------- group and representations


def _elem(r):
    return H.HeisenbergGroupElement(r.normal(size=2), r.normal())


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_group_axioms(seed):
    r = np.random.default_rng(seed)
    a, b, c = _elem(r), _elem(r), _elem(r)
    x = H.heisenberg_group_mul(H.heisenberg_group_mul(a, b), c)
    y = H.heisenberg_group_mul(a, H.heisenberg_group_mul(b, c))
    np.testing.assert_allclose(x.xi, y.xi, atol=1e-12)
    assert x.t == pytest.approx(y.t, abs=1e-12)
    e = H.heisenberg_group_mul(a, H.heisenberg_group_inv(a))
    assert np.allclose(e.xi, 0) and abs(e.t) < 1e-12


def test_group_law_centre():
    a = H.HeisenbergGroupElement([1.0, 0.0], 0.0)
    b = H.HeisenbergGroupElement([0.0, 1.0], 0.0)
    # [(1,0),(0,1)] = 0*0 - 1*1 = -1
    assert H.heisenberg_group_mul(a, b).t == pytest.approx(-0.5)


def test_pi_is_left_translation(base, tg):
    f = heisenberg_mixture(base, tg, 9100)
    xi, s = np.array([0.6, -0.4]), 0.2
    T = H.heisenberg_translate(H.HeisenbergGroupElement(xi, s), f)
    ref = heisenberg_mixture(base, tg, 9100, shift=(xi, s)).values
    # the central FT is periodic in t, so the tails wrap at |t| = 16
    err = np.abs(T.values - ref).max() / np.abs(ref).max()
    assert err < 1e-5


def test_pi_homomorphism(base, tg):
    f = heisenberg_mixture(base, tg, 9101)
    a = H.HeisenbergGroupElement([0.3, -0.2], 0.4)
    b = H.HeisenbergGroupElement([-0.5, 0.1], -0.3)
    lhs = H.heisenberg_translate(a, H.heisenberg_translate(b, f)).values
    rhs = H.heisenberg_translate(H.heisenberg_group_mul(a, b), f).values
    assert np.abs(lhs - rhs).max() < 1e-7 * np.abs(rhs).max()


def test_pi_unitary_complex_argument(base, tg):
    f = heisenberg_mixture(base, tg, 9102)
    g = H.big_pi_apply(np.array([0.3 - 0.2j, -0.1 + 0.4j]), -0.7, f)
    assert g.norm() == pytest.approx(f.norm(), rel=1e-12)


def test_u_tilde_unitary_and_intertwining(base, tg):
    f = heisenberg_mixture(base, tg, 9103)
    assert H.u_tilde_apply(f).norm() == pytest.approx(f.norm(), rel=1e-10)
    eta, s = np.array([0.5, 0.3]), 0.2
    e = H.heisenberg_modulate(eta, s, f).values
    e2 = H.u_tilde_apply(H.big_pi_apply(eta, s, H.u_tilde_adjoint(f))).values
    assert np.abs(e - e2).max() < 1e-5 * np.abs(e).max()


def test_t_multiplier_symbol(base):
    tg1 = BoxGrid(64, 4 * math.pi)
    f = H.HeisenbergField.from_function(base, tg1, lambda x, u, t: np.exp(-(x**2 + u**2) / 2 - t**2 / 8))
    a = H.central_inverse_ft(H.t_multiplier_apply(f))
    b = H.central_inverse_ft(f)
    k = int(np.argmin(np.abs(a.lams - 1.0)))
    assert a.lams[k] == pytest.approx(1.0)
    np.testing.assert_allclose(a.slices[k], math.sqrt(TwistParameter(1.0).c_lam) * b.slices[k], atol=1e-14)


# ---------------------------------------------------------------- K_lam


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_k_mass_is_one(lam):
    assert H.k_lambda_mass(lam) == pytest.approx(1.0, abs=1e-12)
    assert H.k_lambda_mass(lam, method="quadrature") == pytest.approx(1.0, abs=1e-5)


def test_k_mass_brute_force():
    # independent 4-D Riemann sum of the kernel itself
    lam = TwistParameter(1.0)
    ax = np.linspace(-9, 9, 61)
    h = ax[1] - ax[0]
    X, U, Y, V = np.meshgrid(ax, ax, ax, ax, indexing="ij", sparse=True)
    K = H.k_lambda_kernel(lam, np.stack(np.broadcast_arrays(X, U), -1), np.stack(np.broadcast_arrays(Y, V), -1))
    assert K.sum() * h**4 == pytest.approx(1.0, abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 2.5), st.floats(1.0, 4.0), st.floats(1.0, 4.0))
def test_k_mixed_norm_closed_vs_quadrature(lam, r, s):
    a = H.k_lambda_mixed_norm(lam, r, s)
    b = H.k_lambda_mixed_norm(lam, r, s, method="quadrature")
    assert b == pytest.approx(a, rel=1e-5)


def test_k_mixed_norm_unit_exponents_is_mass():
    assert H.k_lambda_mixed_norm(1.3, 1, 1) == pytest.approx(H.k_lambda_mass(1.3), rel=1e-12)


# ---------------------------------------------------------------- heat kernels


def test_sublaplacian_heat_kernel_slices(base, tg):
    f, stk = H.heat_kernel_sublaplacian(0.5, base, tg)
    k = 40
    ref = twist.heat_kernel_field(TwistParameter(stk.lams[k]), 0.5, base).values
    np.testing.assert_allclose(stk.slices[k], ref)
    _, full = H.heat_kernel_sublaplacian(0.5, base, tg, full=True)
    np.testing.assert_allclose(full.slices[k], ref * math.exp(-stk.lams[k] ** 2 / 2))
    with pytest.raises(ValueError):
        H.heat_kernel_sublaplacian(0.0, base)


# ---------------------------------------------------------------- serialization


def test_stack_roundtrip(tmp_path, base, tg):
    stk = H.central_inverse_ft(heisenberg_mixture(base, tg, 5))
    H.save_stack(stk, tmp_path / "s")
    back = H.load_stack(tmp_path / "s")
    assert back.base_grid == base and back.t_grid == tg
    assert np.array_equal(back.slices, stk.slices)


def test_vstack_roundtrip(tmp_path, base):
    tg = BoxGrid(4, 2.0)
    lat = BoxGrid(3, 1.0, dim=2, closed=True)
    r = np.random.default_rng(0)
    vals = r.normal(size=(4,) + lat.shape * 2) + 0j
    valid = r.random(vals.shape) > 0.3
    active = np.array([False, True, True, False])
    vals = np.where(valid & active[:, None, None, None, None], vals, 0)
    valid &= active[:, None, None, None, None]
    V = H.VStack(base, tg, lat, vals, valid, active, {"mode": "fast"})
    H.save_vstack(V, tmp_path / "v")
    W = H.load_vstack(tmp_path / "v")
    assert np.array_equal(W.active, active) and np.array_equal(W.valid, valid)
    assert np.array_equal(W.values, vals)


# ---------------------------------------------------------------- V transform (shared, cached)


def test_plancherel_constant_across_fixtures(hbank):
    r = [hbank.V(k).l2_mass() / hbank.field(k).norm() ** 2 for k in range(2)]
    assert r[0] == pytest.approx(r[1], rel=1e-3)
    assert r[0] == pytest.approx(math.pi / 2, rel=1e-3)


def test_plancherel_polarization(hbank):
    # linearity of V carries the identity to combinations
    f, V = hbank.combination([1.0, 0.5 - 0.7j])
    assert V.l2_mass() / f.norm() ** 2 == pytest.approx(math.pi / 2, rel=1e-3)


def test_fundamental_identity(hbank):
    Vf = hbank.V(0)
    VU = H.v_transform(H.u_tilde_apply(hbank.field(0)), Vf.lattice)
    R = Vf.rotate(1)
    ok = VU.valid & R.valid
    assert np.abs(VU.values - R.values)[ok].max() < 1e-4 * np.abs(Vf.values).max()


def test_rotate_four_times(hbank):
    Vf = hbank.V(0)
    assert np.array_equal(Vf.rotate(4).values, Vf.values)


def test_m1_equals_m22(hbank):
    Vf = hbank.V(0)
    assert H.m1_norm(Vf, (2, 2)) == pytest.approx(H.m_pq_heisenberg_norm(Vf, (2, 2)), rel=1e-12)


@pytest.mark.parametrize("specs", [((1, 1), (2, 2)), ((1, 2), (2, math.inf)), ((1.5, 1), (2, 2))])
def test_heisenberg_inclusion(hbank, specs):
    r = H.heisenberg_inclusion_check(hbank.V(0), *specs)
    assert r["pass"], r
    assert r["sup_constant"] > 0


@pytest.mark.parametrize("spec", [(1, 1), (1.5, 3), (2, 2), (math.inf, 2)])
def test_dual_bracket_holder(hbank, spec):
    r = H.dual_bracket(hbank.V(0), hbank.V(1), spec)
    assert r["pass"], r


def test_dual_bracket_matches_plancherel(hbank):
    r = H.dual_bracket(hbank.V(0), hbank.V(0), (2, 2))
    assert r["bracket"][0] == pytest.approx(math.pi / 2 * hbank.field(0).norm() ** 2, rel=1e-3)


def test_bargmann_heisenberg_identity(hbank):
    V = hbank.V(0)
    c = V.lattice.shape[0] // 2
    ax = V.lattice.axis(0)
    zs = [np.zeros(2, dtype=complex), np.array([ax[c + 1] + 1j * ax[c - 1], ax[c] + 1j * ax[c + 2]])]
    r = H.bargmann_identity_ratio(V, zs)
    assert np.ptp(r["ratio"]) < 1e-6 * r["ratio"].mean()
    assert r["ratio"][0] == pytest.approx(2 * math.pi**1.5, rel=1e-4)
    assert r["pointwise_C"] <= math.sqrt(math.pi)
    with pytest.raises(GridError):
        H.bargmann_heisenberg(V, np.array([0.123 + 0j, 0]), 0.0)


def test_matrix_coefficient_growth(hbank):
    out = H.matrix_coefficient_growth(hbank.field(0), hbank.field(1), max_lam=1.0)
    np.testing.assert_allclose(out["ratio"], (2 * math.pi) ** 2, rtol=1e-5)


@pytest.mark.slow
def test_v_adjoint_inverts_up_to_constant(hbank):
    f = hbank.field(0)
    back = H.v_adjoint(hbank.V(0))
    c = back.inner(f) / f.inner(f)
    assert c.real == pytest.approx(0.25, rel=1e-5) and abs(c.imag) < 1e-6
    assert (back - f * c).norm() < 1e-4 * f.norm()
