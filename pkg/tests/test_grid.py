import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttfa.grid import (
    INF,
    BoxGrid,
    GridError,
    MixedNormSpec,
    PhaseField,
    SampledField,
    fourier_transform,
    fractional_shift,
    load_field,
    load_phase_field,
    mixed_norm_lpq,
    quadrature_integral,
    resample_linear,
    save_field,
    save_phase_field,
)


def test_half_open_axis():
    g = BoxGrid(8, 2.0)
    ax = g.axis(0)
    assert ax[0] == -2.0 and ax[-1] == pytest.approx(1.5)
    assert g.cell_volume == pytest.approx(0.5)


def test_closed_lattice_symmetric():
    g = BoxGrid(5, 2.0, dim=2, closed=True)
    np.testing.assert_allclose(g.axis(0), [-2, -1, 0, 1, 2])
    with pytest.raises(GridError):
        BoxGrid(4, 2.0, closed=True)


@pytest.mark.parametrize("bad", [dict(points_per_axis=0, half_width=1), dict(points_per_axis=4, half_width=-1), dict(points_per_axis=4, half_width=math.inf)])
def test_grid_validation(bad):
    with pytest.raises(GridError):
        BoxGrid(**bad)


def test_dual_of_dual():
    g = BoxGrid([16, 32], [3.0, 5.0])
    assert g.dual().dual() == g


def test_gaussian_integral():
    g = BoxGrid(64, 8.0, dim=2)
    f = SampledField.from_function(g, lambda x, u: np.exp(-(x**2 + u**2) / 2))
    assert quadrature_integral(f).real == pytest.approx(2 * math.pi, rel=1e-12)


def test_fourier_gaussian_fixed_point():
    g = BoxGrid(64, 10.0, dim=2)
    f = SampledField.from_function(g, lambda x, u: np.exp(-(x**2 + u**2) / 2))
    F = fourier_transform(f)
    X, U = F.grid.mesh()
    np.testing.assert_allclose(F.values, np.exp(-(X**2 + U**2) / 2), atol=1e-12)
    back = fourier_transform(F, sign=1)
    np.testing.assert_allclose(back.values, f.values, atol=1e-12)


def test_fractional_shift_matches_analytic():
    g = BoxGrid(64, 10.0, dim=2)
    f = SampledField.from_function(g, lambda x, u: np.exp(-(x**2 + u**2) / 2))
    s = fractional_shift(f, [0.37, -1.1])
    X, U = g.mesh()
    np.testing.assert_allclose(s.values, np.exp(-((X - 0.37) ** 2 + (U + 1.1) ** 2) / 2), atol=1e-12)
    with pytest.raises(GridError):
        fractional_shift(f, [20.0, 0.0])


def test_mixed_norm_spec_parse():
    s = MixedNormSpec.parse("1.5, inf")
    assert (s.p, s.q) == (1.5, INF)
    assert str(s) == "1.5,inf"
    with pytest.raises(GridError):
        MixedNormSpec.parse("0.5,2")
    with pytest.raises(GridError):
        MixedNormSpec.parse("2")


def _phase(vals, m=5):
    g = BoxGrid(m, 1.0, closed=True)
    return PhaseField(g, g, vals)


def test_mixed_norm_separable():
    # |F| = a(xi) b(eta) gives ||a||_p ||b||_q
    g = BoxGrid(7, 1.5, closed=True)
    a = np.linspace(0.1, 1, 7)
    b = np.linspace(2, 0.3, 7)
    F = PhaseField(g, g, np.outer(a, b))
    h = g.cell_volume
    for p, q in [(1, 1), (2, 1), (1.5, 3), (INF, 2)]:
        na = a.max() if p == INF else (np.sum(a**p) * h) ** (1 / p)
        nb = (np.sum(b**q) * h) ** (1 / q)
        assert mixed_norm_lpq(F, (p, q)) == pytest.approx(na * nb, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1.0, 1.5, 2.0, 3.0]), st.sampled_from([1.0, 2.0, 4.0]))
def test_mixed_norm_homogeneous_and_triangle(seed, p, q):
    r = np.random.default_rng(seed)
    A = r.normal(size=(5, 5)) + 1j * r.normal(size=(5, 5))
    B = r.normal(size=(5, 5))
    fa, fb = _phase(A), _phase(B)
    c = 2.5
    assert mixed_norm_lpq(_phase(c * A), (p, q)) == pytest.approx(c * mixed_norm_lpq(fa, (p, q)), rel=1e-12)
    assert mixed_norm_lpq(_phase(A + B), (p, q)) <= (mixed_norm_lpq(fa, (p, q)) + mixed_norm_lpq(fb, (p, q))) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_mixed_norm_monotone_in_exponent_on_unit_cells(seed):
    # on a lattice with cell volume 1, l^p norms decrease in p
    g = BoxGrid(5, 2.0, closed=True)
    F = PhaseField(g, g, np.random.default_rng(seed).normal(size=(5, 5)))
    assert mixed_norm_lpq(F, (2, 2)) <= mixed_norm_lpq(F, (1, 2)) * (1 + 1e-12)
    assert mixed_norm_lpq(F, (2, 2)) <= mixed_norm_lpq(F, (2, 1)) * (1 + 1e-12)


def test_resample_linear_exact_on_affine():
    g = BoxGrid(5, 1.0, closed=True)
    X, Y = np.meshgrid(g.axis(0), g.axis(0), indexing="ij")
    F = PhaseField(g, g, 2 * X - 3 * Y + 1)
    pts = np.array([[0.3, -0.7], [1.0, 1.0], [-0.25, 0.1]])
    np.testing.assert_allclose(resample_linear(F, pts), 2 * pts[:, 0] - 3 * pts[:, 1] + 1, atol=1e-13)
    with pytest.raises(GridError):
        resample_linear(F, [[1.5, 0.0]])


def test_save_load_field_bit_exact(tmp_path):
    g = BoxGrid([6, 8], [1.0, 2.0])
    v = np.random.default_rng(1).normal(size=(6, 8)) + 1j
    save_field(SampledField(g, v), tmp_path / "f.json")
    back = load_field(tmp_path / "f.json")
    assert back.grid == g
    assert np.array_equal(back.values, v)


def test_save_load_phase_field(tmp_path):
    g = BoxGrid(5, 1.0, dim=2, closed=True)
    v = np.random.default_rng(2).normal(size=g.shape * 2) * (1 - 2j)
    save_phase_field(PhaseField(g, g, v), tmp_path / "p.json", {"lambda": 1.0})
    F, meta = load_phase_field(tmp_path / "p.json")
    assert meta == {"lambda": 1.0}
    assert F.xi_grid == g and np.array_equal(F.values, v)


def test_load_field_rejects_truncated_payload(tmp_path):
    g = BoxGrid(4, 1.0)
    save_field(SampledField(g, np.ones(4)), tmp_path / "f.json")
    (tmp_path / "f.json.bin").write_bytes(b"\0" * 16)
    with pytest.raises(GridError):
        load_field(tmp_path / "f.json")
