import numpy as np
import pytest

from ttfa import fock, kernels, modspace, twist

pytestmark = pytest.mark.skipif(not kernels.compiled_available(), reason="compiled kernels not built")


@pytest.fixture
def backend_runner():
    def both(fn):
        prev = kernels.use_backend("compiled")
        try:
            a = fn()
            kernels.use_backend("python")
            b = fn()
        finally:
            kernels.use_backend(prev)
        return a, b

    return both


def test_backend_switch_roundtrip():
    prev = kernels.use_backend("python")
    assert kernels.backend() == "python"
    kernels.use_backend(prev)
    with pytest.raises(ValueError):
        kernels.use_backend("gpu")


def test_convolution_backends_agree(mixture, backend_runner):
    f, g = mixture(1), mixture(2)
    a, b = backend_runner(lambda: twist.twisted_convolve(1.0, f, g, "direct").values)
    assert np.abs(a - b).max() < 1e-12 * np.abs(b).max()


def test_holomorphic_sum_backends_agree(mixture, backend_runner):
    f = mixture(3)
    z = np.array([[0.3 + 0.2j, -0.5 + 0.4j], [1.0 - 0.5j, 0.2 + 0.6j]])
    a, b = backend_runner(lambda: fock.bargmann_points(1.0, f, z)[0])
    assert np.abs(a - b).max() < 1e-12 * np.abs(b).max()


def test_stft_backends_agree(base, mixture, backend_runner):
    f, g = mixture(4), mixture(5)
    pg = modspace.default_phase_grid(base, half_width=2.0)
    a, b = backend_runner(lambda: modspace.twisted_stft(0.5, f, g, pg, "direct").values)
    assert np.abs(a - b).max() < 1e-12 * np.abs(b).max()


@pytest.mark.parametrize("qx,qu", [(1, 1), (2, 2), (3, 2)])
def test_pair_fold_backends_agree(backend_runner, qx, qu):
    r = np.random.default_rng(7)
    E, nx, mq, npair = 3, 6, 5, 4
    fa = r.normal(size=(E, nx, qu * mq)) + 1j * r.normal(size=(E, nx, qu * mq))
    first = qx * (npair - 1)
    fb = r.normal(size=(E, first + nx, qu * mq)) + 1j * r.normal(size=(E, first + nx, qu * mq))
    a, b = backend_runner(lambda: kernels.pair_fold(fa, fb, first, qx, npair, qu, mq))
    ref = np.zeros_like(a)
    for p in range(npair):
        for k in range(nx):
            prod = fa[:, k] * fb[:, first - qx * p + k]
            ref[:, p, k] = prod.reshape(E, qu, mq).sum(axis=1)
    assert np.abs(a - ref).max() < 1e-12
    assert np.abs(b - ref).max() < 1e-12


def test_fast_stft_python_backend_matches(base, mixture, backend_runner):
    f, g = mixture(6), mixture(7)
    a, b = backend_runner(lambda: modspace.twisted_stft(1.0, f, g, mode="fast").values)
    assert np.abs(a - b).max() < 1e-12 * np.abs(b).max()
