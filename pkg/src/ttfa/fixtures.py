"""Seeded test signals: Gaussian mixtures on R^{2n} and on the Heisenberg group.

All builders take a ``numpy.random.Generator`` (or a seed) so that a fixed
seed gives bit-identical samples.
"""

import numpy as np

from .grid import BoxGrid, SampledField

__all__ = ["default_base_grid", "rng", "gaussian_mixture", "heisenberg_mixture", "random_phase_field"]


def default_base_grid(n=1):
    return BoxGrid(48, 10.0, dim=2 * n)


def rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gaussian_mixture(grid, seed=0, components=2, center=0.75, widths=(0.7, 1.3), chirp=0.3):
    """Sum of ``components`` modulated Gaussians with random centers and widths.

    Centers lie in ``[-center, center]^{2n}``; each atom carries a random
    complex amplitude and a small linear chirp so that the mixture is not
    real.
    """
    r = rng(seed)
    X = grid.mesh()
    v = np.zeros(grid.shape, dtype=complex)
    for _ in range(components):
        c = r.uniform(-center, center, grid.dim)
        w = r.uniform(*widths)
        k = r.uniform(-chirp, chirp, grid.dim)
        amp = r.normal() + 1j * r.normal()
        q = sum((x - cj) ** 2 for x, cj in zip(X, c))
        v += amp * np.exp(-q / (2 * w * w) + 1j * sum(kj * x for kj, x in zip(k, X)))
    return SampledField(grid, v)


def heisenberg_mixture(base_grid, t_grid, seed=0, components=2, center=0.6, widths=(0.8, 1.1), t_width=(2.9, 3.2), shear=0.3, shift=None):
    """Gaussian mixture on ``H^n`` with a sheared central profile.

    Each atom is ``exp(-|xi - c|^2 / 2w^2 - (t - t0 - a.xi)^2 / 2s^2)`` with
    ``s`` in ``t_width``; ``s`` near 3 keeps the central spectrum inside
    ``|lam| < 2`` while the atom decays well inside ``|t| < 16``.

    ``shift=(xi0, s0)`` evaluates the exact left translate
    ``f((xi0, s0)^{-1} h)`` instead.
    """
    from .heisenberg import HeisenbergField

    r = rng(seed)
    d = base_grid.dim
    axes = base_grid.axes() + [t_grid.axis(0)]
    M = np.meshgrid(*axes, indexing="ij")
    X, T = M[:d], M[d]
    if shift is not None:
        xi0, s0 = np.asarray(shift[0], dtype=float), float(shift[1])
        n = d // 2
        br = sum(xi0[n + j] * X[j] - X[n + j] * xi0[j] for j in range(n))
        X, T = [X[j] - xi0[j] for j in range(d)], T - s0 - 0.5 * br
    v = np.zeros(M[0].shape, dtype=complex)
    for _ in range(components):
        c = r.uniform(-center, center, d)
        w = r.uniform(*widths)
        s = r.uniform(*t_width)
        a = r.uniform(-shear, shear, d)
        t0 = r.uniform(-0.5, 0.5)
        amp = r.normal() + 1j * r.normal()
        q = sum((x - cj) ** 2 for x, cj in zip(X, c))
        lin = sum(aj * x for aj, x in zip(a, X))
        v += amp * np.exp(-q / (2 * w * w) - (T - t0 - lin) ** 2 / (2 * s * s))
    return HeisenbergField(base_grid, t_grid, v)


def random_phase_field(lattice, seed=0, radius=None):
    """Random complex values on ``lattice x lattice``, zero outside the inner part."""
    from .grid import PhaseField

    r = rng(seed)
    shp = tuple(lattice.shape) * 2
    v = r.normal(size=shp) + 1j * r.normal(size=shp)
    if radius is None:
        radius = 0.25 * min(lattice.half_width)
    pts = [lattice.axis(j) for j in range(lattice.dim)] * 2
    M = np.meshgrid(*pts, indexing="ij")
    inside = np.ones(shp, dtype=bool)
    for m in M:
        inside &= np.abs(m) <= radius + 1e-12
    return PhaseField(lattice, lattice, np.where(inside, v, 0))
