import threading

import numpy as np
import pytest

from ttfa import heisenberg
from ttfa.fixtures import default_base_grid, gaussian_mixture, heisenberg_mixture

# lines printed by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []
TIMING_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
    if TIMING_LINES:
        terminalreporter.section("fast vs direct timing")
        for line in TIMING_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def base():
    return default_base_grid(1)


@pytest.fixture
def mixture(base):
    return lambda seed, **kw: gaussian_mixture(base, seed, **kw)


class HeisenbergBank:
    """Session cache of Heisenberg fixtures and their V transforms (V costs ~40 s)."""

    SEED = 9100

    def __init__(self):
        self.base = default_base_grid(1)
        self.t_grid = heisenberg.default_t_grid()
        self._lock = threading.Lock()
        self._f, self._v = {}, {}
        self._lattice = None

    def field(self, k):
        if k not in self._f:
            self._f[k] = heisenberg_mixture(self.base, self.t_grid, self.SEED + k)
        return self._f[k]

    @property
    def lattice(self):
        if self._lattice is None:
            self._lattice = heisenberg.heisenberg_lattice(heisenberg.central_inverse_ft(self.field(0)))
        return self._lattice

    def V(self, k):
        with self._lock:
            if k not in self._v:
                self._v[k] = heisenberg.v_transform(self.field(k), self.lattice)
            return self._v[k]

    def release(self, keep=(0, 1)):
        """Drop cached V stacks (~400 MB each) outside ``keep``."""
        with self._lock:
            for k in [k for k in self._v if k not in keep]:
                del self._v[k]

    def combination(self, coeffs):
        """Field and V of ``sum_k c_k f_k`` (V is linear, so no new transform is needed)."""
        f = self.field(0) * 0
        V0 = self.V(0)
        vals = np.zeros_like(V0.values)
        valid = np.ones_like(V0.valid)
        for k, c in enumerate(coeffs):
            f = f + self.field(k) * c
            Vk = self.V(k)
            vals += c * Vk.values
            valid &= Vk.valid
        vals *= valid
        active = np.any([self.V(k).active for k in range(len(coeffs))], axis=0)
        return f, heisenberg.VStack(V0.base_grid, V0.t_grid, V0.lattice, vals, valid, active, dict(V0.meta))


_bank = HeisenbergBank()


@pytest.fixture(scope="session")
def hbank():
    return _bank
