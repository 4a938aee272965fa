"""Regenerate the golden transform fixtures shipped in ``ttfa/data``.

The golden values come from the direct quadrature route so that the
``ttfa transform`` checks (which use the fast route) compare two independent
computations.
"""

import json
from pathlib import Path

import numpy as np

import ttfa
from ttfa import modspace
from ttfa.grid import BoxGrid, SampledField, mixed_norm_lpq, save_field, save_phase_field
from ttfa.twist import TwistParameter, heat_kernel_field

DATA = Path(ttfa.__file__).parent / "data"
LAM = 1.0
HALF_WIDTH = 4.0  # phase lattice |xi|, |eta| <= 4 (9 points per axis at stride 2)
SPECS = ["1,1", "1,2", "2,2", "inf,2"]


def golden_signal():
    grid = BoxGrid(48, 10.0, dim=2)
    X, U = grid.mesh()
    return SampledField(grid, np.exp(-((X - 0.4) ** 2 + (U + 0.3) ** 2) / 1.8) * (1 + 0.25j * X))


def main():
    f = golden_signal()
    lam = TwistParameter(LAM)
    g = heat_kernel_field(lam, 0.5, f.grid)
    pg = modspace.default_phase_grid(f.grid, lam, HALF_WIDTH)
    V = modspace.twisted_stft(lam, f, g, pg, mode="direct").field
    save_field(f, DATA / "golden_gaussian.json")
    save_phase_field(V, DATA / "golden_stft.json", {"op": "twisted_stft", "lambda": LAM, "half_width": HALF_WIDTH, "route": "direct"})
    norms = {s: mixed_norm_lpq(V, ttfa.MixedNormSpec.parse(s)) for s in SPECS}
    (DATA / "golden_norms.json").write_text(json.dumps({"lambda": LAM, "half_width": HALF_WIDTH, "window": "heat kernel p_1/2", "norms": norms}, indent=2) + "\n")
    print(norms)


if __name__ == "__main__":
    main()
