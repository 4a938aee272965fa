"""Verification suites: identity and inequality checks across lam and (p, q) sweeps.

A suite is an ordered list of items; each item is a callable returning check
records ``{id, paper_ref, lhs, rhs, ratio, tol, pass, kind}``.  Two kinds of
record exist: ``"le"`` passes when ``lhs <= rhs (1 + tol)`` and ``"err"``
passes when the error ``lhs`` is at most ``tol`` times the scale ``rhs``.
Items may run on a thread pool; records are assembled in item order so the
report does not depend on scheduling.
"""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fock, heisenberg, modspace, registry, twist
from .fixtures import gaussian_mixture, heisenberg_mixture, random_phase_field
from .grid import BoxGrid, MixedNormSpec, SampledField
from .twist import TwistParameter

__all__ = ["SuiteConfig", "ConfigError", "SUITES", "build_items", "run_items", "check_le", "check_err"]

SUITES = ("constants", "twisted-core", "fock", "modspace-twisted", "heisenberg", "all")


class ConfigError(ValueError):
    """Invalid suite configuration; the message names the offending field."""


@dataclass
class SuiteConfig:
    n: int = 1
    base_points: int = 48
    base_half_width: float = 10.0
    t_points: int = 64
    t_half_width: float = 16.0
    lambda_list: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    pq_list: list = field(default_factory=lambda: [(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)])
    seed: int = 20240611
    tolerances: dict = field(default_factory=dict)
    out_dir: str = "ttfa-report"

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(extra))}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why}")

        if not isinstance(self.n, int) or self.n != 1:
            bad("n", "only n = 1 fixtures are shipped")
        for name in ("base_points", "t_points"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                bad(name, f"must be a positive integer, got {v!r}")
        if self.base_points % 2:
            bad("base_points", "must be even")
        if self.t_points & (self.t_points - 1):
            bad("t_points", "must be a power of two")
        for name in ("base_half_width", "t_half_width"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                bad(name, f"must be positive and finite, got {v!r}")
        if not self.lambda_list:
            bad("lambda_list", "must not be empty")
        for v in self.lambda_list:
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v != 0):
                bad("lambda_list", f"entries must be finite and nonzero, got {v!r}")
        pq = []
        for v in self.pq_list:
            try:
                s = MixedNormSpec.parse(v) if isinstance(v, str) else MixedNormSpec(*v)
            except Exception as e:  # noqa: BLE001 - surfaced as a config error
                bad("pq_list", str(e))
            pq.append((s.p, s.q))
        self.pq_list = pq
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v > 0):
                bad(f"tolerances.{k}", f"must be positive, got {v!r}")
        if not isinstance(self.seed, int):
            bad("seed", "must be an integer")
        self.lambda_list = [float(v) for v in self.lambda_list]

    def tol(self, key, default):
        return float(self.tolerances.get(key, default))

    def base(self):
        return BoxGrid(self.base_points, self.base_half_width, dim=2 * self.n)

    def t_grid(self):
        return BoxGrid(self.t_points, self.t_half_width)

    def to_dict(self):
        d = asdict(self)
        d["pq_list"] = [list(v) for v in self.pq_list]
        return d


# ---------------------------------------------------------------- records


def _rec(cid, paper_ref, lhs, rhs, tol, ok, kind):
    lhs, rhs = float(lhs), float(rhs)
    ratio = lhs / rhs if rhs else (0.0 if lhs == 0 else math.inf)
    return {"id": cid, "paper_ref": paper_ref, "kind": kind, "lhs": lhs, "rhs": rhs, "ratio": ratio, "tol": float(tol), "pass": bool(ok)}


def check_le(cid, paper_ref, lhs, rhs, tol):
    """Inequality ``lhs <= rhs`` with multiplicative slack ``tol``."""
    return _rec(cid, paper_ref, lhs, rhs, tol, lhs <= rhs * (1 + tol) + 1e-300, "le")


def check_err(cid, paper_ref, err, scale, tol):
    """Error ``err`` relative to ``scale`` within ``tol``."""
    scale = float(scale) if scale else 1.0
    return _rec(cid, paper_ref, err, scale, tol, err <= tol * scale, "err")


def _lam_tag(lam):
    return f"lam={lam:g}"


class _Cache:
    """Per-run memo for expensive shared quantities (thread-safe, computed once)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._vals = {}
        self._locks = {}

    def get(self, key, make):
        with self._lock:
            if key in self._vals:
                return self._vals[key]
            lk = self._locks.setdefault(key, threading.Lock())
        with lk:
            with self._lock:
                if key in self._vals:
                    return self._vals[key]
            v = make()
            with self._lock:
                self._vals[key] = v
            return v


# ---------------------------------------------------------------- constants


def _constants_items(cfg, cache):
    items = []
    n = cfg.n
    for lam in cfg.lambda_list:
        def det_item(lam=lam):
            num = float(np.linalg.det(twist.lambda_matrix(lam, n)))
            ref = twist.lambda_det_closed(lam, n)
            return [check_err(f"constants/det-lambda/{_lam_tag(lam)}", "determinant of Lambda", abs(num - ref), abs(ref), cfg.tol("det", 1e-9))]

        def c_item(lam=lam):
            t = TwistParameter(lam, n)
            ref = (4 * math.pi) ** (-n) * (lam / math.sinh(lam)) ** n
            r1 = check_err(f"constants/c-lambda/{_lam_tag(lam)}", "c_lambda normalisation", abs(t.c_lam - ref), ref, 1e-13)
            ch = (lam / 2) / math.tanh(lam / 2)
            r2 = check_err(f"constants/c-half/{_lam_tag(lam)}", "(lam/2) coth(lam/2)", abs(t.c_half - ch), ch, 1e-13)
            r3 = check_err(
                f"constants/c-half-tanh/{_lam_tag(lam)}", "c(lam) tanh(lam/2) = lam/2", abs(t.c_half * t.tanh_half - lam / 2), abs(lam / 2), 1e-13
            )
            return [r1, r2, r3]

        def k_item(lam=lam):
            q = heisenberg.k_lambda_mass(lam, n, method="quadrature")
            return [check_err(f"constants/k-mass/{_lam_tag(lam)}", "K_lambda integrates to one", abs(q - 1.0), 1.0, cfg.tol("k_mass", 1e-5))]

        items += [det_item, c_item, k_item]

    def series_item():
        # the small-lam series branch joins the closed forms continuously
        lo, hi = TwistParameter(0.999e-4, n), TwistParameter(1.001e-4, n)
        return [
            check_err("constants/series-c-lambda", "c_lambda near lam = 0", abs(lo.c_lam - hi.c_lam), hi.c_lam, 1e-7),
            check_err("constants/series-lam-coth", "lam coth lam near lam = 0", abs(lo.lam_coth - hi.lam_coth), 1.0, 1e-7),
        ]

    def registry_item():
        d_n = registry.get("d_n_measured", n)
        d_o = registry.get("d_orth_measured", n)
        return [
            check_err("constants/registry-d_n", "reproducing kernel constant", abs(d_n - 1.0), 1.0, cfg.tol("d_n", 1e-6)),
            check_err("constants/registry-d_orth", "orthogonality constant", abs(d_o - 4.0**-n), 4.0**-n, cfg.tol("d_orth", 1e-6)),
        ]

    return items + [series_item, registry_item]


# ---------------------------------------------------------------- twisted core


def _twisted_core_items(cfg, cache):
    base = cfg.base()
    items = []
    for lam in cfg.lambda_list:
        def semigroup(lam=lam):
            t = TwistParameter(lam, cfg.n)
            p = twist.heat_kernel_field(t, 0.5, base)
            c = twist.twisted_convolve(t, p, p)
            ref = twist.heat_kernel_field(t, 1.0, base).values
            err = float(np.abs(c.values - ref).max())
            return [check_err(f"twisted-core/semigroup/{_lam_tag(lam)}", "heat semigroup under twisted convolution", err, np.abs(ref).max(), 1e-7)]

        def fast_direct(lam=lam):
            f = gaussian_mixture(base, cfg.seed + 1)
            g = gaussian_mixture(base, cfg.seed + 2)
            a = twist.twisted_convolve(lam, f, g, "fast").values
            b = twist.twisted_convolve(lam, f, g, "direct").values
            return [check_err(f"twisted-core/conv-fast-direct/{_lam_tag(lam)}", "twisted convolution", float(np.abs(a - b).max()), np.abs(b).max(), 1e-8)]

        def intertwine(lam=lam):
            t = TwistParameter(lam, cfg.n)
            f = gaussian_mixture(base, cfg.seed + 3, center=0.5, widths=(0.6, 0.9), chirp=0.2)
            r = np.random.default_rng(cfg.seed + 4)
            worst, scale = 0.0, 0.0
            for _ in range(5):
                eta = r.uniform(-1, 1, base.dim)
                lhs = twist.twisted_modulate(t, eta, f).values
                rhs = fock.u_lambda_apply(t, twist.twisted_translate(t, eta, fock.u_lambda_adjoint(t, f))).values
                worst = max(worst, float(np.abs(lhs - rhs).max()))
                scale = max(scale, float(np.abs(lhs).max()))
            return [check_err(f"twisted-core/intertwining/{_lam_tag(lam)}", "translation-modulation intertwining", worst, scale, cfg.tol("intertwining", 1e-6))]

        def unitary(lam=lam):
            f = gaussian_mixture(base, cfg.seed + 5)
            g = twist.rep_pi_lambda(lam, [0.4, -0.3], [0.2, 0.5], f)
            return [check_err(f"twisted-core/pi-unitary/{_lam_tag(lam)}", "Pi_lambda is unitary", abs(g.norm() - f.norm()), f.norm(), 1e-10)]

        items += [semigroup, fast_direct, intertwine, unitary]

    def assoc():
        r = np.random.default_rng(cfg.seed + 6)
        worst = 0.0
        for _ in range(20):
            a, b, c = (heisenberg.HeisenbergGroupElement(r.normal(size=2), r.normal()) for _ in range(3))
            x = heisenberg.heisenberg_group_mul(heisenberg.heisenberg_group_mul(a, b), c)
            y = heisenberg.heisenberg_group_mul(a, heisenberg.heisenberg_group_mul(b, c))
            worst = max(worst, float(np.abs(x.xi - y.xi).max()), abs(x.t - y.t))
        return [check_err("twisted-core/group-associativity", "Heisenberg group law", worst, 1.0, 1e-12)]

    return items + [assoc]


# ---------------------------------------------------------------- Fock

# interior points away from the origin, where the ladder residuals are relative
INTERIOR_POINTS = np.array(
    [
        [0.3 + 0.2j, -0.5 + 0.4j],
        [0.6 - 0.3j, 0.1 + 0.5j],
        [1.0 - 0.5j, 0.2 + 0.6j],
        [-0.8 + 0.3j, 0.5 - 0.7j],
        [0.4 + 1.1j, -1.0 - 0.2j],
    ]
)


def _fock_items(cfg, cache):
    base = cfg.base()
    items = []
    for lam in cfg.lambda_list:
        def isometry(lam=lam):
            f = gaussian_mixture(base, cfg.seed + 11)
            F = fock.bargmann_transform(lam, f)
            err = abs(fock.fock_norm(F) ** 2 - f.norm() ** 2)
            return [check_err(f"fock/isometry/{_lam_tag(lam)}", "Bargmann transform is unitary", err, f.norm() ** 2, cfg.tol("isometry", 1e-5))]

        def heat(lam=lam):
            t = TwistParameter(lam, cfg.n)
            p = twist.heat_kernel_field(t, 0.5, base)
            z = fock.CALIBRATION_POINTS
            v, ok = fock.bargmann_points(t, p, z)
            return [check_err(f"fock/b-heat-kernel/{_lam_tag(lam)}", "B p_1/2 = c_lambda", float(np.abs(v[ok] - t.c_lam).max()), t.c_lam, 1e-8)]

        items += [isometry, heat]

    lam0 = cfg.lambda_list[0]

    def reproducing():
        f = fock.calibration_signal(base) if cfg.n == 1 else gaussian_mixture(base, cfg.seed)
        f = SampledField(base, f.values * np.exp(0.1j))
        F = fock.bargmann_transform(lam0, f)
        z = INTERIOR_POINTS
        lhs, _ = fock.bargmann_points(lam0, f, z)
        rhs = fock.reproduce(F, z)
        res = float(np.max(np.abs(lhs - rhs) / np.abs(lhs)))
        return [check_err(f"fock/reproducing/{_lam_tag(lam0)}", "reproducing kernel", res, 1.0, cfg.tol("reproducing", 1e-4))]

    def ladder():
        f = gaussian_mixture(base, cfg.seed + 12)
        z = INTERIOR_POINTS
        rz, rw = fock.ladder_identity_residuals(lam0, f, z)
        return [
            check_err(f"fock/ladder-P/{_lam_tag(lam0)}", "ladder operator lemma", float(rz.max()), 1.0, cfg.tol("ladder", 1e-4)),
            check_err(f"fock/ladder-Q/{_lam_tag(lam0)}", "ladder operator lemma", float(rw.max()), 1.0, cfg.tol("ladder", 1e-4)),
        ]

    return items + [reproducing, ladder]


# ---------------------------------------------------------------- twisted modulation spaces


def _modspace_items(cfg, cache):
    base = cfg.base()
    items = []
    for lam in cfg.lambda_list:
        def plancherel(lam=lam):
            t = TwistParameter(lam, cfg.n)
            target = (2 * math.pi) ** (2 * cfg.n) / t.lam_over_sinh ** (2 * cfg.n)
            worst = 0.0
            for k in range(2):
                f = gaussian_mixture(base, cfg.seed + 20 + 2 * k)
                g = gaussian_mixture(base, cfg.seed + 21 + 2 * k)
                V = modspace.twisted_stft(t, f, g).field
                r = V.inner(V).real / (f.norm() ** 2 * g.norm() ** 2)
                worst = max(worst, abs(r / target - 1))
            return [check_err(f"modspace-twisted/plancherel/{_lam_tag(lam)}", "square integrability of Pi_lambda", worst, 1.0, cfg.tol("plancherel", 1e-3))]

        def inversion(lam=lam):
            t = TwistParameter(lam, cfg.n)
            f = gaussian_mixture(base, cfg.seed + 30)
            g = twist.heat_kernel_field(t, 0.5, base)
            V = modspace.twisted_stft(t, f, g).field
            back = modspace.twisted_stft_adjoint(t, V, g).values
            c = np.vdot(f.values, back) / np.vdot(f.values, f.values)
            expect = registry.get("d_orth_measured", cfg.n) * g.norm() ** 2 / t.c_lam**2
            err = float(np.abs(back - c * f.values).max() / np.abs(c * f.values).max())
            return [
                check_err(f"modspace-twisted/inversion-shape/{_lam_tag(lam)}", "inversion formula", err, 1.0, cfg.tol("inversion", 1e-3)),
                check_err(f"modspace-twisted/inversion-constant/{_lam_tag(lam)}", "inversion formula", abs(c / expect - 1), 1.0, cfg.tol("inversion", 1e-3)),
            ]

        def fast_direct(lam=lam):
            f = gaussian_mixture(base, cfg.seed + 31)
            g = gaussian_mixture(base, cfg.seed + 32)
            pg = modspace.default_phase_grid(base, half_width=3.0)
            a = modspace.twisted_stft(lam, f, g, pg, "fast").values
            b = modspace.twisted_stft(lam, f, g, pg, "direct").values
            return [check_err(f"modspace-twisted/stft-fast-direct/{_lam_tag(lam)}", "twisted STFT", float(np.abs(a - b).max()), np.abs(b).max(), 1e-6)]

        def inclusion(lam=lam):
            t = TwistParameter(lam, cfg.n)
            f = gaussian_mixture(base, cfg.seed + 33)
            g = twist.heat_kernel_field(t, 0.5, base)
            out = []
            for p1, q1 in cfg.pq_list:
                for p2, q2 in cfg.pq_list:
                    if (p1, q1) == (p2, q2) or p1 > p2 or q1 > q2:
                        continue
                    r = modspace.inclusion_check(t, f, g, (p1, q1), (p2, q2))
                    out.append(check_le(f"modspace-twisted/inclusion/{_lam_tag(lam)}/{r['spec']}", "lambda inclusion estimate", r["lhs"], r["rhs"], 1e-3))
            return out

        def young(lam=lam):
            out = []
            for p in (1.0, 1.5, 2.0):
                f = gaussian_mixture(base, cfg.seed + 40)
                g = gaussian_mixture(base, cfg.seed + 41)
                r = modspace.twisted_young_check(lam, f, g, p, constant="interpolated")
                out.append(check_le(f"modspace-twisted/young-interpolated/{_lam_tag(lam)}/p={p:g}", "twisted Young inequality", r["lhs"], r["rhs"], 1e-3))
            return out

        def pointwise(lam=lam):
            t = TwistParameter(lam, cfg.n)
            pg = modspace.default_phase_grid(base, half_width=4.0)
            F = random_phase_field(pg, cfg.seed + 42)
            g = gaussian_mixture(base, cfg.seed + 43)
            lhs, rhs = modspace.synthesis_analysis_bound(t, F, g, twist.heat_kernel_field(t, 0.5, base))
            i = int(np.argmax(lhs / rhs))
            return [check_le(f"modspace-twisted/synthesis-pointwise/{_lam_tag(lam)}", "pointwise synthesis-analysis bound", lhs.flat[i], rhs.flat[i], 1e-3)]

        def algebra(lam=lam):
            f = gaussian_mixture(base, cfg.seed + 44)
            g = gaussian_mixture(base, cfg.seed + 45)
            out = []
            for p in (1.0, 2.0):
                r = modspace.twisted_algebra_check(lam, f, g, p)
                out.append(check_le(f"modspace-twisted/algebra/{_lam_tag(lam)}/p={p:g}", "Banach algebra theorem", r["lhs"], r["rhs"], 1e-3))
            return out

        items += [plancherel, inversion, fast_direct, inclusion, young, pointwise, algebra]
    return items


# ---------------------------------------------------------------- Heisenberg


def _heisenberg_items(cfg, cache):
    base, tg = cfg.base(), cfg.t_grid()

    def fixture(k):
        return cache.get(("hfix", k), lambda: heisenberg_mixture(base, tg, cfg.seed + 100 + k))

    def V(k):
        def make():
            f = fixture(k)
            lat = cache.get("hlat", lambda: heisenberg.heisenberg_lattice(heisenberg.central_inverse_ft(fixture(0))))
            return heisenberg.v_transform(f, lat)

        return cache.get(("V", k), make)

    def central():
        X, U = base.mesh()
        g = np.exp(-((X - 0.3) ** 2 + U**2) / 2)
        f = heisenberg.HeisenbergField.from_function(base, tg, lambda x, u, t: np.exp(-((x - 0.3) ** 2 + u**2) / 2 - t**2 / 2))
        st = heisenberg.central_inverse_ft(f)
        ref = np.stack([g * math.sqrt(2 * math.pi) * math.exp(-lam**2 / 2) for lam in st.lams])
        back = heisenberg.central_ft(st)
        return [
            check_err("heisenberg/central-ft-gaussian", "central Fourier transform", float(np.abs(st.slices - ref).max()), 1.0, 1e-8),
            check_err("heisenberg/central-ft-roundtrip", "central Fourier transform", float(np.abs(back.values - f.values).max()), 1.0, 1e-10),
        ]

    def translation():
        f = fixture(0)
        xi, s = np.array([0.6, -0.4]), 0.5
        T = heisenberg.big_pi_apply(xi, s, f)
        ref = heisenberg_mixture(base, tg, cfg.seed + 100, shift=(xi, s)).values
        err = float(np.abs(T.values - ref).max())
        z = np.array([0.3 - 0.2j, -0.1 + 0.4j])
        P = heisenberg.big_pi_apply(z, -0.7, f)
        return [
            check_err("heisenberg/pi-left-translation", "Pi(xi, s) is the left translation", err, np.abs(ref).max(), 1e-6),
            check_err("heisenberg/pi-isometry", "Pi(zeta, s) is unitary", abs(P.norm() - f.norm()), f.norm(), 1e-6),
        ]

    def u_tilde():
        f = fixture(1)
        Uf = heisenberg.u_tilde_apply(f)
        eta, s = np.array([0.5, 0.3]), 0.2
        e = heisenberg.heisenberg_modulate(eta, s, f)
        e2 = heisenberg.u_tilde_apply(heisenberg.big_pi_apply(eta, s, heisenberg.u_tilde_adjoint(f)))
        return [
            check_err("heisenberg/u-tilde-unitary", "U~ is unitary", abs(Uf.norm() - f.norm()), f.norm(), 1e-5),
            check_err("heisenberg/modulation-intertwining", "U~ tau(g) U~* = e(g)", float(np.abs(e.values - e2.values).max()), np.abs(e.values).max(), 1e-5),
        ]

    def t_mult():
        tg1 = BoxGrid(64, 4 * math.pi)
        f = heisenberg.HeisenbergField.from_function(base, tg1, lambda x, u, t: np.exp(-(x**2 + u**2) / 2 - t**2 / 8))
        st = heisenberg.central_inverse_ft(heisenberg.t_multiplier_apply(f))
        st0 = heisenberg.central_inverse_ft(f)
        k = int(np.argmin(np.abs(st.lams - 1.0)))
        i = tuple(m // 2 for m in base.shape)
        r = abs(st.slices[k][i] / st0.slices[k][i])
        ref = math.sqrt(TwistParameter(st.lams[k], cfg.n).c_lam)
        return [check_err("heisenberg/t-multiplier", "T multiplier sqrt(c_lambda)", abs(r - ref), ref, 1e-10)]

    def kmass():
        return [
            check_err(f"heisenberg/k-mass/{_lam_tag(lam)}", "K_lambda integrates to one", abs(heisenberg.k_lambda_mass(lam, cfg.n, "quadrature") - 1), 1.0, 1e-5)
            for lam in cfg.lambda_list
        ]

    def plancherel():
        rs = [V(k).l2_mass() / fixture(k).norm() ** 2 for k in range(2)]
        spread = (max(rs) - min(rs)) / np.mean(rs)
        return [check_err("heisenberg/plancherel-constancy", "Plancherel for the modified matrix coefficients", spread, 1.0, cfg.tol("h_plancherel", 1e-3))]

    def fundamental():
        Vf = V(0)
        VU = heisenberg.v_transform(heisenberg.u_tilde_apply(fixture(0)), Vf.lattice)
        R = Vf.rotate(1)
        ok = VU.valid & R.valid
        err = float(np.abs(VU.values - R.values)[ok].max())
        return [check_err("heisenberg/fundamental-identity", "V(U f)(zeta, s) = V f(-i zeta, s)", err, np.abs(Vf.values).max(), cfg.tol("fundamental", 1e-4))]

    def norms():
        out = []
        Vf, Vg = V(0), V(1)
        m22 = heisenberg.m_pq_heisenberg_norm(Vf, (2, 2))
        out.append(check_err("heisenberg/m1-equals-m22", "Fubini for the (2,2) norm", abs(heisenberg.m1_norm(Vf, (2, 2)) - m22), m22, 1e-6))
        for p1, q1 in cfg.pq_list:
            for p2, q2 in cfg.pq_list:
                if (p1, q1) == (p2, q2) or p1 > p2 or q1 > q2:
                    continue
                r = heisenberg.heisenberg_inclusion_check(Vf, (p1, q1), (p2, q2))
                out.append(check_le(f"heisenberg/inclusion/{r['spec']}", "inclusion theorem on H^n", r["lhs"], r["rhs"], 1e-3))
        for p, q in cfg.pq_list:
            r = heisenberg.dual_bracket(Vf, Vg, (p, q))
            out.append(check_le(f"heisenberg/dual-bracket/{r['spec']}", "duality bracket Hoelder bound", r["lhs"], r["rhs"], 1e-3))
        return out

    def bh():
        Vf = V(0)
        lat = Vf.lattice
        c = lat.shape[0] // 2
        ax = lat.axis(0)
        zs = [np.zeros(2, dtype=complex), np.array([ax[c + 1] + 1j * ax[c - 1], ax[c] + 1j * ax[c + 2]])]
        r = heisenberg.bargmann_identity_ratio(Vf, zs)
        spread = float(np.ptp(r["ratio"]) / np.mean(r["ratio"]))
        return [
            check_err("heisenberg/bh-identity", "Bargmann identity for B_H", spread, 1.0, 1e-3),
            check_le("heisenberg/bh-pointwise", "pointwise estimate for B_H", r["pointwise_C"], math.sqrt(math.pi), 1e-9),
        ]

    return [central, translation, u_tilde, t_mult, kmass, plancherel, fundamental, norms, bh]


_BUILDERS = {
    "constants": _constants_items,
    "twisted-core": _twisted_core_items,
    "fock": _fock_items,
    "modspace-twisted": _modspace_items,
    "heisenberg": _heisenberg_items,
}


def build_items(cfg, suite):
    if suite not in SUITES:
        raise ConfigError(f"suite: unknown suite {suite!r} (choose from {', '.join(SUITES)})")
    cache = _Cache()
    names = [s for s in SUITES if s != "all"] if suite == "all" else [suite]
    return [it for s in names for it in _BUILDERS[s](cfg, cache)]


def run_items(items, threads=1):
    """Run items (in parallel when ``threads > 1``) and return records in item order."""
    if threads <= 1:
        results = [it() for it in items]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda it: it(), items))
    return [r for rs in results for r in rs]
