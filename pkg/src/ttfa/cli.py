"""``ttfa`` command line: verification suites and field transforms.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or input
error, 3 I/O error.  ``TTFA_THREADS`` caps the number of suite items run in
parallel.
"""

import csv
import datetime
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, heisenberg, modspace, suites
from .grid import (
    GridError,
    MixedNormSpec,
    PhaseField,
    load_field,
    load_phase_field,
    mixed_norm_lpq,
    save_field,
    save_phase_field,
)
from .fock import bargmann_transform
from .kernels import backend
from .twist import TwistParameter, heat_kernel_field

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _die(msg, code):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _threads():
    raw = os.environ.get("TTFA_THREADS", "1")
    try:
        t = int(raw)
    except ValueError:
        _die(f"TTFA_THREADS: expected an integer, got {raw!r}", EXIT_CONFIG)
    if t < 1:
        _die(f"TTFA_THREADS: must be at least 1, got {t}", EXIT_CONFIG)
    return t


def load_config(path=None, lambdas=(), pqs=(), out=None, seed=None):
    """Defaults, then the JSON file, then command-line overrides."""
    d = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise OSError(f"cannot read config {path}: {e.strerror}") from e
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise suites.ConfigError(f"config: invalid JSON ({e})") from e
        if not isinstance(d, dict):
            raise suites.ConfigError("config: top level must be an object")
    if lambdas:
        d["lambda_list"] = list(lambdas)
    if pqs:
        d["pq_list"] = list(pqs)
    if out is not None:
        d["out_dir"] = out
    if seed is not None:
        d["seed"] = seed
    try:
        return suites.SuiteConfig.from_dict(d)
    except TypeError as e:
        raise suites.ConfigError(f"config: {e}") from e


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def _finite(x):
    # JSON has no inf; keep the sentinel readable
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def write_report(cfg, suite, records, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    recs = [{k: (_finite(v) if isinstance(v, float) else v) for k, v in r.items()} for r in records]
    doc = {
        "suite": suite,
        "version": __version__,
        "backend": backend(),
        "config": cfg.to_dict(),
        "n_checks": len(recs),
        "n_pass": sum(r["pass"] for r in recs),
        "records": recs,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    jp = out / f"report-{suite}.json"
    jp.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    cp = out / f"summary-{suite}.csv"
    cols = ["id", "paper_ref", "kind", "lhs", "rhs", "ratio", "tol", "pass"]
    with open(cp, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        for r in records:
            w.writerow({k: (repr(r[k]) if isinstance(r[k], float) else r[k]) for k in cols})
    return jp, cp


def _print_table(records):
    width = max((len(r["id"]) for r in records), default=10)
    for r in records:
        mark = "PASS" if r["pass"] else "FAIL"
        click.echo(f"{mark}  {r['id']:<{width}}  lhs={r['lhs']:.4e}  rhs={r['rhs']:.4e}  ratio={r['ratio']:.4g}")


@click.group()
@click.version_option(__version__)
def main():
    """Twisted time-frequency analysis: verification suites and transforms."""


@main.command()
@click.argument("suite")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config file.")
@click.option("--lambda", "lambdas", type=float, multiple=True, help="Twist parameter (repeatable).")
@click.option("--pq", "pqs", multiple=True, help="Exponent pair p,q (repeatable).")
@click.option("--out", "out", type=click.Path(file_okay=False), help="Report directory.")
@click.option("--seed", type=int, help="Fixture seed.")
@click.option("--quiet", is_flag=True, help="Only print the summary line.")
def verify(suite, config_path, lambdas, pqs, out, seed, quiet):
    """Run a verification SUITE and write JSON and CSV reports."""
    try:
        cfg = load_config(config_path, lambdas, pqs, out, seed)
        items = suites.build_items(cfg, suite)
    except suites.ConfigError as e:
        _die(str(e), EXIT_CONFIG)
    except OSError as e:
        _die(str(e), EXIT_IO)
    records = suites.run_items(items, _threads())
    try:
        jp, cp = write_report(cfg, suite, records, cfg.out_dir)
    except OSError as e:
        _die(f"cannot write report to {cfg.out_dir}: {e.strerror or e}", EXIT_IO)
    if not quiet:
        _print_table(records)
    n_fail = sum(not r["pass"] for r in records)
    click.echo(f"{suite}: {len(records) - n_fail}/{len(records)} checks pass; report {jp}, summary {cp}")
    sys.exit(EXIT_FAIL if n_fail else EXIT_OK)


# ---------------------------------------------------------------- transform

OPS = ("identity", "twisted_stft", "bargmann", "v_transform", "norms")


def _load_any(path):
    """Sampled field, phase field, Lambda stack or V stack, by manifest."""
    p = Path(path)
    if p.is_dir():
        if (p / "vstack.json").exists():
            return "vstack", heisenberg.load_vstack(p)
        if (p / "stack.json").exists():
            return "stack", heisenberg.load_stack(p)
        raise GridError(f"{path}: directory holds no stack manifest")
    if not p.exists():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        kind = json.loads(p.read_text()).get("kind")
    except json.JSONDecodeError as e:
        raise GridError(f"{path}: manifest is not valid JSON ({e})") from e
    if kind == "phase":
        return "phase", load_phase_field(p)[0]
    return "field", load_field(p)


def _window(lam, f, window_path):
    if window_path is None:
        return heat_kernel_field(lam, 0.5, f.grid)
    g = load_field(window_path)
    if g.grid != f.grid:
        raise GridError("window and signal live on different grids")
    return g


def _phase_grid(f, lam, half_width, stride):
    if half_width is None and stride == 2:
        return None
    return modspace.default_phase_grid(f.grid, lam, half_width, stride)


def _norms(kind, obj, lam, specs, window_path, half_width, stride):
    out = {"input": kind, "norms": {}}
    if kind == "field":
        if lam is None:
            raise GridError("norms of a sampled field need --lambda")
        g = _window(lam, obj, window_path)
        V = modspace.twisted_stft(lam, obj, g, _phase_grid(obj, lam, half_width, stride)).field
        out["lambda"] = lam
        out["l2"] = obj.norm()
    elif kind == "phase":
        V = obj
    else:
        V = obj if kind == "vstack" else heisenberg.v_transform(obj)
        for s in specs:
            out["norms"][str(s)] = heisenberg.m_pq_heisenberg_norm(V, s)
        out["l2_mass"] = V.l2_mass()
        return out
    for s in specs:
        out["norms"][str(s)] = mixed_norm_lpq(V, s)
    return out


@main.command()
@click.argument("op", type=click.Choice(OPS))
@click.option("--in", "in_path", required=True, help="Input manifest (file) or stack directory.")
@click.option("--out", "out_path", help="Output manifest or directory (optional for norms).")
@click.option("--lambda", "lam", type=float, help="Twist parameter.")
@click.option("--window", "window_path", help="Window field manifest (default: heat kernel p_1/2).")
@click.option("--pq", "pqs", multiple=True, help="Exponent pair p,q for norms (repeatable).")
@click.option("--half-width", type=float, help="Phase lattice half-width.")
@click.option("--stride", type=int, default=2, show_default=True, help="Phase lattice stride in base points.")
@click.option("--mode", type=click.Choice(["fast", "direct"]), default="fast", show_default=True)
def transform(op, in_path, out_path, lam, window_path, pqs, half_width, stride, mode):
    """Apply OP to a stored field and write the result."""
    if op != "norms" and out_path is None:
        _die("--out is required for this op", EXIT_CONFIG)
    try:
        specs = [MixedNormSpec.parse(s) for s in (pqs or ("2,2",))]
        if lam is not None and lam == 0:
            raise GridError("--lambda must be nonzero")
        kind, obj = _load_any(in_path)
        result = None
        if op == "identity":
            if kind == "field":
                save_field(obj, out_path)
            elif kind == "phase":
                _, meta = load_phase_field(in_path)
                save_phase_field(obj, out_path, meta)
            elif kind == "stack":
                heisenberg.save_stack(obj, out_path)
            else:
                heisenberg.save_vstack(obj, out_path)
        elif op in ("twisted_stft", "bargmann"):
            if kind != "field":
                raise GridError(f"{op} needs a sampled field on R^2n, got a {kind}")
            if lam is None:
                raise GridError(f"{op} needs --lambda")
            t = TwistParameter(lam, obj.grid.dim // 2)
            pg = _phase_grid(obj, t, half_width, stride)
            if op == "twisted_stft":
                V = modspace.twisted_stft(t, obj, _window(t, obj, window_path), pg, mode).field
                save_phase_field(V, out_path, {"op": op, "lambda": lam})
            else:
                F = bargmann_transform(t, obj, pg, mode)
                vals = np.where(F.valid, F.scaled, np.nan + 0j)
                meta = {"op": op, "lambda": lam, "quantity": "B f sqrt(w), NaN where invalid"}
                save_phase_field(PhaseField(F.lattice, F.lattice, vals), out_path, meta)
        elif op == "v_transform":
            if kind != "stack":
                raise GridError(f"v_transform needs a Lambda stack directory, got a {kind}")
            heisenberg.save_vstack(heisenberg.v_transform(obj, mode=mode), out_path)
        else:
            result = _norms(kind, obj, lam, specs, window_path, half_width, stride)
    except (FileNotFoundError, PermissionError, IsADirectoryError) as e:
        _die(str(e), EXIT_IO)
    except OSError as e:
        _die(f"{e.strerror or e}: {e.filename or ''}", EXIT_IO)
    except (GridError, ValueError, KeyError) as e:
        _die(str(e), EXIT_CONFIG)
    if result is not None:
        text = json.dumps(result, indent=2, sort_keys=True, default=_json_default)
        click.echo(text)
        if out_path:
            try:
                Path(out_path).write_text(text + "\n")
            except OSError as e:
                _die(f"cannot write {out_path}: {e.strerror}", EXIT_IO)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
