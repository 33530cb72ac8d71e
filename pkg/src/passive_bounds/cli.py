"""Batch front-end: ``passive-bounds <command> --config run.toml --out results/``.

Every run writes ``report.json`` (schema ``passive-bounds/1``) to the output
directory plus command-specific CSV files. Exit codes: 0 when every check
passes, 1 when a check fails, 2 on configuration or I/O errors.

Config keys (flat TOML, all optional unless noted)
--------------------------------------------------
passivity-check
    ``model`` (required), ``band`` (required), ``n_samples``, ``tol``.
sum-rule
    ``model``, ``band`` (required), ``measure`` (``dirac:<xi>``,
    ``uniform:<Delta>`` or ``scan:<Delta>``; ``--measure`` overrides),
    ``y_seq``, ``quad_tol``, ``n_grid``, ``tol``.
bound-check
    ``model``, ``band`` (required), ``checks`` (subset of ``transparency``,
    ``level_set``, ``max``, ``kk``), ``Delta``, ``n_grid``, ``kk_range``,
    ``kk_samples``, ``kk_interior``, ``kk_tol``, ``tol``.
cloak-demo
    ``a``, ``b``, ``eps_core``, ``shell`` (model table), ``eps0``,
    ``bracket``, ``band``, ``omega0``, ``E0``, ``n_grid``, ``scene``,
    ``fd_tol``, ``tol``.
polarizability
    ``scene`` (required: path or table), ``omegas``, ``smoothing``,
    ``structure_tol``, ``tol``.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
import warnings
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import bounds, dispersion, herglotz
from .dispersion import FrequencyBand, Tabulated, model_from_dict
from .errors import (
    BracketError,
    ConfigError,
    DomainError,
    GridTooCoarseError,
    LoadError,
    PassiveBoundsError,
    PreconditionError,
    QualityError,
    SolverError,
)
from .herglotz import Measure
from .quasistatic import CoatedSphereResponse, ScalarProjection, assemble_alpha, scene_from_dict
from .quasistatic.analytic import coated_sphere_alpha, design_cloak_frequency
from .quasistatic.scene import load_scene
from .reports import SCHEMA_VERSION, BoundReport, SumRuleReport, csv_text, dumps_report

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

COMMANDS = ("passivity-check", "sum-rule", "bound-check", "cloak-demo", "polarizability")
BOUND_CHECKS = ("transparency", "level_set", "max", "kk")

CLOAK_DEFAULTS = {
    "a": 0.5,
    "b": 1.0,
    "eps_core": 3.0,
    "eps0": 1.0,
    "shell": {"type": "drude", "f_inf": 1.0, "omega_p": 1.0, "gamma": 0.0},
    "bracket": [2.0, 3.5],
    "band": [2.0, 3.5],
    "E0": [0.0, 0.0, 1.0],
    "n_grid": 512,
}


class _Run:
    """Collects reports and CSV outputs of one command."""

    def __init__(self, command, config):
        self.command = command
        self.config = config
        self.reports = []
        self.files = {}
        self.error = None

    def add(self, report):
        self.reports.append(report)
        return report

    @property
    def passed(self):
        return all(r.passed for r in self.reports)


# --------------------------------------------------------------------------
# config helpers
# --------------------------------------------------------------------------

def _read_config(path):
    if path is None:
        return {}, None
    p = Path(path)
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh), p.parent
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {p}: {exc}") from exc


def _need(cfg, key):
    if key not in cfg:
        raise ConfigError(f"config is missing required key {key!r}")
    return cfg[key]


def _band(cfg, key="band"):
    val = _need(cfg, key)
    if not isinstance(val, (list, tuple)) or len(val) != 2:
        raise ConfigError(f"{key} must be [omega_minus, omega_plus]")
    try:
        return FrequencyBand(float(val[0]), float(val[1]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {key}: {exc}") from exc


def _positive(cfg, key, default):
    val = cfg.get(key, default)
    try:
        val = float(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number") from exc
    if not val > 0:
        raise ConfigError(f"{key} must be positive, got {val}")
    return val


def _model(cfg, base_dir, key="model"):
    """Model from the config; tabulated data is loaded leniently so passivity is reported, not raised."""
    spec = _need(cfg, key)
    if isinstance(spec, dict) and spec.get("type") == "tabulated":
        spec = dict(spec, strict=False)
    try:
        return model_from_dict(spec, base_dir)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def parse_measure(text):
    """``dirac:<xi>``, ``uniform:<Delta>`` or ``scan:<Delta>`` as ``(kind, value)``."""
    if not isinstance(text, str) or ":" not in text:
        raise ConfigError(f"measure must look like 'dirac:<xi>', 'uniform:<Delta>' or 'scan:<Delta>', got {text!r}")
    kind, _, num = text.partition(":")
    kind = kind.strip().lower()
    if kind not in ("dirac", "uniform", "scan"):
        raise ConfigError(f"unknown measure kind {kind!r}")
    try:
        val = float(num)
    except ValueError as exc:
        raise ConfigError(f"measure parameter {num!r} is not a number") from exc
    if not math.isfinite(val) or (kind != "dirac" and not val > 0):
        raise ConfigError(f"measure parameter for {kind} must be finite{' and positive' if kind != 'dirac' else ''}")
    return kind, val


def _gate_passivity(run, model, band, tol):
    """Passivity gate run before any bound; a failure stops the command."""
    rep = run.add(dispersion.check_passivity(model, band, tol=tol))
    return rep.passed


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_passivity_check(run, cfg, base_dir, args):
    model = _model(cfg, base_dir)
    band = _band(cfg)
    tol = _positive(cfg, "tol", dispersion.DEFAULT_TOL)
    n = int(cfg.get("n_samples", 1024))
    run.add(dispersion.check_passivity(model, band, n_samples=n, tol=tol))
    w = np.linspace(band.omega_minus, band.omega_plus, 64)
    if isinstance(model, Tabulated):
        z = w + 0j
    else:
        # off the axis so lossless poles in the band do not interfere
        z = np.concatenate([w + 0.1j, w + 1.0j])
    run.add(dispersion.check_symmetry(model, z, tol=tol))


def cmd_sum_rule(run, cfg, base_dir, args):
    model = _model(cfg, base_dir)
    band = _band(cfg)
    tol = _positive(cfg, "tol", 1e-6)
    kind, val = parse_measure(args.measure if args.measure is not None else _need(cfg, "measure"))
    quad_tol = _positive(cfg, "quad_tol", 1e-10)
    y_seq = cfg.get("y_seq", herglotz.DEFAULT_Y_SEQ)
    if not _gate_passivity(run, model, band, dispersion.DEFAULT_TOL):
        return
    extras = {}
    if kind == "scan":
        n_grid = int(cfg.get("n_grid", 512))
        xi, _ = herglotz.dirac_sup_scan(model, band, val, n_grid=n_grid, y_seq=y_seq, quad_tol=quad_tol)
        m = Measure.dirac(xi)
        extras = {"xi_star": xi, "Delta": val, "n_grid": n_grid}
    elif kind == "dirac":
        m = Measure.dirac(val)
    else:
        m = Measure.uniform(val)
    rep = herglotz.sum_rule_integral(model, m, band, y_seq=y_seq, quad_tol=quad_tol, tol=tol)
    rep.extras.update(extras)
    run.add(rep)
    rows = list(zip(rep.y_sequence_used, rep.per_y_values))
    run.files["per_y.csv"] = csv_text(["y", "value"], rows)


def _kk_report(model, cfg, band, tol):
    lo, hi = (float(v) for v in cfg.get("kk_range", [1e-2, 1e2]))
    n = int(cfg.get("kk_samples", 2000))
    frac = float(cfg.get("kk_interior", 0.8))
    kk_tol = _positive(cfg, "kk_tol", 1e-3)
    w = np.geomspace(lo, hi, n)
    fw = model.eval(w + 0j)
    k0 = int(round(n * (1 - frac) / 2))
    wi = w[k0:n - k0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        re_kk, tails = bounds.kk_real_part(w, fw.imag, model.f_inf, wi, full_output=True)
    re_f = fw.real[k0:n - k0]
    err = np.abs(re_kk - re_f) / (1.0 + np.abs(re_f))
    k = int(np.argmax(err))
    return BoundReport(
        name="kramers_kronig",
        band=FrequencyBand(float(wi[0]), float(wi[-1])),
        lhs=float(err[k]),
        rhs=kk_tol,
        tol=0.0,
        witnesses=[(float(wi[k]), float(re_kk[k]))],
        notes="max |Re f_kk - Re f| / (1 + |Re f|) on the interior grid",
        extras={"max_tail_bound": float(np.max(tails)), "n_samples": n, "interior_fraction": frac},
    )


def cmd_bound_check(run, cfg, base_dir, args):
    model = _model(cfg, base_dir)
    band = _band(cfg)
    tol = _positive(cfg, "tol", 1e-9)
    default = ["transparency"] if model.lossless else ["level_set", "max"]
    checks = cfg.get("checks", default)
    bad = [c for c in checks if c not in BOUND_CHECKS]
    if bad:
        raise ConfigError(f"unknown checks {bad}; expected a subset of {BOUND_CHECKS}")
    if not _gate_passivity(run, model, band, dispersion.DEFAULT_TOL):
        return
    for name in checks:
        if name == "transparency":
            try:
                run.add(bounds.transparency_bound(model, band, n_grid=int(cfg.get("n_grid", 1024)), tol=tol))
            except PreconditionError as exc:
                run.add(BoundReport("transparency_precondition", band, 1.0, 0.0, 0.0, notes=str(exc)))
        elif name == "level_set":
            delta = _positive(cfg, "Delta", 1.0)
            run.add(bounds.lossy_level_set_bound(model, band, delta, tol=tol))
        elif name == "max":
            for r in bounds.lossy_max_bound(model, band, tol=tol):
                run.add(r)
        else:
            run.add(_kk_report(model, cfg, band, tol))
    rows = []
    for rep in run.reports:
        for r in _flatten(rep):
            rows += [(r.name, w, v if not isinstance(v, complex) else abs(v)) for w, v in r.witnesses]
    run.files["witnesses.csv"] = csv_text(["check", "omega", "value"], rows)


def _flatten(rep):
    yield rep
    for c in getattr(rep, "children", []):
        yield from _flatten(c)


def _material(val, base_dir):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    try:
        return model_from_dict(val, base_dir)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def _scene(val, base_dir):
    if isinstance(val, str):
        p = Path(val)
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        return load_scene(p)
    if isinstance(val, dict):
        return scene_from_dict(val, base_dir)
    raise ConfigError("scene must be a file path or a table")


def cmd_cloak_demo(run, cfg, base_dir, args):
    c = dict(CLOAK_DEFAULTS, **cfg)
    a, b, eps0 = float(c["a"]), float(c["b"]), _positive(c, "eps0", 1.0)
    core = _material(c["eps_core"], base_dir)
    shell = _material(c["shell"], base_dir)
    band = _band(c)
    tol = _positive(c, "tol", 1e-8)
    scene = _scene(c["scene"], base_dir) if "scene" in c else None
    if scene is not None:
        scene.check_resolution()
    if "omega0" in cfg:
        omega0 = _positive(cfg, "omega0", 1.0)
        designed = False
    else:
        try:
            omega0 = design_cloak_frequency(a, b, core, shell, eps0, c["bracket"])
        except BracketError as exc:
            raise ConfigError(str(exc)) from exc
        designed = True
    resp = CoatedSphereResponse(a, b, core, shell, eps0)
    E0 = np.asarray(c["E0"], dtype=float)
    env, curve = bounds.cloaking_envelope(resp, E0, band, omega0, n_grid=int(c["n_grid"]), tol=tol)
    f_inf = float(env.extras["f_inf"])
    f0 = abs(complex(coated_sphere_alpha(a, b, core, shell, eps0, omega0))) * float(E0 @ E0)
    run.add(BoundReport(
        name="cloak_zero",
        band=band,
        lhs=f0 / f_inf,
        rhs=1e-10,
        tol=0.0,
        witnesses=[(omega0, f0)],
        notes="|f(omega0)| / f_inf from the closed form",
        extras={"omega0": omega0, "designed": designed, "in_band": band.contains(omega0)},
    ))
    run.add(env)
    if scene is not None:
        fd_tol = _positive(c, "fd_tol", 0.05)
        alpha = assemble_alpha(scene, omega0)
        ainf = np.asarray(resp.alpha_inf)
        ratio = float(np.max(np.abs(alpha)) / np.max(np.abs(ainf)))
        run.add(BoundReport(
            name="fd_cloak_residual",
            band=band,
            lhs=ratio,
            rhs=fd_tol,
            tol=0.0,
            witnesses=[(omega0, ratio)],
            notes="max |alpha_fd(omega0)| / max |alpha_inf| on the scene grid",
            extras={"grid_n": scene.grid_n, "alpha": alpha},
        ))
    run.files["envelope.csv"] = csv_text(["omega", "f", "envelope_lo", "envelope_hi"], curve)


def _structure(alpha, tol):
    diag = np.abs(np.diag(alpha))
    scale = max(float(np.max(diag)), 1e-300)
    off = float(np.max(np.abs(alpha - np.diag(np.diag(alpha))))) / scale
    spread = float(np.max(np.abs(np.diag(alpha) - alpha[0, 0]))) / scale
    if off <= tol and spread <= tol:
        return "scalar_identity", off, spread
    if off <= tol:
        return "diagonal", off, spread
    return "full", off, spread


def cmd_polarizability(run, cfg, base_dir, args):
    scene = _scene(_need(cfg, "scene"), base_dir)
    scene.check_resolution()
    omegas = [float(w) for w in cfg.get("omegas", [0.0])]
    smoothing = cfg.get("smoothing", "subpixel")
    if smoothing not in ("subpixel", "staircase"):
        raise ConfigError(f"smoothing must be 'subpixel' or 'staircase', got {smoothing!r}")
    stol = _positive(cfg, "structure_tol", 1e-6)
    tol = _positive(cfg, "tol", 1e-6)
    header = ["omega"] + [f"a{i}{j}_{p}" for i in "xyz" for j in "xyz" for p in ("re", "im")]
    header += ["symmetry_deviation", "max_monopole_ratio", "structure"]
    rows = []
    for w in omegas:
        try:
            alpha, diag = assemble_alpha(scene, w, smoothing=smoothing, full_output=True)
        except (QualityError, SolverError) as exc:
            run.add(BoundReport("polarizability_quality", None, 1.0, 0.0, 0.0, witnesses=[(w, 0.0)],
                                notes=str(exc)))
            continue
        kind, off, spread = _structure(alpha, stol)
        run.add(BoundReport(
            name="alpha_symmetry",
            band=None,
            lhs=diag["symmetry_deviation"],
            rhs=0.0,
            tol=tol,
            witnesses=[(w, diag["symmetry_deviation"])],
            notes=f"||alpha - alpha^T|| / ||alpha||; structure {kind}",
            extras={"omega": w, "alpha": alpha, "structure": kind, "offdiag_rel": off, "diag_spread_rel": spread,
                    "monopole_ratios": diag["monopole_ratios"], "loss_offset": diag["delta"],
                    "iterations": diag["iterations"], "grid_n": scene.grid_n, "smoothing": smoothing},
        ))
        vals = [w]
        for i in range(3):
            for j in range(3):
                vals += [float(alpha[i, j].real), float(alpha[i, j].imag)]
        rows.append(vals + [diag["symmetry_deviation"], max(diag["monopole_ratios"]), kind])
    run.files["alpha.csv"] = csv_text(header, rows)


HANDLERS = {
    "passivity-check": cmd_passivity_check,
    "sum-rule": cmd_sum_rule,
    "bound-check": cmd_bound_check,
    "cloak-demo": cmd_cloak_demo,
    "polarizability": cmd_polarizability,
}


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _payload(run, code):
    return {
        "schema": SCHEMA_VERSION,
        "command": run.command,
        "exit_code": code,
        "status": {0: "pass", 1: "fail", 2: "error"}[code],
        "error": run.error,
        "config": run.config,
        "reports": [r.to_dict() for r in run.reports],
        "files": sorted(run.files),
    }


def _prepare_out(out):
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="passive-bounds", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--threads", type=int, default=0, help="BLAS/OpenMP threads, 0 = library default")
    p.add_argument("--tol", type=float, help="override the config tolerance")
    p.add_argument("--measure", help="sum-rule measure: dirac:<xi> | uniform:<Delta> | scan:<Delta>")
    return p


def run_command(argv=None):
    """Run one command; returns ``(exit_code, payload)``."""
    args = build_parser().parse_args(argv)
    run = _Run(args.command, {})
    out = None
    code = 2
    try:
        out = _prepare_out(args.out)
        if args.config is None and args.command != "cloak-demo":
            raise ConfigError(f"{args.command} needs --config")
        cfg, base_dir = _read_config(args.config)
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("--tol must be positive")
            cfg["tol"] = args.tol
        run.config = cfg
        limits = threadpool_limits(args.threads) if args.threads > 0 else contextlib.nullcontext()
        with limits:
            HANDLERS[args.command](run, cfg, base_dir, args)
        code = 0 if run.passed else 1
    except (ConfigError, LoadError, DomainError, GridTooCoarseError, OSError) as exc:
        run.error = f"{type(exc).__name__}: {exc}"
        code = 2
    except PassiveBoundsError as exc:
        run.error = f"{type(exc).__name__}: {exc}"
        code = 1
    payload = _payload(run, code)
    if out is not None:
        try:
            (out / "report.json").write_text(dumps_report(payload), encoding="utf-8")
            for name, text in run.files.items():
                (out / name).write_text(text, encoding="utf-8")
        except OSError as exc:
            code = 2
            payload.update(error=f"OSError: {exc}", exit_code=code, status="error")
    return code, payload


def main(argv=None):
    code, payload = run_command(argv)
    for rep in payload["reports"]:
        print(f"{rep['name']:<28} {'PASS' if rep['pass'] else 'FAIL'}  slack={rep['slack']}")
    if payload["error"]:
        print(f"error: {payload['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
