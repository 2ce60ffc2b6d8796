"""Command-line entry point.

    rydberg-cd presets list
    rydberg-cd pulse    --preset fig2 --out-dir out/ [--points 2000] [--format csv|json]
    rydberg-cd gate     --preset fig2
    rydberg-cd bell     --preset fig4
    rydberg-cd sweep    --preset fig3b --jobs 4
    rydberg-cd optimize --preset optimize_fig2

Outputs go to ``--out-dir`` (default: ``$RYDBERG_CD_OUT_DIR`` or ``./out``)
together with a ``manifest.json`` that echoes the resolved config; passing
that manifest back as ``--config`` repeats the run.  Failures
exit non-zero and print a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, load_protocol, optimizer_from_dict, preset_names, sweep_from_dict
from .gate import prepare_bell, run_cz
from .pulsegen import export_profiles, sample_sequence

OUT_DIR_ENV = "RYDBERG_CD_OUT_DIR"


class InvariantViolation(RuntimeError):
    pass


def _out_dir(args) -> Path:
    out = args.out_dir or os.environ.get(OUT_DIR_ENV) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args):
    cfg, raw = load_protocol(args.config, args.preset)
    if args.tol is not None:
        cfg = replace(cfg, rtol=args.tol, atol=args.tol * 1e-2)
        # keep the echoed config sufficient for an exact re-run
        raw = dict(raw)
        raw["integrator"] = {**(raw.get("integrator") or {}), "rtol": cfg.rtol, "atol": cfg.atol}
    return cfg, raw


def _write_manifest(out: Path, command: str, raw: dict, cfg, outputs: list, start: float, extra=None):
    manifest = {
        "command": command,
        "artifact_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": raw,
        "tolerances": {"rtol": cfg.rtol, "atol": cfg.atol} if cfg is not None else None,
        "integrator": {
            "method": "DOP853",
            "n_samples": cfg.n_samples if cfg is not None else None,
            "commutator_sign": cfg.commutator_sign if cfg is not None else None,
        },
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_clock_s": time.perf_counter() - start,
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, default=str))
    return path


def cmd_pulse(args):
    start = time.perf_counter()
    cfg, raw = _load(args)
    if cfg.pulse is None:
        raise ConfigError("pulse", "this config has no analytic pulse to export")
    if args.points < 2:
        raise ConfigError("--points", "need at least 2 points per pulse")
    out = _out_dir(args)
    samples = sample_sequence(cfg.pulse, args.points)
    written = export_profiles(samples, out, args.format)
    _write_manifest(out, "pulse", raw, cfg, written, start, {"points_per_pulse": args.points})
    print(json.dumps({"outputs": [str(p) for p in written]}))
    return 0


def _check_gate(run):
    p = run.phases
    if p["00"] != 0.0 and abs(p["00"]) > 1e-12:
        raise InvariantViolation(f"|00> acquired phase {p['00']}")
    if run.mode == "pure" and abs(np.exp(1j * p["01"]) - np.exp(1j * p["10"])) > 1e-6:
        raise InvariantViolation(f"asymmetric phases phi01={p['01']} phi10={p['10']}")


def cmd_gate(args):
    start = time.perf_counter()
    cfg, raw = _load(args)
    out = _out_dir(args)
    run = run_cz(cfg)
    report = run.to_dict()
    path = out / "gate.json"
    path.write_text(json.dumps(report, indent=2))
    _write_manifest(out, "gate", raw, cfg, [path], start)
    print(json.dumps({"phases_rad": report["phases_rad"], "cz_conditional_phase_rad": report["cz_conditional_phase_rad"]}))
    _check_gate(run)
    return 0


def cmd_bell(args):
    start = time.perf_counter()
    cfg, raw = _load(args)
    out = _out_dir(args)
    score = prepare_bell(cfg)
    path = out / "bell.json"
    path.write_text(json.dumps(score.to_dict(), indent=2))
    _write_manifest(out, "bell", raw, cfg, [path], start)
    print(f"F = {score.fidelity:.6f} (uncorrected {score.fidelity_uncorrected:.6f}, mode {score.mode})")
    if not -1e-9 <= score.fidelity <= 1 + 1e-6:
        raise InvariantViolation(f"Bell fidelity {score.fidelity} outside [0, 1]")
    return 0


def cmd_sweep(args):
    from .sweep import run_sweep

    start = time.perf_counter()
    cfg, raw = _load(args)
    spec = sweep_from_dict(raw, cfg, jobs=args.jobs)
    out = _out_dir(args)
    result = run_sweep(spec)
    result.metadata.update({"preset": args.preset, "rtol": cfg.rtol, "atol": cfg.atol})
    written = []
    if args.format == "csv":
        written.append(result.to_csv(out / "sweep.csv"))
    else:
        path = out / "sweep.json"
        result.to_json(path)
        written.append(path)
    if len(spec.axes) == 2:
        written.append(result.write_grid(out / "sweep_grid.csv"))
    _write_manifest(out, "sweep", raw, cfg, written, start, {"failed_points": sum(bool(e) for e in result.errors)})
    for row in result.rows():
        print(" ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row[:-1]), row[-1])
    return 1 if any(result.errors) else 0


def cmd_optimize(args):
    from .sweep import optimize

    start = time.perf_counter()
    cfg, raw = _load(args)
    spec = optimizer_from_dict(raw, cfg)
    out = _out_dir(args)
    res = optimize(spec)
    path = out / "optimize.json"
    path.write_text(json.dumps(res.to_dict(), indent=2))
    _write_manifest(out, "optimize", raw, cfg, [path], start)
    print(json.dumps({"best": res.best, "best_value": res.best_value, "n_evals": res.n_evals, "converged": res.converged}))
    return 0


def cmd_presets(args):
    for name in preset_names():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydberg-cd", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="YAML config file")
        p.add_argument("--preset", help="named preset (see `presets`)")
        p.add_argument("--out-dir", help=f"output directory (env {OUT_DIR_ENV})")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--tol", type=float, help="integrator rtol (atol = rtol/100)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        return p

    common(sub.add_parser("pulse", help="export Omega0, Omega_CD and delta profiles")).add_argument(
        "--points", type=int, default=2000, help="samples per pulse"
    )
    common(sub.add_parser("gate", help="run the CZ pulse sequence on the logical inputs"))
    common(sub.add_parser("bell", help="prepare and score the Bell state"))
    common(sub.add_parser("sweep", help="run a parameter scan"))
    common(sub.add_parser("optimize", help="local Nelder-Mead pulse refinement"))
    sub.add_parser("presets", help="list shipped presets").add_argument("action", nargs="?", choices=("list",), default="list")
    return parser


COMMANDS = {
    "pulse": cmd_pulse,
    "gate": cmd_gate,
    "bell": cmd_bell,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "presets": cmd_presets,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            err["field"] = exc.field
        print(json.dumps(err), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
