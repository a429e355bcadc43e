"""Batch experiment runner: `etachain run`, `etachain verify`, `etachain list-experiments`.

Configs are YAML (nested key-value); unknown keys are rejected; CLI flags
override file values and the fully resolved config is echoed into
manifest.json. CSV payloads are byte-stable for fixed config + seed (full
double precision, scientific notation, fixed column order); the only
timestamp lives in the manifest.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .disorder import KINDS, DisorderSpec
from .evolve import EvolutionConfig
from .experiments import (
    EXPERIMENTS,
    run_clean_dynamics,
    run_disorder_sweep,
    run_finite_size,
    run_projected_spectrum,
    run_symmetry_suite,
    run_toy_qubit,
)
from .fock import LatticeSpec
from .model_ops import HamiltonianParams, JumpChannel, ModelSpec, clean_model

OUTPUT_ROOT_ENV = "ETACHAIN_OUTPUT_ROOT"

_MODEL_KEYS = {"n_sites", "boundary", "t", "u", "gamma", "theta", "driven_sites"}
_EVOLUTION_KEYS = {"t_final", "n_out", "rtol", "atol", "method"}
_DISORDER_KEYS = {"kind", "widths", "width", "n_realizations", "r", "t_chunk", "t_max", "plateau_tol"}
_OPTION_KEYS = {"driven_sets", "sizes", "theta", "gamma", "n_sites"}
_TOP_KEYS = {
    "experiment", "seed", "output_dir", "workers", "model", "evolution",
    "disorder", "options", "deviation_budget", "notes",
}


class ConfigError(ValueError):
    pass


def _require_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def load_config(path_or_name: str) -> dict:
    """Load a config file, or resolve a bare experiment name to defaults."""
    p = Path(path_or_name)
    if p.suffix in (".yaml", ".yml", ".json") or p.exists():
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        with open(p) as fh:
            raw = yaml.safe_load(fh)
        if not isinstance(raw, dict):
            raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
        return raw
    if path_or_name in EXPERIMENTS:
        return {"experiment": path_or_name}
    raise ConfigError(f"{path_or_name!r} is neither a config file nor a known experiment name")


def validate_config(raw: dict) -> dict:
    """Strict validation + defaults; returns the fully resolved config dict."""
    _require_keys(raw, _TOP_KEYS, "config")
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")

    cfg = {
        "experiment": exp,
        "seed": int(raw.get("seed", 1234)),
        "workers": int(raw.get("workers", 1)),
        "notes": raw.get("notes"),
        "deviation_budget": raw.get("deviation_budget"),
    }

    model = dict(raw.get("model") or {})
    _require_keys(model, _MODEL_KEYS, "model")
    cfg["model"] = {
        "n_sites": int(model.get("n_sites", 4)),
        "boundary": str(model.get("boundary", "obc")),
        "t": float(model.get("t", 1.0)),
        "u": float(model.get("u", 8.0)),
        "gamma": float(model.get("gamma", 1.0)),
        "theta": float(model.get("theta", math.pi / 2)),
        "driven_sites": [int(j) for j in model.get("driven_sites", [1])],
    }
    if cfg["model"]["boundary"] not in ("obc", "pbc"):
        raise ConfigError("model.boundary must be 'obc' or 'pbc'")

    evo = dict(raw.get("evolution") or {})
    _require_keys(evo, _EVOLUTION_KEYS, "evolution")
    cfg["evolution"] = {
        "t_final": float(evo.get("t_final", 60.0)),
        "n_out": int(evo.get("n_out", 61)),
        "rtol": float(evo.get("rtol", 1e-8)),
        "atol": float(evo.get("atol", 1e-10)),
        "method": str(evo.get("method", "adaptive_rk")),
    }

    opts = dict(raw.get("options") or {})
    _require_keys(opts, _OPTION_KEYS, f"options ({exp})")
    cfg["options"] = opts

    dis = raw.get("disorder")
    if exp == "disorder_sweep":
        if not dis:
            raise ConfigError("disorder_sweep needs a 'disorder' section")
        dis = dict(dis)
        _require_keys(dis, _DISORDER_KEYS, "disorder")
        kind = dis.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"disorder.kind must be one of {KINDS}, got {kind!r}")
        widths = dis.get("widths", [dis.get("width", 0.0)])
        cfg["disorder"] = {
            "kind": kind,
            "widths": [float(w) for w in widths],
            "n_realizations": int(dis.get("n_realizations", 100)),
            "r": int(dis.get("r", max(1, cfg["model"]["n_sites"] // 2))),
            "t_chunk": float(dis.get("t_chunk", 10.0)),
            "t_max": float(dis.get("t_max", 150.0)),
            "plateau_tol": float(dis.get("plateau_tol", 1e-3)),
        }
    elif dis:
        raise ConfigError(f"'disorder' section is only valid for disorder_sweep, not {exp}")

    # instantiate eagerly so invalid values fail before any output is written
    _build_model(cfg)
    _evolution_config(cfg)
    return cfg


def _build_model(cfg: dict) -> ModelSpec:
    m = cfg["model"]
    return clean_model(
        m["n_sites"], m["boundary"], m["t"], m["u"],
        tuple(m["driven_sites"]), m["theta"], m["gamma"],
    )


def _evolution_config(cfg: dict) -> EvolutionConfig:
    e = cfg["evolution"]
    return EvolutionConfig(
        t_final=e["t_final"], n_out=e["n_out"], rtol=e["rtol"], atol=e["atol"],
        method=e["method"],
    )


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17e}"


def write_series_csv(path: Path, series, extra_rows=None) -> None:
    with open(path, "w") as fh:
        fh.write("time,index,observable,real,imag,abs\n")
        for t, index, name, value in series.rows():
            fh.write(
                f"{_fmt(t)},{index},{name},{_fmt(value.real)},{_fmt(value.imag)},{_fmt(abs(value))}\n"
            )
        for t, index, name, value in extra_rows or []:
            fh.write(
                f"{_fmt(t)},{index},{name},{_fmt(value.real)},{_fmt(value.imag)},{_fmt(abs(value))}\n"
            )


def write_sweep_csv(path: Path, sweep) -> None:
    with open(path, "w") as fh:
        fh.write("width,estimator,mean,se,n_ok,n_failed\n")
        for row in sweep.rows:
            fh.write(
                f"{_fmt(row.width)},abs_Phi_m,{_fmt(row.phi_mean)},{_fmt(row.phi_se)},{row.n_ok},{row.n_failed}\n"
            )
            fh.write(
                f"{_fmt(row.width)},abs_C_m_r{sweep.r_half},{_fmt(row.corr_mean)},{_fmt(row.corr_se)},{row.n_ok},{row.n_failed}\n"
            )


def write_realizations_csv(path: Path, sweep) -> None:
    with open(path, "w") as fh:
        fh.write("width,index,seed_key,phi_sum_real,phi_sum_imag,corr_sum_real,corr_sum_imag,converged,failed,error\n")
        for rec in sweep.records:
            seed = "-".join(str(s) for s in rec.seed_key)
            err = (rec.error or "").replace(",", ";")
            fh.write(
                f"{_fmt(rec.width)},{rec.index},{seed},{_fmt(complex(rec.phi_sum).real)},"
                f"{_fmt(complex(rec.phi_sum).imag)},{_fmt(complex(rec.corr_sum).real)},"
                f"{_fmt(complex(rec.corr_sum).imag)},{int(rec.converged)},{int(rec.failed)},{err}\n"
            )


def _json_default(obj):
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    return str(obj)


def write_manifest(path: Path, cfg: dict, report: dict, wall_time: float, outputs: list) -> None:
    manifest = {
        "config": cfg,
        "report": report,
        "library_version": __version__,
        "wall_time_s": wall_time,
        "outputs": outputs,
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _resolve_output_dir(cfg: dict, cli_output: str | None) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    if cli_output:
        out = Path(cli_output)
    elif cfg.get("output_dir"):
        out = Path(cfg["output_dir"])
    else:
        out = Path(cfg["experiment"])
    return out if out.is_absolute() else root / out


def run_experiment(cfg: dict, output_dir: Path) -> dict:
    exp = cfg["experiment"]
    model_cfg = cfg["model"]
    evo = _evolution_config(cfg)
    opts = cfg["options"]
    t0 = time.time()

    if exp == "toy_qubit":
        theta = float(opts.get("theta", model_cfg["theta"]))
        out = run_toy_qubit(theta, model_cfg["gamma"], evo)
    elif exp == "clean_dynamics":
        driven_sets = opts.get("driven_sets") or [model_cfg["driven_sites"]]
        base = _build_model(cfg)
        out = run_clean_dynamics(base, driven_sets, evo, model_cfg["gamma"], model_cfg["theta"])
    elif exp == "finite_size":
        sizes = [int(n) for n in opts.get("sizes", [2, 3, 4, 5])]
        out = run_finite_size(
            sizes, model_cfg["boundary"], model_cfg["t"], model_cfg["u"],
            model_cfg["theta"], model_cfg["gamma"], evo,
            driven_sites=tuple(model_cfg["driven_sites"]),
        )
    elif exp == "projected_spectrum":
        n = int(opts.get("n_sites", model_cfg["n_sites"]))
        driven_sets = opts.get("driven_sets") or [model_cfg["driven_sites"]]
        out = run_projected_spectrum(n, driven_sets, model_cfg["gamma"])
    elif exp == "disorder_sweep":
        dcfg = cfg["disorder"]
        base = _build_model(cfg)
        spec = DisorderSpec(
            kind=dcfg["kind"], n_realizations=dcfg["n_realizations"], seed=cfg["seed"],
            sweep_grid=tuple(dcfg["widths"]),
        )
        out = run_disorder_sweep(
            base, spec, dcfg["r"], cfg["workers"], dcfg["t_chunk"], dcfg["t_max"],
            dcfg["plateau_tol"],
        )
    elif exp == "symmetry_suite":
        checks = run_symmetry_suite(n_max=int(opts.get("n_sites", 4)),
                                    boundary=model_cfg["boundary"],
                                    t=model_cfg["t"], u=model_cfg["u"])
        out = {"report": {"checks": checks}}
    else:  # unreachable after validation
        raise ConfigError(f"unhandled experiment {exp}")

    wall = time.time() - t0
    output_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    if "series" in out:
        series_path = output_dir / "series.csv"
        write_series_csv(series_path, out["series"], extra_rows=out.get("rows"))
        outputs.append(series_path.name)
    if "sweep" in out:
        sweep_path = output_dir / "sweep.csv"
        write_sweep_csv(sweep_path, out["sweep"])
        outputs.append(sweep_path.name)
        real_path = output_dir / "realizations.csv"
        write_realizations_csv(real_path, out["sweep"])
        outputs.append(real_path.name)
    report = out.get("report", {})
    write_manifest(output_dir / "manifest.json", cfg, report, wall, outputs)
    return report


def cmd_run(args) -> int:
    try:
        raw = load_config(args.config)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.theta is not None:
            raw.setdefault("options", {})["theta"] = args.theta
            raw.setdefault("model", {})["theta"] = args.theta
        for item in args.set or []:
            key, _, value = item.partition("=")
            if not _apply_override(raw, key.split("."), value):
                raise ConfigError(f"--set target not recognized: {key}")
        cfg = validate_config(raw)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    output_dir = _resolve_output_dir({**cfg, "output_dir": raw.get("output_dir")}, args.output)
    try:
        report = run_experiment(cfg, output_dir)
    except Exception as exc:
        record = {"error": "runtime", "type": type(exc).__name__, "message": str(exc)}
        try:
            output_dir.mkdir(parents=True, exist_ok=True)
            with open(output_dir / "error.json", "w") as fh:
                json.dump(record, fh, indent=2)
        except OSError:
            pass
        print(json.dumps(record), file=sys.stderr)
        return 3
    print(f"{cfg['experiment']}: wrote {output_dir}")
    for key in ("steady_state_fidelity", "n_failed_total"):
        if key in report:
            print(f"  {key} = {report[key]}")
    return 0


def _apply_override(raw: dict, keys: list, value: str) -> bool:
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            return False
    node[keys[-1]] = yaml.safe_load(value)
    return True


VERIFY_SUITES = ("algebra", "appendixA", "appendixC", "consistency")


def cmd_verify(args) -> int:
    from . import verify as verify_mod

    suite = args.suite
    checks = verify_mod.run_suite(suite, n_max=args.n_max)
    failed = 0
    for name, (violation, tolerance) in sorted(checks.items()):
        ok = violation <= tolerance
        failed += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'}  {name}: max violation {violation:.3e} (tol {tolerance:.1e})")
    print(f"{suite}: {len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def cmd_list(_args) -> int:
    for name in EXPERIMENTS:
        print(name)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="etachain",
                                     description="Dissipative eta-pairing chain simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file or by name")
    p_run.add_argument("config", help="path to a YAML config, or a built-in experiment name")
    p_run.add_argument("--output", help="output directory (default: $ETACHAIN_OUTPUT_ROOT/<name>)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--theta", type=float, default=None, help="rotation angle override")
    p_run.add_argument("--set", action="append", metavar="dotted.key=value",
                       help="override any config entry")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run an invariant verification suite")
    p_verify.add_argument("suite", choices=VERIFY_SUITES)
    p_verify.add_argument("--n-max", type=int, default=4)
    p_verify.set_defaults(func=cmd_verify)

    p_list = sub.add_parser("list-experiments", help="list available experiments")
    p_list.set_defaults(func=cmd_list)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
