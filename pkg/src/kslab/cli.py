"""Command-line orchestration.

One JSON config document drives every subcommand; its sections mirror
the library's dataclasses, every field is optional with the defaults
below, unknown keys are rejected, and the effective (merged) config is
echoed into the output directory so a run can be reproduced from its
artifacts alone.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 failed
certificate in ``verify-bounds``.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from .duhamel import PicardConfig, picard_solve
from .errors import KslabError, ValidationError
from .experiments import (
    ScanSpec,
    estimate_kappa,
    pe_limit_study,
    selfsimilar_check,
    tau_scaling_study,
)
from .grid import GridSpec, default_box_length, write_ksf1, zero_spectral
from .initdata import InitSpec, make
from .models import CoupledState, SystemSpec
from .stepper import StepperConfig, run

DEFAULT_CONFIG: dict = {
    "grid": {
        "d": 2,
        "n": 64,
        "box_length": None,  # None: dimension default (20 pi, 8 pi, 4 pi)
        "dealias_fraction": 2.0 / 3.0,
    },
    "system": {"model": "PP", "tau": 1.0, "alpha": 0.0},
    "init": {"family": "Gaussian", "amplitude": 1.0, "width": 1.0, "seed": 0},
    "stepper": {
        "dt_init": 1e-3,
        "dt_min": 1e-12,
        "dt_max": 0.25,
        "safety": 0.8,
        "rtol": 1e-4,
        "atol": 1e-12,
        "blowup_threshold": 1e8,
        "t_end": 1.0,
        "snapshot_times": [],
        "dump_fields": False,
    },
    "norms": {
        "pm_exponents": None,
        "lp_exponents": None,
        "ep_exponents": None,
        "morrey": True,
    },
    "experiment": {
        "tau_list": [math.exp(3), math.exp(4), math.exp(5), math.exp(6)],
        "m_lo": 0.25,
        "m_hi": 2048.0,
        "bisect_tol": 0.02,
        "t_end": 60.0,
        "replicates": 1,
        "law": "TauOverLogCubed",
        "window": [0.3, 0.6],
        "selfsim_m": 1.5,
        "selfsim_tau": math.exp(4),
        "heat_only": False,
        "pe_tau_list": [1.0, 0.3, 0.1, 0.03, 0.01],
        "kappa_family": "Gaussian",
        "kappa_width": 3.0,
        "kappa_rel_tol": 0.1,
        "picard": {
            "max_iters": 30,
            "t_min": 1e-3,
            "t_max": 1e2,
            "points": 32,
            "a": None,
            "conv_tol": 1e-8,
            "substeps": 4,
        },
    },
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ValidationError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def _parse_override(text: str) -> tuple[list[str], object]:
    if "=" not in text:
        raise ValidationError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def _apply_override(cfg: dict, path: list[str], value) -> None:
    node = cfg
    for part in path[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ValidationError(f"unknown config key {'.'.join(path)!r}")
        node = node[part]
    if path[-1] not in node:
        raise ValidationError(f"unknown config key {'.'.join(path)!r}")
    node[path[-1]] = value


def load_config(path: str | None, overrides: list[str], seed: int | None) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        if not isinstance(user, dict):
            raise ValidationError("config root must be a JSON object")
        cfg = _merge(cfg, user)
    for text in overrides or []:
        key, value = _parse_override(text)
        _apply_override(cfg, key, value)
    if seed is not None:
        cfg["init"]["seed"] = seed
    return cfg


def build_grid(cfg: dict) -> GridSpec:
    g = cfg["grid"]
    box = g["box_length"]
    if box is None:
        box = default_box_length(int(g["d"]))
    return GridSpec(
        d=int(g["d"]),
        n=int(g["n"]),
        box_length=float(box),
        dealias_fraction=float(g["dealias_fraction"]),
    )


def build_system(cfg: dict) -> SystemSpec:
    s = cfg["system"]
    return SystemSpec(
        model=s["model"], d=int(cfg["grid"]["d"]), tau=float(s["tau"]), alpha=float(s["alpha"])
    )


def build_init(cfg: dict) -> InitSpec:
    i = cfg["init"]
    return InitSpec(
        family=i["family"],
        amplitude=float(i["amplitude"]),
        width=float(i["width"]),
        seed=int(i["seed"]),
    )


def build_stepper(cfg: dict, out_dir: str | None) -> StepperConfig:
    s = cfg["stepper"]
    n = cfg["norms"]
    snapshot_dir = None
    if s["dump_fields"] and out_dir is not None:
        snapshot_dir = os.path.join(out_dir, "fields")
    to_tuple = lambda v: None if v is None else tuple(float(x) for x in v)
    return StepperConfig(
        dt_init=float(s["dt_init"]),
        dt_min=float(s["dt_min"]),
        dt_max=float(s["dt_max"]),
        safety=float(s["safety"]),
        rtol=float(s["rtol"]),
        atol=float(s["atol"]),
        blowup_threshold=float(s["blowup_threshold"]),
        t_end=float(s["t_end"]),
        snapshot_times=tuple(float(t) for t in s["snapshot_times"]),
        pm_exponents=to_tuple(n["pm_exponents"]),
        lp_exponents=to_tuple(n["lp_exponents"]),
        ep_exponents=to_tuple(n["ep_exponents"]),
        morrey=bool(n["morrey"]),
        snapshot_dir=snapshot_dir,
    )


def build_picard(cfg: dict) -> PicardConfig:
    p = cfg["experiment"]["picard"]
    t_grid = tuple(
        float(t)
        for t in np.geomspace(float(p["t_min"]), float(p["t_max"]), int(p["points"]))
    )
    return PicardConfig(
        max_iters=int(p["max_iters"]),
        t_grid=t_grid,
        a=None if p["a"] is None else float(p["a"]),
        conv_tol=float(p["conv_tol"]),
        substeps=int(p["substeps"]),
    )


def _out_dir(args) -> str:
    out = args.out or os.environ.get("KSLAB_OUT") or "kslab-out"
    os.makedirs(out, exist_ok=True)
    return out


def _echo_config(cfg: dict, out: str) -> None:
    with open(os.path.join(out, "effective_config.json"), "w") as fh:
        json.dump(cfg, fh, indent=2, default=float)


def _initial_state(cfg: dict, grid: GridSpec, system: SystemSpec) -> CoupledState:
    u0 = make(build_init(cfg), grid)
    phi0 = zero_spectral(grid) if system.model in ("PP", "TM", "TM2") else None
    return CoupledState(u0, phi0, 0.0)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(cfg: dict, args) -> int:
    out = _out_dir(args)
    _echo_config(cfg, out)
    grid = build_grid(cfg)
    system = build_system(cfg)
    stepper = build_stepper(cfg, out)
    summary = run(_initial_state(cfg, grid, system), system, stepper)
    rows = [rep.csv_row() for _, rep in summary.norm_series]
    header = summary.norm_series[0][1].csv_header() if summary.norm_series else "time"
    with open(os.path.join(out, "norms.csv"), "w") as fh:
        fh.write(header + "\n")
        fh.write("\n".join(rows) + ("\n" if rows else ""))
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(
            {
                "outcome": summary.outcome,
                "t_final": summary.t_final,
                "blowup_time": summary.blowup_time,
                "steps": summary.steps,
            },
            fh,
        )
    print(f"outcome={summary.outcome} t_final={summary.t_final}")
    return 0


def cmd_picard(cfg: dict, args) -> int:
    out = _out_dir(args)
    _echo_config(cfg, out)
    grid = build_grid(cfg)
    system = build_system(cfg)
    u0 = make(build_init(cfg), grid)
    phi0 = zero_spectral(grid)
    report = picard_solve(u0, phi0, system, build_picard(cfg))
    with open(os.path.join(out, "picard.json"), "w") as fh:
        fh.write(report.to_json())
    fields_dir = os.path.join(out, "picard_fields")
    os.makedirs(fields_dir, exist_ok=True)
    for i, F in enumerate(report.final):
        write_ksf1(F, os.path.join(fields_dir, f"u_{i:04d}.ksf1"))
    print(f"converged={report.converged} iters={report.iters}")
    return 0


def cmd_verify_bounds(cfg: dict, args) -> int:
    out = _out_dir(args)
    _echo_config(cfg, out)
    certs = []

    # closed Gamma formula against the convolution quadrature oracle
    worst = 0.0
    points = 0
    for d in (2, 3):
        alphas, betas = bounds_mod.admissible_riesz_sample(d, 8, seed=10 + d)
        for a, b in zip(alphas, betas):
            c1 = bounds_mod.riesz_constant(a, b, d)
            c2 = bounds_mod.riesz_convolution_oracle(a, b, d)
            worst = max(worst, abs(c2 - c1) / c1)
            points += 1
    certs.append(
        bounds_mod.BoundCertificate(
            lemma_id="riesz-constant-vs-quadrature",
            samples=points,
            worst_ratio=1.0 + worst,
            tol=1e-3,
            details={"worst_rel_err": worst},
        )
    )

    alphas, betas = bounds_mod.admissible_riesz_sample(3, 400, seed=5)
    certs.append(bounds_mod.riesz_bound_check(alphas, betas, 3))

    rng = np.random.default_rng(int(cfg["init"]["seed"]))
    worst_cert = None
    for _ in range(400):
        cert = bounds_mod.integral_lemma_check(
            float(rng.uniform(1e-3, 10.0)),
            float(rng.uniform(1e-3, 100.0)),
            float(rng.uniform(1e-2, 3.0)),
            float(rng.uniform(0.0, 1.0)),
        )
        if worst_cert is None or cert.worst_ratio > worst_cert.worst_ratio:
            worst_cert = cert
    worst_cert.samples = 400
    certs.append(worst_cert)

    # cubic blowup rate of the bilinear coefficient
    bs = np.array([0.02, 0.01, 0.005])
    slopes = {}
    for d in (2, 3):
        ks = np.array([bounds_mod.bilinear_K(d - 4 * b / 3, b, d) for b in bs])
        slopes[d] = float(np.polyfit(np.log(bs), np.log(ks), 1)[0])
    dev = max(abs(s + 3.0) for s in slopes.values())
    certs.append(
        bounds_mod.BoundCertificate(
            lemma_id="bilinear-coefficient-cubic-rate",
            samples=2 * len(bs),
            worst_ratio=1.0 + dev / 0.1,
            tol=1.0,
            details={"slopes": slopes},
        )
    )

    # heat constant stays below one on its admissible range
    worst_hc = 0.0
    for d in (2, 3, 4):
        for a in np.linspace(d - 2, d - 1e-9, 64):
            worst_hc = max(worst_hc, bounds_mod.heat_constant(float(a), d))
    certs.append(
        bounds_mod.BoundCertificate(
            lemma_id="heat-constant-bound",
            samples=3 * 64,
            worst_ratio=worst_hc,
            tol=1e-12,
            details={},
        )
    )

    # monotonicity of the Besov-threshold scale in the relaxation time
    taus = np.geomspace(0.25, 64.0, 9)
    worst_mono = 0.0
    pairs = 0
    for (p, q, d) in ((2.0, 3.5, 3), (3.0, 3.0, 2), (4.0, 5.0, 3), (2.5, 4.0, 2)):
        vals = [bounds_mod.besov_threshold(p, q, d, float(t)) for t in taus]
        for a, b in zip(vals, vals[1:]):
            worst_mono = max(worst_mono, a / b)
            pairs += 1
    certs.append(
        bounds_mod.BoundCertificate(
            lemma_id="besov-threshold-monotone-in-tau",
            samples=pairs,
            worst_ratio=worst_mono,
            tol=0.0,
            details={},
        )
    )

    payload = [json.loads(c.to_json()) for c in certs]
    with open(os.path.join(out, "bound_certificates.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
    for cert in certs:
        print(f"{cert.lemma_id}: {'passed' if cert.passed else 'FAILED'}")
    return 0 if all(c.passed for c in certs) else 3


def cmd_scan(cfg: dict, args) -> int:
    out = _out_dir(args)
    _echo_config(cfg, out)
    e = cfg["experiment"]
    scan = ScanSpec(
        spec_base=build_system(cfg),
        init=build_init(cfg),
        grid=build_grid(cfg),
        tau_list=tuple(float(t) for t in e["tau_list"]),
        m_bracket=(float(e["m_lo"]), float(e["m_hi"])),
        bisect_tol=float(e["bisect_tol"]),
        t_end=float(e["t_end"]),
        replicates=int(e["replicates"]),
        rtol=float(cfg["stepper"]["rtol"]),
        dt_max=float(cfg["stepper"]["dt_max"]),
        blowup_threshold=float(cfg["stepper"]["blowup_threshold"]),
        threads=args.threads,
    )
    result = tau_scaling_study(scan, e["law"])
    with open(os.path.join(out, "scan.csv"), "w") as fh:
        fh.write(result.to_csv())
    with open(os.path.join(out, "scan.json"), "w") as fh:
        fh.write(result.to_json())
    print(f"monotone={result.monotone} fit={result.fit}")
    return 0


def cmd_selfsim(cfg: dict, args) -> int:
    out = _out_dir(args)
    _echo_config(cfg, out)
    e = cfg["experiment"]
    dev = selfsimilar_check(
        float(e["selfsim_tau"]),
        float(e["selfsim_m"]),
        int(cfg["grid"]["d"]),
        (float(e["window"][0]), float(e["window"][1])),
        grid=build_grid(cfg),
        heat_only=bool(e["heat_only"]),
        rtol=float(cfg["stepper"]["rtol"]),
        dt_max=float(cfg["stepper"]["dt_max"]),
    )
    with open(os.path.join(out, "selfsim.json"), "w") as fh:
        json.dump(
            {
                "deviation": dev,
                "tau": e["selfsim_tau"],
                "amplitude": e["selfsim_m"],
                "window": e["window"],
                "heat_only": e["heat_only"],
            },
            fh,
        )
    print(f"deviation={dev:.6g}")
    return 0


def cmd_pe_limit(cfg: dict, args) -> int:
    out = _out_dir(args)
    _echo_config(cfg, out)
    grid = build_grid(cfg)
    from .grid import dealias

    u0 = dealias(make(build_init(cfg), grid))
    e = cfg["experiment"]
    result = pe_limit_study(
        [float(t) for t in e["pe_tau_list"]],
        u0,
        int(cfg["grid"]["d"]),
        t_end=float(cfg["stepper"]["t_end"]),
        rtol=float(cfg["stepper"]["rtol"]),
        dt_max=float(cfg["stepper"]["dt_max"]),
    )
    with open(os.path.join(out, "pe_limit.json"), "w") as fh:
        json.dump(
            {"rows": result.rows, "non_increasing": result.non_increasing}, fh
        )
    for tau, dev in result.rows:
        print(f"tau={tau:g} deviation={dev:.6g}")
    return 0


def cmd_estimate_kappa(cfg: dict, args) -> int:
    out = _out_dir(args)
    _echo_config(cfg, out)
    e = cfg["experiment"]
    grid = build_grid(cfg)
    d = int(cfg["grid"]["d"])
    kappa, kappa_tilde = estimate_kappa(
        d,
        grid,
        family=e["kappa_family"],
        width=float(e["kappa_width"]),
        rel_tol=float(e["kappa_rel_tol"]),
    )
    table = dict(bounds_mod.DEFAULT_KAPPA)
    table[d] = {"kappa_hat": kappa, "kappa_tilde_hat": kappa_tilde}
    bounds_mod.save_kappa(os.path.join(out, "kappa.json"), table)
    print(f"kappa_hat={kappa:.6g} kappa_tilde_hat={kappa_tilde:.6g} [{bounds_mod.KAPPA_LABEL}]")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "picard": cmd_picard,
    "verify-bounds": cmd_verify_bounds,
    "scan": cmd_scan,
    "selfsim": cmd_selfsim,
    "pe-limit": cmd_pe_limit,
    "estimate-kappa": cmd_estimate_kappa,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kslab", description="Pseudospectral chemotaxis laboratory"
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="JSON config path")
    parser.add_argument("--out", default=None, help="output directory (or KSLAB_OUT)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument(
        "--threads", type=int, default=os.cpu_count() or 1, help="experiment worker pool"
    )
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-path config override (repeatable)",
    )
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config, args.override, args.seed)
        return COMMANDS[args.command](cfg, args)
    except (ValidationError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except KslabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
