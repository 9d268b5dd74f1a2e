"""Command-line front end: config loading, scenario runs, CSV emission.

Configuration is a YAML file with nested keys (see the shipped presets
for the full grammar).  Flags override config values; environment
variables with the OBLATESIM_ prefix mirror the flags (e.g.
OBLATESIM_SEED overrides --seed).  Exit codes: 0 success, 1 inadmissible
deformation law, 2 malformed config or I/O failure.
"""
from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .core import EllipsoidParams, a_squared_from_c
from .deformation import (DeformationLaw, ToyModelParams, toy_law,
                          check_deterministic_admissible,
                          check_stochastic_admissible)
from .experiments import (DAY, EnsembleConfig, convergence_study,
                          drift_validation, run_ensemble, summarize)
from .integrate import IntegratorConfig, Trajectory, simulate_paths
from .experiments import derive_observable

PRESETS = ("deterministic-1day", "deterministic-7day",
           "stochastic-1day", "stochastic-7day")

TRAJECTORY_COLUMNS = ("t", "c", "c_minus_c0", "a_sq", "I1", "I3",
                      "Omega1", "Omega2", "Omega3", "L1", "L2", "L3",
                      "H", "J2", "J2_minus_J20", "f_geo")

ENV_PREFIX = "OBLATESIM_"


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    """Validated union of every embedded configuration type."""
    params: EllipsoidParams
    toy: ToyModelParams
    diffusion_form: str
    omega0: np.ndarray
    integrator: IntegratorConfig
    ensemble: EnsembleConfig
    out_dir: Path
    h_list: tuple
    convergence_paths: int
    convergence_t_end: float
    raw: dict


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    ref = importlib.resources.files("oblatesim.presets") / f"{name}.yaml"
    return yaml.safe_load(ref.read_text())


def _get(d: dict, section: str, key: str, default=None, required=False):
    try:
        val = d[section][key]
    except (KeyError, TypeError):
        if required:
            raise ConfigError(f"missing config key {section}.{key}")
        return default
    return val


def build_config(doc: dict, overrides: dict) -> RunConfig:
    """Assemble and validate a RunConfig from a parsed YAML document."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    try:
        params = EllipsoidParams(
            mass=float(_get(doc, "ellipsoid", "mass", required=True)),
            c0=float(_get(doc, "ellipsoid", "c0", required=True)),
            d_min=float(_get(doc, "ellipsoid", "d_min", required=True)),
            d_max=float(_get(doc, "ellipsoid", "d_max", required=True)),
            a0=float(_get(doc, "ellipsoid", "a0", 1.0)),
        )
        toy = ToyModelParams(
            alpha=float(_get(doc, "toy", "alpha", required=True)),
            beta=float(_get(doc, "toy", "beta", required=True)),
            gamma=float(_get(doc, "toy", "gamma", required=True)),
            c0=params.c0, d_min=params.d_min, d_max=params.d_max,
        )
        diffusion_form = str(_get(doc, "toy", "diffusion_form", "factored"))
        if diffusion_form not in ("factored", "constant"):
            raise ConfigError(f"unknown diffusion_form {diffusion_form!r}")
        omega0 = np.asarray(_get(doc, "initial", "omega", [5e-7, 0.0, 1.0]),
                            dtype=float)
        if omega0.shape != (3,):
            raise ConfigError("initial.omega must have 3 components")

        t_end_days = _get(doc, "integrator", "t_end_days")
        t_end = _get(doc, "integrator", "t_end")
        if t_end is None:
            t_end = float(t_end_days if t_end_days is not None else 1.0) * DAY
        integrator = IntegratorConfig(
            h=float(_get(doc, "integrator", "h", 1e-4)),
            t_end=float(t_end),
            seed=int(overrides.get("seed",
                                   _get(doc, "integrator", "seed", 0))),
            truncation_k=float(_get(doc, "integrator", "truncation_k", 6.0)),
            boundary_policy=str(_get(doc, "integrator", "boundary_policy",
                                     "shrink-step")),
            decimate=int(overrides.get("decimate",
                                       _get(doc, "integrator", "decimate", 10))),
        )
        ensemble = EnsembleConfig(
            n_paths=int(overrides.get("paths",
                                      _get(doc, "ensemble", "n_paths", 1))),
            observables=tuple(_get(doc, "ensemble", "observables",
                                   ["c", "H", "J2"])),
            scenario=str(_get(doc, "ensemble", "scenario", "custom")),
        )
        out_dir = Path(overrides.get("out",
                                     _get(doc, "output", "directory", "out")))
        h_list = tuple(float(h) for h in
                       _get(doc, "convergence", "h_list",
                            [4e-3, 2e-3, 1e-3, 2.5e-4]))
        convergence_paths = int(_get(doc, "convergence", "n_paths", 256))
        convergence_t_end = float(_get(doc, "convergence", "t_end", 1.0))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(params=params, toy=toy, diffusion_form=diffusion_form,
                     omega0=omega0, integrator=integrator, ensemble=ensemble,
                     out_dir=out_dir, h_list=h_list,
                     convergence_paths=convergence_paths,
                     convergence_t_end=convergence_t_end, raw=doc)


def build_law(cfg: RunConfig) -> DeformationLaw:
    if cfg.diffusion_form == "factored":
        return toy_law(cfg.toy)
    # Constant diffusion: deliberately breaks the boundary-vanishing
    # condition; kept for demonstrating the checker and clamp logging.
    beta = cfg.toy.beta
    base = toy_law(cfg.toy)
    return DeformationLaw(
        drift=base.drift,
        diffusion=lambda t, x: beta + 0.0 * np.asarray(x, dtype=float),
        bounds=base.bounds,
        structurally_admissible=False,
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def trajectory_rows(traj: Trajectory, p: int):
    """Rows of the per-path CSV, in the documented column order."""
    cols = traj.path(p)
    V = traj.params.volume
    M = traj.params.mass
    c = cols["c"]
    a_sq = a_squared_from_c(c, V)
    I1, I2, I3 = cols["I1"], cols["I2"], cols["I3"]
    w1, w2, w3 = cols["Omega1"], cols["Omega2"], cols["Omega3"]
    H = (I3 - I1) / I3
    J2 = (I1 - I3) / (M * a_sq)
    f_geo = (np.sqrt(a_sq) - c) / np.sqrt(a_sq)
    table = np.column_stack([
        traj.t, c, c - c[0], a_sq, I1, I3, w1, w2, w3,
        I1 * w1, I2 * w2, I3 * w3, H, J2, J2 - J2[0], f_geo,
    ])
    return table


def write_outputs(cfg: RunConfig, traj: Trajectory, out_dir: Path,
                  per_path: bool) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if per_path:
        for p in range(traj.n_paths):
            path = out_dir / f"path_{p:04d}.csv"
            _write_csv(path, TRAJECTORY_COLUMNS, trajectory_rows(traj, p))
            written.append(path)

    summary = summarize(traj, cfg.ensemble.observables)
    header = ["t"]
    cols = [summary.t]
    for name in cfg.ensemble.observables:
        header += [f"mean_{name}", f"se_{name}"]
        cols += [summary.mean[name], summary.se[name]]
    header += ["j2_drift_mean", "j2_drift_analytic", "j2_drift_gap_se"]
    cols += [summary.j2_drift_mean, summary.j2_drift_analytic,
             summary.j2_drift_gap_se]
    spath = out_dir / "summary.csv"
    _write_csv(spath, header, np.column_stack(cols))
    written.append(spath)

    manifest = {
        "package": "oblatesim",
        "version": __version__,
        "seed": cfg.integrator.seed,
        "n_paths": traj.n_paths,
        "boundary_policy": cfg.integrator.boundary_policy,
        "h": cfg.integrator.h,
        "t_end": cfg.integrator.t_end,
        "decimate": cfg.integrator.decimate,
        "out_of_bounds_samples": int(traj.oob_count.sum()),
        "boundary_events": int(traj.boundary_events.sum()),
        "config": cfg.raw,
    }
    mpath = out_dir / "run_manifest.json"
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
    written.append(mpath)
    return written


def cmd_check(cfg: RunConfig) -> int:
    law = build_law(cfg)
    t_grid = np.linspace(0.0, cfg.integrator.t_end, 257)
    det = check_deterministic_admissible(law, t_grid)
    sto = check_stochastic_admissible(law, t_grid)
    print(f"deterministic criteria: {det}")
    print(f"stochastic criteria:    {sto}")
    return 0 if sto.admissible else 1


def cmd_simulate(cfg: RunConfig, per_path: bool = True) -> int:
    law = build_law(cfg)
    sto = check_stochastic_admissible(
        law, np.linspace(0.0, cfg.integrator.t_end, 257))
    if not sto.admissible and cfg.integrator.boundary_policy == "shrink-step":
        print(f"refusing to run: {sto}", file=sys.stderr)
        return 1
    traj = simulate_paths(law, cfg.params, cfg.integrator, cfg.omega0,
                          n_paths=cfg.ensemble.n_paths)
    written = write_outputs(cfg, traj, cfg.out_dir, per_path=per_path)
    report = drift_validation(traj)
    print(f"paths: {traj.n_paths}  out-of-bounds samples: "
          f"{int(traj.oob_count.sum())}  boundary events: "
          f"{int(traj.boundary_events.sum())}")
    print(f"J2 route consistency (max pairwise RMS): {report.max_rms:.3e}")
    print(f"Ito drift term mean: {report.ito_term_mean:.3e} "
          f"(martingale SE {report.martingale_se:.3e}, "
          f"resolved ratio {report.ito_resolved_ratio:.3e})")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_ensemble(cfg: RunConfig) -> int:
    return cmd_simulate(cfg, per_path=False)


def cmd_convergence(cfg: RunConfig) -> int:
    if len(cfg.h_list) < 3:
        print("convergence requires at least 3 step sizes "
              "(convergence.h_list)", file=sys.stderr)
        return 2
    law = build_law(cfg)
    result = convergence_study(law, cfg.params, cfg.h_list,
                               n_paths=cfg.convergence_paths,
                               t_end=cfg.convergence_t_end,
                               seed=cfg.integrator.seed)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / "convergence.csv"
    _write_csv(path, ("h", "strong_error"),
               np.column_stack([result.h, result.error]))
    lo, hi = result.slope_ci95
    print(f"strong-order slope: {result.slope:.4f} "
          f"(95% CI [{lo:.4f}, {hi:.4f}])")
    print(f"wrote {path}")
    return 0


def _env_overrides() -> dict:
    out = {}
    mapping = {"SEED": ("seed", int), "PATHS": ("paths", int),
               "OUT": ("out", str), "DECIMATE": ("decimate", int)}
    for suffix, (key, cast) in mapping.items():
        val = os.environ.get(ENV_PREFIX + suffix)
        if val is not None:
            out[key] = cast(val)
    return out


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oblatesim",
        description="Rotating ellipsoid with a stochastically fluctuating "
                    "flattening: admissibility checks, simulations, "
                    "ensembles and convergence studies.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("check", cmd_check), ("simulate", cmd_simulate),
                     ("ensemble", cmd_ensemble),
                     ("convergence", cmd_convergence)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=str, help="YAML config file")
        sp.add_argument("--preset", type=str, choices=PRESETS,
                        help="named built-in scenario")
        sp.add_argument("--seed", type=int, help="master seed override")
        sp.add_argument("--paths", type=int, help="number of paths override")
        sp.add_argument("--out", type=str, help="output directory override")
        sp.add_argument("--decimate", type=int,
                        help="output decimation override")
        sp.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    overrides = _env_overrides()
    for key in ("seed", "paths", "out", "decimate"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    try:
        if args.config is not None:
            try:
                with open(args.config) as fh:
                    doc = yaml.safe_load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            except yaml.YAMLError as exc:
                raise ConfigError(f"invalid YAML: {exc}") from exc
        elif args.preset is not None:
            doc = load_preset(args.preset)
        else:
            raise ConfigError("one of --config or --preset is required")
        cfg = build_config(doc, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(cfg)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
