"""Command-line front end.

Subcommands: field (grid CSV), traj (trajectory CSV), check (diagnostic
suite), boost-frame (positivity boost parameters), metric (shift-field CSV).
Presets fig2a..fig6 encode the standard interferometer scenarios.  Outputs
are deterministic: identical configs produce byte-identical CSVs (17
significant digit floats, LF line endings, fixed row order).

Exit codes: 0 ok, 1 diagnostic failure, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .core import (
    BoostFrame,
    ConfigError,
    GridSpec,
    Regime,
    RunConfig,
    WavepacketSpec,
    parse_config,
    serialize_config,
    validate_spec,
)
from .diagnostics import (
    continuity_check,
    covariance_check,
    density_match,
    null_metric_check,
    optics_check,
    positivity_check,
    serialize_report,
)
from .metric import shift_from_velocity
from .observables import field_grid, velocity_grid
from .relativity import NonOpticalSpec, boost_spec, compose_boosts, positivity_frame
from .trajectories import EnsembleSpec, Sampling, ensemble, map_to_frame
from .wavefunction import QuadratureNotConverged, build_quadrature_rule

__all__ = ["PRESETS", "main"]

PRESETS: dict[str, str] = {
    "fig2a": """\
alpha=1.0
k0=15
sigma=1
kz=0
regime=headon
t_min=-4
t_max=4
x_min=-8
x_max=8
nt=321
nx=481
n_traj=9
""",
    "fig2b": """\
alpha=0.5
k0=15
sigma=1
kz=0
regime=headon
t_min=-4
t_max=4
x_min=-8
x_max=8
nt=321
nx=481
n_traj=21
""",
    "fig3": """\
alpha=0.5
k0=15
sigma=1
kz=0
regime=headon
boost_v=0.125
t_min=-4
t_max=4
x_min=-8
x_max=8
nt=321
nx=481
n_traj=21
""",
    "fig4": """\
alpha=0.5
k0=6
sigma=1
kz=24
regime=general
t_min=-4
t_max=4
x_min=-5
x_max=5
nt=161
nx=241
n_traj=21
""",
    "fig5": """\
alpha=0.5
k0=5
sigma=1
kz=500
regime=paraxial
t_min=-400
t_max=400
x_min=-8
x_max=8
nt=321
nx=481
n_traj=21
""",
    "fig6": """\
alpha=0.5
k0=15
sigma=1
kz=0
regime=headon
boost_v=0.4
t_min=-4
t_max=4
x_min=-8
x_max=8
nt=799
nx=481
n_traj=30
""",
}

_F = "{:.17g}".format  # fixed float formatting keeps outputs byte-identical


def _load_config(args) -> RunConfig:
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset '{args.preset}'"
                              f" (choose from {', '.join(sorted(PRESETS))})")
        text = PRESETS[args.preset]
    else:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    return parse_config(text)


def _gate_spec(cfg: RunConfig, require_optical: bool) -> None:
    report = validate_spec(cfg.spec, cfg.optical_ratio)
    if not report.ok:
        raise ConfigError("invalid wavepacket spec: " + "; ".join(report.violations))
    if require_optical and not report.optical:
        raise ConfigError(
            f"spec is not optical at ratio {cfg.optical_ratio} and "
            f"--require-optical was given")


def _display_spec(cfg: RunConfig) -> WavepacketSpec:
    """Spec whose re-evaluation renders fields in the display frame."""
    if cfg.boost_v == 0.0:
        return cfg.spec
    return boost_spec(cfg.spec, BoostFrame(cfg.boost_v)).spec


def _grid_rule(spec: WavepacketSpec, grid: GridSpec, cfg: RunConfig):
    if spec.regime is not Regime.GENERAL:
        return None
    return build_quadrature_rule(
        spec, max(abs(grid.t_min), abs(grid.t_max)),
        max(abs(grid.x_min), abs(grid.x_max)),
        min_nodes=cfg.quad_nodes, tol=cfg.rel_tol)


def _write_manifest(out_path: str, cfg: RunConfig, command: str,
                    started: float, outputs: list[str]) -> None:
    import os
    lines = [f"tool=relbohm", f"version={__version__}", f"command={command}",
             f"wall_time_s={time.monotonic() - started:.3f}"]
    for i, path in enumerate(outputs):
        lines.append(f"output.{i}={path}")
        lines.append(f"output.{i}.bytes={os.path.getsize(path)}")
    for line in serialize_config(cfg).strip().splitlines():
        lines.append(f"config.{line}")
    with open(out_path + ".manifest", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_field(cfg: RunConfig, out_path: str) -> int:
    started = time.monotonic()
    spec = _display_spec(cfg)
    grid = cfg.grid
    rule = _grid_rule(spec, grid, cfg)
    T, X = np.meshgrid(grid.ts(), grid.xs(), indexing="ij")
    psi, _, _, j, rho, vel = field_grid(spec, T, X, rule)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x,re_psi,im_psi,j,rho,V\n")
        for it in range(grid.nt):
            for ix in range(grid.nx):
                fh.write(",".join((_F(T[it, ix]), _F(X[it, ix]),
                                   _F(psi[it, ix].real), _F(psi[it, ix].imag),
                                   _F(j[it, ix]), _F(rho[it, ix]),
                                   _F(vel[it, ix]))) + "\n")
    _write_manifest(out_path, cfg, "field", started, [out_path])
    return 0


def _lab_ensemble(cfg: RunConfig):
    """Integrate in a frame with non-negative density (the lab frame for
    symmetric packets, the positivity frame otherwise)."""
    spec = cfg.spec
    frame_v = 0.0
    if not spec.is_symmetric and spec.regime is Regime.HEAD_ON:
        frame = positivity_frame(spec, cfg.optical_ratio)
        frame_v = frame.v
        if frame_v != 0.0:
            spec = boost_spec(spec, frame).spec
    grid = cfg.grid
    ens = EnsembleSpec(n_traj=cfg.n_traj, t0=grid.t_min, t1=grid.t_max,
                       sampling=Sampling.DENSITY_QUANTILE, seed=cfg.seed)
    rule = _grid_rule(spec, grid, cfg)
    trajs = ensemble(spec, ens, grid, tol=cfg.abs_tol, rule=rule)
    return spec, frame_v, trajs


def cmd_traj(cfg: RunConfig, out_path: str) -> int:
    started = time.monotonic()
    _, frame_v, trajs = _lab_ensemble(cfg)
    # Map from the integration frame into the display frame.
    net_v = compose_boosts(-frame_v, cfg.boost_v)
    if net_v != 0.0:
        polylines = map_to_frame(trajs, BoostFrame(net_v))
    else:
        polylines = [np.column_stack([tr.t[~np.isnan(tr.x)],
                                      tr.x[~np.isnan(tr.x)]]) for tr in trajs]
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("traj_id,t,x,status\n")
        for tr, line in zip(trajs, polylines):
            for row in range(line.shape[0]):
                fh.write(f"{tr.id},{_F(line[row, 0])},{_F(line[row, 1])},"
                         f"{tr.status.value}\n")
    _write_manifest(out_path, cfg, "traj", started, [out_path])
    return 0


def cmd_metric(cfg: RunConfig, out_path: str) -> int:
    started = time.monotonic()
    spec = _display_spec(cfg)
    grid = cfg.grid
    rule = _grid_rule(spec, grid, cfg)
    T, X = np.meshgrid(grid.ts(), grid.xs(), indexing="ij")
    V = velocity_grid(spec, T, X, rule)
    vs = np.where(np.isnan(V), np.nan, shift_from_velocity(np.nan_to_num(V)))
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x,vs\n")
        for it in range(grid.nt):
            for ix in range(grid.nx):
                fh.write(f"{_F(T[it, ix])},{_F(X[it, ix])},{_F(vs[it, ix])}\n")
    _write_manifest(out_path, cfg, "metric", started, [out_path])
    return 0


def cmd_boost_frame(cfg: RunConfig, out) -> int:
    try:
        frame = positivity_frame(cfg.spec, cfg.optical_ratio)
    except NonOpticalSpec as exc:
        raise ConfigError(str(exc)) from exc
    primed = boost_spec(cfg.spec, frame).spec
    lines = [
        f"v={frame.v!r}",
        f"gamma={frame.gamma!r}",
        f"k0R_primed={primed.k0R!r}",
        f"k0L_primed={primed.k0L!r}",
        f"sigmaR_primed={primed.sigmaR!r}",
        f"sigmaL_primed={primed.sigmaL!r}",
    ]
    out.write("\n".join(lines) + "\n")
    return 0


def _decimated(grid: GridSpec, max_side: int) -> GridSpec:
    nt = min(grid.nt, max_side)
    nx = min(grid.nx, max_side)
    return GridSpec(t_min=grid.t_min, t_max=grid.t_max, x_min=grid.x_min,
                    x_max=grid.x_max, nt=nt, nx=nx)


def cmd_check(cfg: RunConfig, out, fd_h: float) -> int:
    spec = cfg.spec
    grid = cfg.grid
    reports = []
    reports.append(optics_check(spec, cfg.optical_ratio))

    check_grid = grid if spec.regime is not Regime.GENERAL else _decimated(grid, 81)
    h = fd_h if spec.regime is not Regime.GENERAL else min(fd_h, 3e-5)
    reports.append(continuity_check(spec, check_grid, h=h))

    if spec.kz == 0.0:
        v = cfg.boost_v if cfg.boost_v != 0.0 else 0.125
        reports.append(covariance_check(spec, BoostFrame(v), _decimated(grid, 161)))

    n_match = max(cfg.n_traj, 200 if spec.regime is Regime.GENERAL else 1000)
    ens = EnsembleSpec(n_traj=n_match, t0=grid.t_min, t1=grid.t_max,
                       sampling=Sampling.DENSITY_QUANTILE, seed=cfg.seed)
    rule = _grid_rule(spec, grid, cfg)
    trajs = ensemble(spec, ens, grid, tol=cfg.abs_tol, rule=rule)
    span = grid.t_max - grid.t_min
    times = [grid.t_min + 0.25 * span, grid.t_min + 0.5 * span,
             grid.t_min + 0.75 * span]
    reports.append(density_match(spec, trajs, times, rule=rule))

    reports.append(null_metric_check(spec, _decimated(grid, 161),
                                     trajs=trajs[: min(50, len(trajs))], rule=rule))
    if spec.regime is Regime.HEAD_ON:
        reports.append(positivity_check(spec, _decimated(grid, 201),
                                        cfg.optical_ratio))

    failed = [r for r in reports if not r.passed]
    for report in reports:
        out.write(serialize_report(report))
        out.write("\n")
    out.write(f"checks_total={len(reports)}\n")
    out.write(f"checks_failed={len(failed)}\n")
    return 1 if failed else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relbohm",
        description="Relativistic Bohmian velocity fields and photon trajectories")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out=True):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="path to a flat key=value config file")
        src.add_argument("--preset", help="built-in preset name (fig2a..fig6)")
        if needs_out:
            p.add_argument("--out", required=True, help="output CSV path")
        else:
            p.add_argument("--out", help="optional output log path")
        p.add_argument("--require-optical", action="store_true",
                       help="fail (exit 2) when the spec is not optical")

    add_common(sub.add_parser("field", help="dump the field grid as CSV"))
    add_common(sub.add_parser("traj", help="dump the trajectory ensemble as CSV"))
    add_common(sub.add_parser("metric", help="dump the shift field vs as CSV"))
    check = sub.add_parser("check", help="run the diagnostic suite")
    add_common(check, needs_out=False)
    check.add_argument("--fd-h", type=float, default=1e-4,
                       help="finite-difference step for the continuity check")
    add_common(sub.add_parser("boost-frame",
                              help="print the positivity-frame parameters"),
               needs_out=False)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        _gate_spec(cfg, args.require_optical)
        if args.command == "field":
            return cmd_field(cfg, args.out)
        if args.command == "traj":
            return cmd_traj(cfg, args.out)
        if args.command == "metric":
            return cmd_metric(cfg, args.out)
        if args.command == "boost-frame":
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                    return cmd_boost_frame(cfg, fh)
            return cmd_boost_frame(cfg, sys.stdout)
        if args.command == "check":
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                    return cmd_check(cfg, fh, args.fd_h)
            return cmd_check(cfg, sys.stdout, args.fd_h)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuadratureNotConverged as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
