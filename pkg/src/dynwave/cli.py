"""Configuration files, experiment subcommands and CSV emission.

Configs are INI files with sections [grid], [problem], [solver], [output];
unknown sections or keys are errors so typos cannot silently change an
experiment.  ``--set section.key=value`` flags override file values.

CSV output is bit-specified: 17 significant decimal digits (enough to
round-trip binary64), comma delimiter, LF line endings, fixed row order, no
locale formatting.  Identical configs therefore produce byte-identical files.

Exit codes: 0 success, 1 configuration error, 2 solver non-convergence
(reduce dt).  DYNWAVE_OUTDIR is the output-directory fallback.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path
from typing import Optional, Sequence

from .harness import (
    ExperimentConfig,
    TrajectoryRecord,
    convergence_study,
    preset_formulas,
    run,
)
from .semilinear import NoConvergence


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key or value."""


_SCHEMA = {
    "grid": {"L": float, "T": float, "K": int, "N": int},
    "problem": {"kind": str, "nonlinearity": str, "bc": str, "preset": str, "initial_csv": str},
    "solver": {"tol": float, "max_iter": int, "check_radius": bool},
    "output": {"outdir": str, "snapshot_stride": int},
}

_REQUIRED = [("grid", "L"), ("grid", "T"), ("grid", "K"), ("grid", "N"), ("problem", "nonlinearity")]

_BOOL_STATES = {
    "1": True, "0": False, "true": True, "false": False,
    "yes": True, "no": False, "on": True, "off": False,
}


def _convert(section: str, key: str, raw: str):
    kind = _SCHEMA[section][key]
    try:
        if kind is bool:
            return _BOOL_STATES[raw.strip().lower()]
        return kind(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as {kind.__name__}") from None


def _parse_overrides(pairs: Sequence[str]) -> dict[tuple[str, str], str]:
    out = {}
    for item in pairs:
        head, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        section, dot, key = head.partition(".")
        if not dot:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        out[(section.strip(), key.strip())] = value
    return out


def load_config(path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Parse a config file, apply overrides, and validate keys and values."""
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (L, T, K, N)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    values: dict[tuple[str, str], str] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            values[(section, key)] = raw
    for (section, key), raw in _parse_overrides(overrides).items():
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        values[(section, key)] = raw

    for section, key in _REQUIRED:
        if (section, key) not in values:
            raise ConfigError(f"missing required key {section}.{key}")
    if ("problem", "preset") in values and ("problem", "initial_csv") in values:
        raise ConfigError("problem.preset and problem.initial_csv are mutually exclusive")
    if ("problem", "preset") not in values and ("problem", "initial_csv") not in values:
        raise ConfigError("one of problem.preset or problem.initial_csv is required")

    kwargs = {}
    for (section, key), raw in values.items():
        kwargs[key] = _convert(section, key, raw)
    if "preset" in kwargs:
        kwargs.setdefault("initial_csv", None)
    else:
        kwargs["preset"] = None
    if "outdir" not in kwargs:
        env = os.environ.get("DYNWAVE_OUTDIR")
        if env:
            kwargs["outdir"] = env

    known = {f.name for f in dataclass_fields(ExperimentConfig)}
    assert set(kwargs) <= known
    return ExperimentConfig(**kwargs)


def _fmt(x: float) -> str:
    """17 significant decimal digits: lossless for binary64."""
    return format(float(x), ".17g")


def _open_out(path: Path):
    return open(path, "w", newline="\n")


def write_snapshots(record: TrajectoryRecord, path) -> None:
    grid = record.grid
    with _open_out(Path(path)) as fh:
        fh.write("n,t,k,x,u\n")
        for n, level in record.snapshots:
            t = _fmt(n * grid.dt)
            for k in range(grid.K + 1):
                fh.write(f"{n},{t},{k},{_fmt(k * grid.dx)},{_fmt(level[k])}\n")


def write_energy(record: TrajectoryRecord, path) -> None:
    with _open_out(Path(path)) as fh:
        fh.write("n,t,J,delta,drift\n")
        if not record.energies:
            return
        j_first = record.energies[0].J
        scale = max(1.0, abs(j_first))
        for s in record.energies:
            drift = abs(s.J - j_first) / scale
            fh.write(f"{s.n},{_fmt(s.t)},{_fmt(s.J)},{_fmt(s.delta)},{_fmt(drift)}\n")


def write_diagnostics(record: TrajectoryRecord, path) -> None:
    with _open_out(Path(path)) as fh:
        fh.write("n,iterations,final_increment,M_n,radius_ok\n")
        for sample, diag in zip(record.energies, record.diagnostics):
            flag = "" if diag.radius_ok is None else ("true" if diag.radius_ok else "false")
            fh.write(
                f"{sample.n},{diag.iterations},{_fmt(diag.final_increment)},"
                f"{_fmt(diag.M_n)},{flag}\n"
            )


def write_convergence(rows, path) -> None:
    with _open_out(Path(path)) as fh:
        fh.write("level,K,N,dx,dt,err_l2,err_h1,err_composite,observed_order\n")
        for r in rows:
            order = "" if r.observed_order is None else _fmt(r.observed_order)
            fh.write(
                f"{r.level},{r.K},{r.N},{_fmt(r.dx)},{_fmt(r.dt)},"
                f"{_fmt(r.err_l2)},{_fmt(r.err_h1)},{_fmt(r.err_composite)},{order}\n"
            )


def _outdir(config: ExperimentConfig) -> Path:
    if not config.outdir:
        raise ConfigError("no output directory: set output.outdir or DYNWAVE_OUTDIR")
    out = Path(config.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(config_path, overrides: Sequence[str] = ()) -> int:
    try:
        config = load_config(config_path, overrides)
        outdir = _outdir(config)
        record = run(config)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"dynwave: config error: {exc}", file=sys.stderr)
        return 1
    except NoConvergence as exc:
        print(
            f"dynwave: step {exc.step_index} did not converge: {exc}", file=sys.stderr
        )
        return 2
    write_snapshots(record, outdir / "snapshots.csv")
    write_energy(record, outdir / "energy.csv")
    write_diagnostics(record, outdir / "diagnostics.csv")
    return 0


def cmd_converge(config_path, levels: int, overrides: Sequence[str] = ()) -> int:
    try:
        config = load_config(config_path, overrides)
        outdir = _outdir(config)
        rows = convergence_study(config, levels)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"dynwave: config error: {exc}", file=sys.stderr)
        return 1
    except NoConvergence as exc:
        print(
            f"dynwave: step {exc.step_index} did not converge: {exc}", file=sys.stderr
        )
        return 2
    write_convergence(rows, outdir / "convergence.csv")
    return 0


def cmd_presets() -> int:
    for name, (u0, v0) in sorted(preset_formulas().items()):
        print(f"{name}: u0(x) = {u0}; v0(x) = {v0}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dynwave",
        description=(
            "Energy-conserving finite difference solver for 1-D nonlinear wave "
            "equations with dynamic boundary conditions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write CSV outputs")
    p_run.add_argument("config", help="INI config file")
    p_run.add_argument(
        "--set", dest="overrides", action="append", default=[],
        metavar="SECTION.KEY=VALUE", help="override a config value",
    )

    p_conv = sub.add_parser("converge", help="run a self-convergence study")
    p_conv.add_argument("config", help="INI config file")
    p_conv.add_argument("--levels", type=int, default=4, help="number of refinement levels")
    p_conv.add_argument(
        "--set", dest="overrides", action="append", default=[],
        metavar="SECTION.KEY=VALUE", help="override a config value",
    )

    sub.add_parser("presets", help="list initial-data presets")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.overrides)
    if args.command == "converge":
        return cmd_converge(args.config, args.levels, args.overrides)
    return cmd_presets()


def console_main() -> None:
    raise SystemExit(main())
