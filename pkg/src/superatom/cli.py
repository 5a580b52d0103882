"""Batch command-line front end.

Commands (all batch, reproducible from a config file plus a seed):

    traces        transmission time traces, one CSV per peak rate
    g3-regression exact correlator lattice and its R-averaged (eta, zeta) map
    simulate      Monte Carlo click streams (CSV or compact binary)
    correlate     rate histogram and estimator maps from a click stream
    bethe         ideal-model (lossless emitter) correlation map
    compare       per-cell z-scores between two map CSVs

Config files are line-based `key = value` with `#` comments; unknown keys are
rejected and missing keys fall back to the documented defaults. All times are
in microseconds and rates in 1/us. Identical config and seed produce
byte-identical artifacts at any thread count.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import bethe, counting, jacobi, regression, trajectories
from .params import PulseSpec, SystemParams

__all__ = ["ConfigError", "RunConfig", "load_config", "serialize_config", "run_command", "main"]

ENV_THREADS = "SUPERATOM_THREADS"


class ConfigError(ValueError):
    pass


_KEYS: dict[str, tuple[str, object]] = {
    # system rates (defaults are the fitted reference values)
    "kappa": ("float", 0.55),
    "gamma_r": ("float", 0.14),
    "gamma_d": ("float", 1.49),
    # probe pulse
    "peak_rate": ("float", 6.7),
    "peak_rates": ("floats", (3.4, 6.7, 15.2)),
    "t_start": ("float", 0.0),
    "t_end": ("float", 6.0),
    "ramp": ("float", 0.5),
    # regression lattice
    "grid_start": ("float", 0.5),
    "grid_stop": ("float", 5.5),
    "grid_step": ("float", 0.1),
    "stride": ("int", 1),
    "trace_step": ("float", 0.02),
    # counting
    "bin_width": ("float", 0.3),
    "window_start": ("float", 0.0),
    "window_stop": ("float", 6.0),
    # center-of-mass window (units of sqrt(3) us) and map cells
    "r_lo": ("float", 2.5),
    "r_hi": ("float", 3.5),
    "map_bin": ("float", 0.1),
    "map_extent": ("float", 3.0),
    # Monte Carlo
    "n_pulses": ("int", 100000),
    "seed": ("int", 12345),
    "dt_max": ("float", 0.005),
    "detectors": ("int", 1),
    "dead_time": ("float", 0.0),
    "click_format": ("str", "csv"),
    "clicks_path": ("str", ""),
    # execution
    "threads": ("int", 1),
    "heatmap": ("bool", False),
    "out_dir": ("str", "out"),
}


@dataclass(frozen=True)
class RunConfig:
    values: tuple  # (key, value) pairs in canonical order

    def __getitem__(self, key: str):
        return dict(self.values)[key]

    def get(self, key: str):
        return dict(self.values)[key]

    def with_overrides(self, **kw) -> "RunConfig":
        d = dict(self.values)
        for k, v in kw.items():
            if k not in d:
                raise ConfigError(f"unknown config key {k!r}")
            d[k] = v
        cfg = RunConfig(values=tuple((k, d[k]) for k in _KEYS))
        _validate(cfg)
        return cfg

    @property
    def params(self) -> SystemParams:
        return SystemParams(kappa=self["kappa"], gamma_r=self["gamma_r"], gamma_d=self["gamma_d"])

    @property
    def pulse(self) -> PulseSpec:
        return PulseSpec(
            peak_rate=self["peak_rate"], t_start=self["t_start"], t_end=self["t_end"], ramp=self["ramp"]
        )

    @property
    def binning(self) -> counting.BinningSpec:
        return counting.BinningSpec(
            bin_width=self["bin_width"], window=(self["window_start"], self["window_stop"])
        )

    @property
    def trajectory(self) -> trajectories.TrajectoryConfig:
        return trajectories.TrajectoryConfig(
            n_pulses=self["n_pulses"],
            seed=self["seed"],
            dt_max=self["dt_max"],
            detectors=self["detectors"],
            dead_time=self["dead_time"],
        )

    @property
    def grid(self) -> np.ndarray:
        n = int(round((self["grid_stop"] - self["grid_start"]) / self["grid_step"]))
        return self["grid_start"] + np.arange(n + 1) * self["grid_step"]

    @property
    def r_range(self) -> tuple[float, float]:
        return (self["r_lo"], self["r_hi"])


def _parse_value(kind: str, text: str, key: str, lineno: int):
    text = text.strip()
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind == "bool":
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind == "floats":
            return tuple(float(x) for x in text.split(",") if x.strip())
        return text
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad {kind} value for {key!r}: {text!r}") from exc


def _validate(cfg: RunConfig) -> None:
    try:
        cfg.params
        cfg.pulse
        cfg.binning
        cfg.trajectory
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for key in ("grid_step", "map_bin", "map_extent", "trace_step"):
        if not cfg[key] > 0:
            raise ConfigError(f"{key} must be > 0")
    if cfg["grid_stop"] <= cfg["grid_start"]:
        raise ConfigError("grid_stop must exceed grid_start")
    if cfg["r_hi"] <= cfg["r_lo"]:
        raise ConfigError("r_hi must exceed r_lo")
    if cfg["click_format"] not in ("csv", "binary"):
        raise ConfigError(f"click_format must be csv or binary, got {cfg['click_format']!r}")
    if cfg["threads"] < 1:
        raise ConfigError("threads must be >= 1")


def default_config() -> RunConfig:
    cfg = RunConfig(values=tuple((k, spec[1]) for k, spec in _KEYS.items()))
    _validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    """Parse a key = value config file; unknown keys are rejected."""
    values = {k: spec[1] for k, spec in _KEYS.items()}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, text = line.split("=", 1)
            key = key.strip()
            if key not in _KEYS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[key] = _parse_value(_KEYS[key][0], text, key, lineno)
    cfg = RunConfig(values=tuple((k, values[k]) for k in _KEYS))
    _validate(cfg)
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {_format_value(v)}\n" for k, v in cfg.values)


def _header(cfg: RunConfig, command: str) -> list[str]:
    return [f"superatom {command}"] + serialize_config(cfg).rstrip("\n").split("\n")


def _resolve_threads(cfg: RunConfig, cli_threads: int | None) -> int:
    if cli_threads is not None:
        return cli_threads
    env = os.environ.get(ENV_THREADS)
    if env:
        return int(env)
    return cfg["threads"]


def _maybe_heatmap(cfg: RunConfig, jmap: jacobi.JacobiMap, path_base: str, header) -> None:
    if cfg["heatmap"]:
        jacobi.write_pgm(jmap.g3c, path_base + "_g3c.pgm", header)
        jacobi.write_pgm(jmap.g3, path_base + "_g3.pgm", header)


def _clicks_path(cfg: RunConfig, out_dir: str) -> str:
    if cfg["clicks_path"]:
        return cfg["clicks_path"]
    ext = "csv" if cfg["click_format"] == "csv" else "bin"
    return os.path.join(out_dir, f"clicks.{ext}")


def _cmd_traces(cfg: RunConfig, out_dir: str, threads: int, extra) -> int:
    from .lindblad import transmission_trace, write_trace_csv

    grid = np.arange(cfg["t_start"], cfg["t_end"] + 1e-12, cfg["trace_step"])
    for rate in cfg["peak_rates"]:
        pulse = replace(cfg.pulse, peak_rate=rate)
        trace = transmission_trace(cfg.params, pulse, grid)
        path = os.path.join(out_dir, f"traces_R{rate:g}.csv")
        write_trace_csv(trace, path, _header(cfg.with_overrides(peak_rate=rate), "traces"))
        print(f"wrote {path}")
    return 0


def _cmd_g3_regression(cfg: RunConfig, out_dir: str, threads: int, extra) -> int:
    grid = regression.g3_grid(cfg.params, cfg.pulse, cfg.grid, stride=cfg["stride"])
    header = _header(cfg, "g3-regression")
    regression.write_pairs_csv(grid, os.path.join(out_dir, "g2_pairs.csv"), header)
    regression.write_triples_csv(grid, os.path.join(out_dir, "g3_triples.csv"), header)
    jmap = jacobi.average_over_R(grid, r_range=cfg.r_range, cell_width=cfg["map_bin"])
    path = os.path.join(out_dir, "map_regression.csv")
    jacobi.write_map_csv(jmap, path, header)
    _maybe_heatmap(cfg, jmap, os.path.join(out_dir, "map_regression"), header)
    print(f"wrote {path}")
    return 0


def _cmd_simulate(cfg: RunConfig, out_dir: str, threads: int, extra) -> int:
    data = trajectories.simulate_ensemble(cfg.params, cfg.pulse, cfg.trajectory, threads=threads)
    path = _clicks_path(cfg, out_dir)
    if cfg["click_format"] == "csv":
        trajectories.write_clicks_csv(data, path, _header(cfg, "simulate"))
    else:
        trajectories.write_clicks_binary(data, path)
    print(f"wrote {path} ({data.n_clicks} clicks from {data.n_pulses} pulses)")
    return 0


def _cmd_correlate(cfg: RunConfig, out_dir: str, threads: int, extra) -> int:
    path = extra[0] if extra else _clicks_path(cfg, out_dir)
    if path.endswith(".bin"):
        data = trajectories.read_clicks_binary(path, n_pulses=cfg["n_pulses"])
    else:
        data = trajectories.read_clicks_csv(path)
    header = _header(cfg, "correlate")
    rates = counting.rate_histogram(data, cfg.binning)
    rates_path = os.path.join(out_dir, "rates.csv")
    with open(rates_path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("time_us,rate,stderr\n")
        for t, r, e in zip(rates.centers, rates.rate, rates.stderr):
            fh.write(f"{t:.9g},{r:.9g},{e:.9g}\n")
    jmap = counting.g3c_jacobi_estimate(data, cfg.binning, r_range=cfg.r_range)
    map_path = os.path.join(out_dir, "map_counts.csv")
    jacobi.write_map_csv(jmap, map_path, header)
    _maybe_heatmap(cfg, jmap, os.path.join(out_dir, "map_counts"), header)
    print(f"wrote {rates_path} and {map_path}")
    return 0


def _cmd_bethe(cfg: RunConfig, out_dir: str, threads: int, extra) -> int:
    jmap = bethe.ideal_map(cfg["kappa"], extent=cfg["map_extent"], cell_width=cfg["map_bin"])
    header = _header(cfg, "bethe")
    path = os.path.join(out_dir, "map_ideal.csv")
    jacobi.write_map_csv(jmap, path, header)
    _maybe_heatmap(cfg, jmap, os.path.join(out_dir, "map_ideal"), header)
    print(f"wrote {path}")
    return 0


def _cmd_compare(cfg: RunConfig, out_dir: str, threads: int, extra) -> int:
    if len(extra) != 2:
        raise ConfigError("compare needs two map CSV paths")
    a = jacobi.read_map_csv(extra[0])
    b = jacobi.read_map_csv(extra[1])
    if abs(a.cell_width - b.cell_width) > 1e-12:
        raise ConfigError(
            f"maps have different cell widths: {a.cell_width} vs {b.cell_width}"
        )
    rows = []
    max_z = 0.0
    n_over = 0
    for ie, eta in enumerate(a.eta_centers):
        for iz, zeta in enumerate(a.zeta_centers):
            if a.n_samples[ie, iz] <= 0:
                continue
            try:
                je, jz = b.cell_index(float(eta), float(zeta))
            except KeyError:
                continue
            if b.n_samples[je, jz] <= 0:
                continue
            va, vb = a.g3c[ie, iz], b.g3c[je, jz]
            ea = a.g3c_stderr[ie, iz] if a.g3c_stderr is not None else 0.0
            eb = b.g3c_stderr[je, jz] if b.g3c_stderr is not None else 0.0
            sigma = math.sqrt(ea**2 + eb**2)
            delta = va - vb
            z = 0.0 if delta == 0.0 else (delta / sigma if sigma > 0 else math.inf)
            rows.append((float(eta), float(zeta), va, vb, delta, z))
            max_z = max(max_z, abs(z))
            if abs(z) > 3.0:
                n_over += 1
    path = os.path.join(out_dir, "compare.csv")
    with open(path, "w") as fh:
        for line in _header(cfg, "compare"):
            fh.write(f"# {line}\n")
        fh.write("eta_us,zeta_us,a_g3c,b_g3c,delta,z\n")
        for eta, zeta, va, vb, delta, z in rows:
            fh.write(f"{eta:.9g},{zeta:.9g},{va:.9g},{vb:.9g},{delta:.9g},{z:.9g}\n")
    print(f"compared {len(rows)} cells: max |z| = {max_z:.3g}, {n_over} cells above 3")
    return 0


_COMMANDS = {
    "traces": _cmd_traces,
    "g3-regression": _cmd_g3_regression,
    "simulate": _cmd_simulate,
    "correlate": _cmd_correlate,
    "bethe": _cmd_bethe,
    "compare": _cmd_compare,
}


def run_command(
    name: str, cfg: RunConfig, extra=(), out_dir: str | None = None, threads: int | None = None
) -> int:
    if name not in _COMMANDS:
        raise ConfigError(f"unknown command {name!r}; choose from {sorted(_COMMANDS)}")
    out = out_dir or cfg["out_dir"]
    os.makedirs(out, exist_ok=True)
    return _COMMANDS[name](cfg, out, _resolve_threads(cfg, threads), list(extra))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="superatom",
        description="Driven-superatom photon correlation toolkit",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("extra", nargs="*", help="command-specific positional arguments")
    parser.add_argument("--config", default=None, help="path to a key = value config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output directory (default: out_dir from config)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is not None:
            cfg = cfg.with_overrides(seed=args.seed)
        return run_command(args.command, cfg, args.extra, args.out, args.threads)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
