"""Experiment runner: reproduce the headline constants and comparison
figures from declarative TOML configs.

Subcommands:
    greedyq run <config.toml>      execute one experiment
    greedyq compare <dir>... -o f  merge trajectory CSVs into one report
    greedyq gen-config <name>      print a config template

Artifacts per run: sequence/trajectory CSVs, a versioned summary.json with
the headline constants, and an SVG plot of N^(1/d) * e_p against N.  Worker
count is capped by GREEDYQ_THREADS; results do not depend on it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import tomli

from . import diagnostics, qmc
from ._svg import write_line_plot
from .distributions import (
    normal,
    normal_nd,
    parse_distribution,
    uniform01,
    wrap_1d,
)
from .greedy1d import build_greedy_1d, build_greedy_symmetric
from .greedy_nd import StochasticRunConfig, build_greedy_nd
from .quantization import Quantizer, cubature, voronoi_weights, write_grid_csv

SCHEMA_VERSION = 1

ZADOR_LIMITS = {
    (1.0, 1): qmc.J_1_1,
    (2.0, 1): qmc.J_2_1,
    # d = 2 quadratic limit for N(0, I_2): (2/3) * sqrt(5*pi/sqrt(3))
    (2.0, 2): (2.0 / 3.0) * math.sqrt(5.0 * math.pi / math.sqrt(3.0)),
}


class ConfigError(ValueError):
    """Invalid experiment config; message carries a config line number."""


@dataclass
class ExperimentConfig:
    experiment: str
    n_max: int
    distribution: str = ""
    p: float = 2.0
    q: list[float] = field(default_factory=lambda: [2.5, 3.0])
    solver: str = ""
    seed: Optional[int] = None
    m_factor: int = 1000
    eval_samples: int = 200_000
    mc_weight_samples: int = 100_000
    output_dir: str = "out"


_DEFAULTS = {
    "greedy1d_uniform": {"n_max": 5000, "distribution": "uniform01", "solver": "lloyd"},
    "greedy1d_normal": {"n_max": 4001, "distribution": "normal(0,1)", "solver": "lloyd"},
    "greedy_nd_normal2": {
        "n_max": 200,
        "distribution": "normal_nd(2)",
        "solver": "rlloyd",
        "seed": 20260810,
    },
    "vdc_constants": {"n_max": 4096, "p": 2.0},
    "concat_compare": {"n_max": 4096},
    "mismatch": {"n_max": 5000, "q": [2.5, 3.0]},
    "cubature_compare": {"n_max": 256, "seed": 20260810},
    "diagnostics": {"n_max": 64},
}

_STOCHASTIC = {"greedy_nd_normal2", "cubature_compare"}


def _key_line(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        if line.split("#", 1)[0].strip().startswith(key):
            return i
    return 1


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}") from exc
    if not raw:
        raise ConfigError(f"{path}:1: empty config (need at least 'experiment')")

    def fail(key: str, message: str):
        raise ConfigError(f"{path}:{_key_line(text, key)}: {message}")

    experiment = raw.pop("experiment", None)
    if experiment is None:
        fail("experiment", "missing required key 'experiment'")
    if experiment not in _DEFAULTS:
        fail(
            "experiment",
            f"unknown experiment {experiment!r}; choose from "
            + ", ".join(sorted(_DEFAULTS)),
        )
    merged = dict(_DEFAULTS[experiment])
    merged.update(raw)
    merged["experiment"] = experiment
    known = set(ExperimentConfig.__dataclass_fields__)
    for key in merged:
        if key not in known:
            fail(key, f"unknown config key {key!r}")
    q = merged.get("q", [2.5, 3.0])
    merged["q"] = [float(v) for v in (q if isinstance(q, list) else [q])]
    try:
        cfg = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(f"{path}:1: {exc}") from exc
    if cfg.n_max < 1:
        fail("n_max", "n_max must be >= 1")
    if experiment in _STOCHASTIC and cfg.seed is None:
        fail("seed", f"experiment {experiment!r} is stochastic: 'seed' is mandatory")
    if cfg.distribution:
        try:
            parse_distribution(cfg.distribution)
        except ValueError as exc:
            fail("distribution", str(exc))
    return cfg


class ArtifactWriter:
    """Tracks written artifacts so failures can retain them as .partial."""

    def __init__(self, outdir: str | Path):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.outdir / name
        self.written.append(p)
        return p

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow(
                    [repr(float(v)) if isinstance(v, float) else v for v in row]
                )
        return p

    def write_json(self, name: str, obj) -> Path:
        p = self.path(name)
        with open(p, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return p

    def mark_partial(self) -> None:
        for p in self.written:
            if p.exists() and not p.name.endswith(".partial"):
                p.rename(p.with_name(p.name + ".partial"))


def _window_minmax(scaled: np.ndarray, lo: int, hi: int, mask=None):
    levels = np.arange(1, len(scaled) + 1)
    sel = (levels >= lo) & (levels <= hi)
    if mask is not None:
        sel &= mask
    vals = scaled[sel]
    return float(vals.min()), float(vals.max())


def _write_1d_sequence(w: ArtifactWriter, seq) -> None:
    w.write_csv(
        "sequence.csv",
        ["index", "a"],
        [(i + 1, float(a)) for i, a in enumerate(np.ravel(seq.points))],
    )
    w.write_csv(
        "trajectory.csv",
        ["N", "e_p", "residual", "iters"],
        [
            (r.level, r.value, float(seq.residuals[i]), int(seq.iterations[i]))
            for i, r in enumerate(seq.trajectory)
        ],
    )


def run_greedy1d_uniform(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    seq = build_greedy_1d(uniform01(), n_max=cfg.n_max, solver=cfg.solver or "lloyd")
    _write_1d_sequence(w, seq)
    ne = seq.scaled_distortions()
    levels = np.arange(1, len(ne) + 1)
    _, limsup = _window_minmax(ne, min(100, len(ne)), len(ne))
    liminf, _ = _window_minmax(ne, len(ne) // 2, len(ne))
    write_line_plot(
        w.path("plot.svg"),
        levels,
        {"N*e2 greedy U[0,1]": ne},
        title="Uniform greedy sequence",
        xlabel="N",
        ylabel="N * e_2",
        hlines={"J~_2,1": qmc.J_2_1},
    )
    return {
        "limsup_proxy": limsup,
        "liminf_proxy": liminf,
        "zador_limit": qmc.J_2_1,
        "max_residual": float(seq.residuals.max()),
        "levels": len(seq),
    }


def run_greedy1d_normal(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    seq = build_greedy_symmetric(
        normal(0.0, 1.0), n_max=cfg.n_max, solver=cfg.solver or "lloyd"
    )
    _write_1d_sequence(w, seq)
    ne = seq.scaled_distortions()
    levels = np.arange(1, len(ne) + 1)
    odd = levels % 2 == 1
    _, limsup = _window_minmax(ne, min(100, len(ne)), len(ne), mask=odd)
    liminf, _ = _window_minmax(ne, len(ne) // 2, len(ne), mask=odd)
    zador = math.sqrt(1.5) * math.pi**0.25
    write_line_plot(
        w.path("plot.svg"),
        levels[odd],
        {"N*e2 greedy N(0,1)": ne[odd]},
        title="Symmetric greedy sequence, standard normal",
        xlabel="N (odd levels)",
        ylabel="N * e_2",
        hlines={"Zador limit": zador},
    )
    return {
        "limsup_proxy": limsup,
        "liminf_proxy": liminf,
        "zador_limit": zador,
        "max_residual": float(seq.residuals.max()),
        "levels": len(seq),
    }


def run_greedy_nd_normal2(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    factor = int(cfg.m_factor)
    run_cfg = StochasticRunConfig(
        seed=int(cfg.seed),
        samples_per_level=lambda n: factor * n,
        eval_samples=int(cfg.eval_samples),
    )
    seq = build_greedy_nd(
        normal_nd(2), cfg.n_max, run_cfg, solver=cfg.solver or "rlloyd"
    )
    write_grid_csv(w.path("sequence.csv"), Quantizer(seq.points))
    ne = seq.scaled_distortions()
    levels = np.arange(1, len(ne) + 1)
    w.write_csv(
        "trajectory.csv",
        ["N", "e2_hat", "std_error", "sqrtN_e2"],
        [
            (r.level, r.value, r.std_error, float(ne[i]))
            for i, r in enumerate(seq.trajectory)
        ],
    )
    zador = ZADOR_LIMITS[(2.0, 2)]
    win_lo = max(1, (3 * cfg.n_max) // 4)
    win_min, win_max = _window_minmax(ne, win_lo, cfg.n_max)
    write_line_plot(
        w.path("plot.svg"),
        levels,
        {"sqrt(N)*e2 greedy N(0,I2)": ne},
        title="Randomized-Lloyd greedy sequence, bivariate normal",
        xlabel="N",
        ylabel="sqrt(N) * e_2",
        hlines={"Zador limit": zador, "concat bound": math.sqrt(2.0) * zador},
    )
    return {
        "sup_sqrtN_e2": float(ne.max()),
        "window": [win_lo, cfg.n_max],
        "window_min": win_min,
        "window_max": win_max,
        "zador_limit": zador,
        "stationarity_pass": int(seq.stationarity_ok.sum()),
        "stationarity_total": len(seq),
        "m_factor": factor,
    }


def run_vdc_constants(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    traj = qmc.vdc_quantization_constants(cfg.p, cfg.n_max)
    levels = np.arange(1, cfg.n_max + 1)
    w.write_csv(
        "trajectory.csv",
        ["N", "value"],
        [(int(n), float(v)) for n, v in zip(levels, traj.scaled)],
    )
    jt = ZADOR_LIMITS.get((float(cfg.p), 1))
    write_line_plot(
        w.path("plot.svg"),
        levels,
        {f"N*e{cfg.p:g} VdC base 2": traj.scaled},
        title="Van der Corput prefixes under U[0,1]",
        xlabel="N",
        ylabel=f"N * e_{cfg.p:g}",
        hlines={"J~": jt} if jt else None,
    )
    return {
        "p": cfg.p,
        "liminf_proxy": traj.liminf_proxy,
        "limsup_proxy": traj.limsup_proxy,
        "window": list(traj.window),
        "zador_limit": jt,
    }


def run_concat_compare(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    n_levels = max(1, math.ceil(math.log2(cfg.n_max + 1)) + 1)
    points = qmc.concatenated_sequence(n_levels=n_levels)[: cfg.n_max]
    scaled = qmc.scaled_error_trajectory(points, 2.0)
    levels = np.arange(1, len(scaled) + 1)
    w.write_csv(
        "trajectory.csv",
        ["N", "value"],
        [(int(n), float(v)) for n, v in zip(levels, scaled)],
    )
    bound = 2.0 * qmc.J_2_1
    write_line_plot(
        w.path("plot.svg"),
        levels,
        {"N*e2 concatenated": scaled},
        title="Concatenated optimal grids under U[0,1]",
        xlabel="N",
        ylabel="N * e_2",
        hlines={"2 * J~_2,1": bound, "J~_2,1": qmc.J_2_1},
    )
    tail = scaled[63:] if len(scaled) > 64 else scaled
    return {
        "max_scaled": float(scaled.max()),
        "bound": bound,
        "min_scaled_from_64": float(tail.min()),
        "zador_limit": qmc.J_2_1,
    }


def run_mismatch(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    seq = build_greedy_1d(uniform01(), n_max=cfg.n_max)
    results = {}
    series = {}
    levels = np.arange(1, len(seq) + 1)
    for qval in cfg.q:
        scaled = diagnostics.mismatch_trajectory(uniform01(), seq, qval)
        w.write_csv(
            f"trajectory_q{qval:g}.csv",
            ["N", "value"],
            [(int(n), float(v)) for n, v in zip(levels, scaled)],
        )
        series[f"q={qval:g}"] = scaled
        lo_min, lo_max = _window_minmax(scaled, len(seq) // 10, len(seq) // 5)
        hi_min, hi_max = _window_minmax(scaled, len(seq) // 2, len(seq))
        results[f"q{qval:g}"] = {
            "early_window_max": lo_max,
            "late_window_max": hi_max,
            "bounded_ratio": hi_max / lo_max,
        }
    write_line_plot(
        w.path("plot.svg"),
        levels,
        series,
        title="Distortion mismatch on the uniform greedy sequence",
        xlabel="N",
        ylabel="N * e_q",
    )
    return results


def run_cubature_compare(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    """Integration error of greedy cubature (MC Voronoi weights) against
    VdC with uniform weights, on smooth test functions over [0,1]."""
    tests = {"x_squared": (lambda x: x * x, 1.0 / 3.0), "exp": (math.exp, math.e - 1.0)}
    seq = build_greedy_1d(uniform01(), n_max=cfg.n_max)
    vdc_pts = qmc.vdc(2, cfg.n_max)
    grid_sizes = [n for n in (8, 16, 32, 64, 128, 256, 512, 1024) if n <= cfg.n_max]
    rows = []
    for n in grid_sizes:
        qz = Quantizer(seq.points[:n])
        weights = voronoi_weights(
            wrap_1d(uniform01()), qz, int(cfg.mc_weight_samples), int(cfg.seed)
        )
        row = [n]
        for fn, truth in tests.values():
            err_greedy = abs(cubature(fn, qz, weights) - truth)
            err_vdc = abs(cubature(fn, Quantizer(vdc_pts[:n])) - truth)
            row.extend((err_greedy, err_vdc))
        rows.append(tuple(row))
    header = ["N"]
    for name in tests:
        header.extend((f"err_greedy_{name}", f"err_vdc_{name}"))
    w.write_csv("report.csv", header, rows)
    arr = np.array([r[1:] for r in rows])
    write_line_plot(
        w.path("plot.svg"),
        np.array(grid_sizes, dtype=float),
        {header[i + 1]: arr[:, i] for i in range(arr.shape[1])},
        title="Cubature error: greedy (MC weights) vs VdC (uniform weights)",
        xlabel="N",
        ylabel="absolute error",
    )
    return {
        "grid_sizes": grid_sizes,
        "final_row": {header[i + 1]: float(arr[-1, i]) for i in range(arr.shape[1])},
        "mc_weight_samples": int(cfg.mc_weight_samples),
    }


def run_diagnostics(cfg: ExperimentConfig, w: ArtifactWriter) -> dict:
    uni, nor = uniform01(), normal(0.0, 1.0)
    seq_uni = build_greedy_1d(uni, n_max=cfg.n_max)
    seq_nor = build_greedy_symmetric(nor, n_max=cfg.n_max)
    rows = []
    results = {}

    def record(name: str, value: float, flag: str, params: str):
        rows.append((name, value, flag, params))
        results[name] = {"value": value, "flag": flag, "params": params}

    for dist, seq, label in ((uni, seq_uni, "uniform01"), (nor, seq_nor, "normal")):
        est = diagnostics.maximal_function_integral(dist, seq, b=0.25, exponent=2.0 / 3.0)
        record(
            f"maximal_integral_{label}",
            est.value,
            est.flag,
            f"b=0.25 exponent=2/3 N={len(seq)}",
        )
    for dist, qv, label in ((uni, 2.5, "uniform01"), (nor, 2.9, "normal"), (nor, 3.5, "normal")):
        est = diagnostics.zador_integral(dist, p=2.0, q=qv)
        record(f"zador_integral_{label}_q{qv:g}", est.value, est.flag, f"p=2 q={qv}")
    for a1, c, rho in ((1.0, 0.5, 1.0), (1.0, 0.1, 2.0), (0.5, 0.3, 0.5)):
        res = diagnostics.recursion_bound_check(a1, c, rho, n_max=10**5)
        record(
            f"recursion_K_a{a1:g}_c{c:g}_rho{rho:g}",
            res.fitted_k,
            "finite",
            f"A1={a1} C={c} rho={rho} N=1e5",
        )
    w.write_csv("report.csv", ["name", "value", "flag", "parameters"], rows)
    return results


_RUNNERS = {
    "greedy1d_uniform": run_greedy1d_uniform,
    "greedy1d_normal": run_greedy1d_normal,
    "greedy_nd_normal2": run_greedy_nd_normal2,
    "vdc_constants": run_vdc_constants,
    "concat_compare": run_concat_compare,
    "mismatch": run_mismatch,
    "cubature_compare": run_cubature_compare,
    "diagnostics": run_diagnostics,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    w = ArtifactWriter(cfg.output_dir)
    try:
        results = _RUNNERS[cfg.experiment](cfg, w)
    except Exception:
        w.mark_partial()
        raise
    summary = {
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "p": cfg.p,
        "n_max": cfg.n_max,
        "seed": cfg.seed,
        "results": results,
    }
    w.write_json("summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _load_trajectory(run_dir: Path):
    """Return (levels, N*e_p column, p) from one run directory."""
    traj = run_dir / "trajectory.csv"
    if not traj.exists():
        raise FileNotFoundError(f"{run_dir}: no trajectory.csv")
    with open(traj, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    levels = data[:, 0]
    cols = {name: data[:, i] for i, name in enumerate(header)}
    p = 2.0
    summary_path = run_dir / "summary.json"
    if summary_path.exists():
        with open(summary_path) as fh:
            p = float(json.load(fh).get("p", 2.0))
    if "value" in cols:
        scaled = cols["value"]
    elif "sqrtN_e2" in cols:
        scaled = cols["sqrtN_e2"]
    elif "e_p" in cols:
        scaled = levels * cols["e_p"]
    else:
        raise ValueError(f"{traj}: no recognized value column in {header}")
    dim = 2 if "sqrtN_e2" in cols else 1
    return levels.astype(int), scaled, p, dim


def compare_report(run_dirs: list[str | Path], output=None) -> list[list]:
    """Merge per-run trajectories into aligned N*e_p columns with ratios
    against the matching Zador constants."""
    if not run_dirs:
        raise ValueError("compare needs at least one run directory")
    loaded = []
    for rd in run_dirs:
        rd = Path(rd)
        levels, scaled, p, dim = _load_trajectory(rd)
        loaded.append((rd.name or str(rd), levels, scaled, p, dim))
    base = loaded[0][1]
    for name, levels, *_ in loaded[1:]:
        if len(levels) != len(base) or np.any(levels != base):
            raise ValueError(
                f"mismatched N grids: {run_dirs[0]} vs {name} "
                f"({len(base)} vs {len(levels)} rows)"
            )
    header = ["N"]
    for name, _, _, p, dim in loaded:
        header.extend((f"{name}_Ne", f"{name}_ratio"))
    rows = []
    for i, n in enumerate(base):
        row: list = [int(n)]
        for _, _, scaled, p, dim in loaded:
            jt = ZADOR_LIMITS.get((p, dim))
            row.append(float(scaled[i]))
            row.append(float(scaled[i] / jt) if jt else float("nan"))
        rows.append(row)
    table = [header] + rows
    if output is not None:
        with open(output, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in table:
                writer.writerow(
                    [repr(v) if isinstance(v, float) else v for v in row]
                )
    return table


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_TEMPLATE = """\
# greedyq experiment config
experiment = "{name}"
{body}output_dir = "out/{name}"
"""


def gen_config(name: str) -> str:
    if name not in _DEFAULTS:
        raise ConfigError(
            f"unknown experiment {name!r}; choose from " + ", ".join(sorted(_DEFAULTS))
        )
    body = ""
    for key, val in _DEFAULTS[name].items():
        if isinstance(val, str):
            body += f'{key} = "{val}"\n'
        else:
            body += f"{key} = {val}\n"
    if name in _STOCHASTIC and "seed" not in _DEFAULTS[name]:
        body += "seed = 12345\n"
    return _TEMPLATE.format(name=name, body=body)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="greedyq", description="greedy quantization experiment runner"
    )
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run an experiment from a TOML config")
    p_run.add_argument("config")
    p_cmp = sub.add_parser("compare", help="merge run trajectories into a report")
    p_cmp.add_argument("runs", nargs="+")
    p_cmp.add_argument("-o", "--output", default=None)
    p_gen = sub.add_parser("gen-config", help="print a config template")
    p_gen.add_argument("experiment")
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            summary = run_experiment(cfg)
            json.dump(summary, sys.stdout, indent=2, sort_keys=True)
            print()
            return 0
        if args.command == "compare":
            table = compare_report(args.runs, output=args.output)
            if args.output is None:
                writer = csv.writer(sys.stdout)
                for row in table:
                    writer.writerow(row)
            return 0
        if args.command == "gen-config":
            print(gen_config(args.experiment), end="")
            return 0
    except ConfigError as exc:
        print(f"greedyq: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # experiment failure: artifacts kept as .partial
        print(f"greedyq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
