"""Batch command line front end.

Every subcommand reads an INI config file, writes one data file and a
``<out>.manifest.json`` describing how it was produced. Outputs depend only
on the config and the seed, never on the thread count.

Usage::

    drivencft heatmap --config configs/fig3a.cfg --out fig3a.csv
    drivencft scaling --config configs/fig4b.cfg --threads 4 --seed 7

Config keys (section named after the subcommand; ``[run]`` holds ``seed``,
``threads`` and ``format``). Grids are ``start:stop:count`` or comma lists.

heatmap
    axes = params | trace | points
    t0_over_L, t1_over_L (params) or p, q (trace) grids;
    points = p,q; p,q; ... (points)
    q_bound = 50, p_bound = 2500, maxiter = 64
preimages
    order = 8, p_max = 40, samples = 2001, eps (default 4 p_max / samples)
entropy
    mode = tm | drive | combined
    tm: point = p,q  or  t0_over_L, t1_over_L; n_max = 30
    drive: t0_over_L, t1_over_L, law (e.g. tm:6, rmd:eta=1,blocks=100,seed=3);
        lattice = false, lattice_L = 600
    combined: delta, lambda, gamma = pi/2, law
    c = 1, boundary = periodic | open-half-chain
scaling
    family = fixed_point | preimage, eta = 0,1,2, K grid, realizations = 50,
    S_star = 10, T0_over_L = 2/3, ell1 = 0, xi, max_steps
phase
    delta, lambda grids, gamma = pi/2, steps = 1048576, lyap_threshold = 1e-3

Environment: ``CFTDRIVE_SEED`` and ``CFTDRIVE_THREADS`` override the config
(command line flags override both).

Exit codes: 0 success, 2 configuration error, 3 numeric error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import tracemap as tm
from .drive import Protocol, StepSpec, mix, parse_law
from .entropy import EntropyBoundary, protocol_entropy_series, tm_entropy_series
from .errors import NumericError
from .mobius import DeformationParams, build_u0, build_u1
from .nonhermitian import CombinedParams, combined_protocol, phase_diagram
from .rmd import Family, RmdParams, ensemble_lifetime, scaling_fit

ENV_PREFIX = "CFTDRIVE_"
SUBCOMMANDS = ("heatmap", "preimages", "entropy", "scaling", "phase")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


def fmt(x) -> str:
    """Full-precision scientific notation (17 significant digits)."""
    return f"{float(x):.16e}"


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace), a comma list, or a number."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ConfigError(f"grid count must be >= 1 in {text!r}")
            return np.linspace(float(_num(a)), float(_num(b)), n)
        return np.array([_num(x) for x in text.split(",") if x.strip()], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from None


def _num(s: str) -> float:
    s = s.strip()
    if "/" in s:
        a, b = s.split("/")
        return _num(a) / _num(b)
    return math.pi if s == "pi" else float(s)


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    seed: int = 0
    threads: Optional[int] = None
    out: Path = Path("out.csv")
    format: str = "csv"
    source: str = ""
    echo: dict = field(default_factory=dict)

    def get(self, key, default=None, conv=str):
        key = key.lower()  # configparser folds option names
        if key not in self.params:
            if default is None:
                raise ConfigError(f"[{self.subcommand}] needs {key!r}")
            return default
        try:
            return conv(self.params[key])
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad value for {key!r}: {self.params[key]!r} ({exc})") from None


def load_config(args) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
    run = dict(cp["run"]) if cp.has_section("run") else {}
    sub = args.subcommand or run.get("subcommand")
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {sub!r}")
    params = dict(cp[sub]) if cp.has_section(sub) else {}
    seed = run.get("seed", "0")
    seed = os.environ.get(ENV_PREFIX + "SEED", seed)
    if args.seed is not None:
        seed = args.seed
    threads = run.get("threads", "auto")
    threads = os.environ.get(ENV_PREFIX + "THREADS", threads)
    if args.threads is not None:
        threads = args.threads
    fmt_ = args.format or run.get("format", "csv")
    try:
        seed = int(str(seed), 0)
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed out of 64-bit range")
        threads = None if str(threads) in ("auto", "0") else int(threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if fmt_ not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt_!r}")
    out = Path(args.out or run.get("out", f"{sub}.{fmt_}"))
    if not out.parent.exists():
        raise ConfigError(f"output directory {out.parent} does not exist")
    echo = {"run": {"seed": seed, "format": fmt_}, sub: params}
    return RunConfig(sub, params, seed, threads, out, fmt_, args.config or "", echo)


# -- writers ---------------------------------------------------------------

def _render(columns, rows, form: str) -> str:
    if form == "json":
        return json.dumps({"columns": list(columns), "rows": [list(r) for r in rows]}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def write_table(path: Path, columns, rows, form: str) -> None:
    path.write_text(_render(columns, rows, form))


def _sidecar(path: Path, tag: str, form: str) -> Path:
    return path.with_name(f"{path.stem}.{tag}.{form}")


def write_manifest(cfg: RunConfig, cells: int, seed_rule: str, started: float, outputs) -> Path:
    man = {
        "config": cfg.echo,
        "config_file": cfg.source,
        "subcommand": cfg.subcommand,
        "code_version": __version__,
        "seed": cfg.seed,
        "seed_rule": seed_rule,
        "cell_count": cells,
        "outputs": [str(p.name) for p in outputs],
        "wall_clock": round(time.time() - started, 3),
    }
    path = cfg.out.with_name(cfg.out.name + ".manifest.json")
    path.write_text(json.dumps(man, indent=1, sort_keys=True) + "\n")
    return path


def _pool_map(fn, items, threads):
    items = list(items)
    n = min(threads or (os.cpu_count() or 1), max(1, len(items)))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(n) as ex:
        return list(ex.map(fn, items))


# -- subcommands -----------------------------------------------------------

def cmd_heatmap(cfg: RunConfig):
    axes = cfg.get("axes", "params")
    qb = cfg.get("q_bound", 50.0, float)
    pb = cfg.get("p_bound", 2500.0, float)
    maxiter = cfg.get("maxiter", 64, int)
    if axes == "params":
        t0 = cfg.get("t0_over_L", conv=parse_grid)
        t1 = cfg.get("t1_over_L", conv=parse_grid)
        T0, T1 = np.meshgrid(t0, t1, indexing="ij")
        T0, T1 = T0.ravel(), T1.ravel()
        pts = np.array([tm.initial_condition_from_params(a, b)[:2] for a, b in zip(T0, T1)]).reshape(-1, 2)
    elif axes in ("trace", "points"):
        if axes == "trace":
            P, Q = np.meshgrid(cfg.get("p", conv=parse_grid), cfg.get("q", conv=parse_grid), indexing="ij")
            pts = np.column_stack([P.ravel(), Q.ravel()])
        else:
            pts = np.array([[_num(x) for x in item.split(",")] for item in cfg.get("points").split(";")
                            if item.strip()]).reshape(-1, 2)
        T0, T1 = [], []
        for p, q in pts:
            try:
                a, b = tm.params_from_trace_point((p, q))
            except tm.NoRootError:
                a = b = math.nan
            T0.append(a)
            T1.append(b)
        T0, T1 = np.array(T0), np.array(T1)
    else:
        raise ConfigError(f"unknown axes {axes!r}")
    chunks = np.array_split(np.arange(len(pts)), max(1, min(len(pts), 64)))
    parts = _pool_map(lambda ix: tm.escape_time_grid(pts[ix, 0], pts[ix, 1], qb, pb, maxiter), chunks, cfg.threads)
    nstar = np.concatenate(parts) if parts else np.empty(0, int)
    rows = [[fmt(a), fmt(b), fmt(p), fmt(q), int(n)] for a, b, (p, q), n in zip(T0, T1, pts, nstar)]
    write_table(cfg.out, ["t0_over_L", "t1_over_L", "p1", "q1", "n_star"], rows, cfg.format)
    return len(rows), "deterministic (no randomness)", [cfg.out]


def cmd_preimages(cfg: RunConfig):
    order = cfg.get("order", 8, int)
    p_max = cfg.get("p_max", 40.0, float)
    samples = cfg.get("samples", 2001, int)
    eps = cfg.get("eps", 4 * p_max / max(1, samples - 1), float)
    rows = []
    # an empty p window has no preimages: header-only output
    for k, pts in (tm.preimage_layers(order, p_max, samples, eps) if p_max > 0 else ()):
        rows.extend([k, fmt(p), fmt(q)] for p, q in pts)
    write_table(cfg.out, ["order", "p", "q"], rows, cfg.format)
    return len(rows), "deterministic (no randomness)", [cfg.out]


def _boundary(cfg):
    return EntropyBoundary(cfg.get("boundary", "periodic"))


def cmd_entropy(cfg: RunConfig):
    mode = cfg.get("mode", "tm")
    c = cfg.get("c", 1.0, float)
    bnd = _boundary(cfg)
    series = []
    if mode == "tm":
        if "point" in cfg.params:
            p, q = (_num(x) for x in cfg.params["point"].split(","))
            t0, t1 = tm.params_from_trace_point((p, q))
        else:
            t0, t1 = cfg.get("t0_over_L", conv=_num), cfg.get("t1_over_L", conv=_num)
        s = tm_entropy_series(build_u0(t0, 1.0), build_u1(t1, 1.0), n_max=cfg.get("n_max", 30, int), c=c,
                              boundary=bnd, durations=(t0, t1))
        series.append(s)
    elif mode == "drive":
        t0, t1 = cfg.get("t0_over_L", conv=_num), cfg.get("t1_over_L", conv=_num)
        law = parse_law(cfg.get("law"))
        pr = Protocol(StepSpec.from_deformation(DeformationParams(1, 0, 0), t0),
                      StepSpec.from_deformation(DeformationParams(1, 1, 0), t1), law)
        series.append(protocol_entropy_series(pr, c, bnd))
        if cfg.get("lattice", "false").lower() in ("1", "true", "yes"):
            from .fermion import LatticeSpec, run_protocol_lattice
            series.append(run_protocol_lattice(LatticeSpec(cfg.get("lattice_L", 600, int)), pr))
    elif mode == "combined":
        cp = CombinedParams(cfg.get("delta", conv=_num), cfg.get("lambda", conv=_num), cfg.get("gamma", math.pi / 2, _num))
        series.append(protocol_entropy_series(combined_protocol(cp, parse_law(cfg.get("law"))), c, bnd))
    else:
        raise ConfigError(f"unknown entropy mode {mode!r}")
    with_source = len(series) > 1
    rows = [r for s in series for r in s.rows(with_source)]
    cols = ["n_or_step", "phys_time", "dS_real", "dS_imag_residual"] + (["source"] if with_source else [])
    write_table(cfg.out, cols, rows, cfg.format)
    return len(rows), "law seed as configured (stream value = mix(seed, block index))", [cfg.out]


def cmd_scaling(cfg: RunConfig):
    family = Family(cfg.get("family", "fixed_point"))
    etas = [int(e) for e in cfg.get("eta", conv=parse_grid)]
    Ks = cfg.get("K", conv=parse_grid)
    n = cfg.get("realizations", 50, int)
    S_star = cfg.get("S_star", 10.0, float)
    max_steps = cfg.get("max_steps", 2 ** 34, int)
    extra = dict(family=family, ell1=cfg.get("ell1", 0, int), T0_over_L=cfg.get("T0_over_L", 2 / 3, _num))
    if "xi" in cfg.params:
        extra["xi"] = cfg.get("xi", conv=int)
    rows, fits, cell = [], [], 0
    for eta in etas:
        pts = []
        for K in Ks:
            rp = RmdParams(int(eta), float(K), **extra)
            cell_seed = mix(cfg.seed, cell)
            st = ensemble_lifetime(rp, n, cell_seed, S_star, max_steps=max_steps, threads=cfg.threads)
            rows.append([family.value, rp.eta, rp.xi, fmt(K), fmt(st.t_star), fmt(st.stderr), n, cell_seed])
            pts.append((K, st.t_star))
            cell += 1
        if len(pts) >= 3 and all(t > 0 for _, t in pts):
            f = scaling_fit(pts)
            fits.append([family.value, int(eta), rp.xi, fmt(f.slope), fmt(f.intercept), fmt(f.stderr)])
    write_table(cfg.out, ["family", "eta", "xi", "K", "t_star_mean", "t_star_stderr", "realizations", "seed"],
                rows, cfg.format)
    fit_path = _sidecar(cfg.out, "fits", cfg.format)
    write_table(fit_path, ["family", "eta", "xi", "slope", "intercept", "stderr"], fits, cfg.format)
    return cell, "cell seed = mix(seed, cell index); realization seed = mix(cell seed, realization index)", \
        [cfg.out, fit_path]


def cmd_phase(cfg: RunConfig):
    deltas = cfg.get("delta", conv=parse_grid)
    lambdas = cfg.get("lambda", conv=parse_grid)
    pd = phase_diagram(deltas, lambdas, cfg.get("gamma", math.pi / 2, _num), cfg.get("steps", 2 ** 20, int),
                       cfg.get("lyap_threshold", 1e-3, float), threads=cfg.threads)
    rows = [[fmt(d), fmt(l), lab.value, fmt(ly), fmt(r)] for d, l, lab, ly, r in pd.rows()]
    write_table(cfg.out, ["delta", "lambda", "label", "lyapunov", "residual"], rows, cfg.format)
    bpath = _sidecar(cfg.out, "boundary", cfg.format)
    write_table(bpath, ["delta", "lambda"], [[fmt(d), fmt(l)] for d, l in pd.boundary], cfg.format)
    return len(rows), "deterministic (no randomness)", [cfg.out, bpath]


COMMANDS = {"heatmap": cmd_heatmap, "preimages": cmd_preimages, "entropy": cmd_entropy,
            "scaling": cmd_scaling, "phase": cmd_phase}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drivencft", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS,
                    help="figure pipeline to run (default: [run] subcommand in the config)")
    ap.add_argument("--config", metavar="PATH", help="INI config file")
    ap.add_argument("--seed", metavar="U64", help="64-bit seed (default 0)")
    ap.add_argument("--threads", metavar="N", help="worker threads (default auto)")
    ap.add_argument("--out", metavar="PATH", help="output file (default <subcommand>.<format>)")
    ap.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        cfg = load_config(args)
        cells, rule, outputs = COMMANDS[cfg.subcommand](cfg)
        write_manifest(cfg, cells, rule, started, outputs)
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
