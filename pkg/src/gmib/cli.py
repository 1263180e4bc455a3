"""Command line front end: ``gmib {curve,classify,vector,mnist,baselines}``.

Every command writes a CSV of result rows and a JSON sidecar next to it
(``<out>.json``) echoing the configuration, library version and wall time.

Exit codes: 0 ok, 1 configuration error, 2 I/O or data-format error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .core import LN2, MixtureModel, discretize
from .data import DataFormatError, SingularCovarianceError, UnknownClassError, load_dataset

log = logging.getLogger("gmib")

COMMANDS = ("curve", "classify", "vector", "mnist", "baselines")
ALL_SCHEMES = ("two_level", "det_quant", "soft_lb1", "soft_lb2", "soft", "unified")
ALL_SOLVERS = ("ba", "agg_ib", "seq_ib", "det_ib", "info_dropout")
DEFAULT_BETAS = (0.6, 1.0, math.sqrt(2.0))
WORKERS_ENV = "GMIB_WORKERS"

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# value parsing
# --------------------------------------------------------------------------

_RATE_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(bits|nats)?\s*$")


def parse_rate(text: str, units: Optional[str]) -> float:
    """Rate literal to nats; a ``bits``/``nats`` suffix beats the global ``units``."""
    m = _RATE_RE.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse rate {text!r}")
    value, suffix = float(m.group(1)), m.group(2)
    if suffix is None:
        if units is None:
            raise ConfigError(f"rate {text!r} has no bits/nats suffix and --units is not set")
        suffix = units
    elif units is not None and suffix != units:
        log.warning("rate %r: suffix %s overrides --units %s", text, suffix, units)
    return value * LN2 if suffix == "bits" else value


def parse_grid(text: str, units: Optional[str]) -> list[float]:
    """``start:stop:step`` (stop inclusive) of rate literals, returned in nats.

    A suffix on any part applies to the whole grid.
    """
    parts = [_RATE_RE.match(p) for p in str(text).split(":")]
    if len(parts) != 3 or not all(parts):
        raise ConfigError(f"grid {text!r} must look like start:stop:step")
    suffixes = {m.group(2) for m in parts if m.group(2)}
    if len(suffixes) > 1:
        raise ConfigError(f"grid {text!r} mixes bits and nats")
    unit = suffixes.pop() if suffixes else ""
    start, stop, step = (float(m.group(1)) for m in parts)
    scale = parse_rate("1" + unit, units)
    if step <= 0 or stop < start:
        raise ConfigError(f"grid {text!r} needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [(start + k * step) * scale for k in range(n)]


def parse_float_grid(text: str) -> list[float]:
    parts = [float(p) for p in str(text).split(":")]
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise ConfigError(f"grid {text!r} must look like start:stop:step with step > 0")
    n = int(math.floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1
    return [round(parts[0] + k * parts[2], 12) for k in range(n)]


def parse_floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    vals = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if tok.lower() in ("sqrt2", "sqrt(2)"):
            vals.append(math.sqrt(2.0))
        else:
            vals.append(float(tok))
    return vals


def parse_names(text, allowed: Sequence[str], what: str) -> list[str]:
    names = list(text) if isinstance(text, (list, tuple)) else [t.strip() for t in str(text).split(",")]
    if names == ["all"]:
        return [n for n in allowed if n != "soft"]
    bad = [n for n in names if n not in allowed]
    if bad:
        raise ConfigError(f"unknown {what}: {', '.join(bad)} (choose from {', '.join(allowed)})")
    return names


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    out: str = "results.csv"
    seed: int = 0
    units: Optional[str] = None
    workers: int = 1
    betas: list = field(default_factory=lambda: list(DEFAULT_BETAS))
    rates: list = field(default_factory=list)        # nats
    schemes: list = field(default_factory=lambda: ["unified"])
    mc_n: int = 0
    total_rates: list = field(default_factory=list)  # nats
    allocation: Optional[list] = None                # nats
    mc_samples: int = 100_000
    images: Optional[str] = None
    labels: Optional[str] = None
    data_format: str = "idx"
    classes: list = field(default_factory=lambda: [7, 9])
    d0: int = 3
    budgets: list = field(default_factory=list)      # nats
    class_cap: int = 2000
    train_fraction: float = 0.5
    w_grid: list = field(default_factory=list)
    solvers: list = field(default_factory=lambda: ["ba", "agg_ib", "seq_ib", "det_ib"])
    grid_size: int = 200
    t_size: int = 32
    restarts: int = 5
    lambdas: list = field(default_factory=list)
    m_values: list = field(default_factory=lambda: [2])
    dropout_lambda: float = 10.0

    @property
    def out_units(self) -> str:
        return self.units or "nats"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="JSON file of option values; flags override it")
    common.add_argument("--out", default=S, help="CSV output path (default results.csv); sidecar is <out>.json")
    common.add_argument("--seed", default=S, help="random seed (default 0)")
    common.add_argument("--units", default=S,
                        help="units of bare rate literals and of the output (default nats)")
    common.add_argument("--workers", default=S,
                        help=f"worker processes (default: ${WORKERS_ENV}, else available CPUs)")
    common.add_argument("--beta", "--betas", dest="betas", default=S,
                        help="comma list of beta values (default 0.6,1,sqrt2)")

    p = _Parser(prog="gmib", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def rate_opts(sp):
        sp.add_argument("--r", dest="r", default=S, help="comma list of rates, e.g. 1.3869bits,0.5nats")
        sp.add_argument("--r-grid", default=S, help="start:stop:step rate grid (default 0:3:0.1 nats)")
        sp.add_argument("--schemes", default=S, help=f"comma list or 'all' from {', '.join(ALL_SCHEMES)}")

    sp = sub.add_parser("curve", parents=[common], help="relevance of each scheme over a rate grid")
    rate_opts(sp)
    sp = sub.add_parser("classify", parents=[common], help="closed-form (and optional MC) error")
    rate_opts(sp)
    sp.add_argument("--mc", dest="mc_n", default=S, help="add Monte-Carlo rows with this many samples")
    sp = sub.add_parser("vector", parents=[common], help="per-coordinate unified scheme for vector beta")
    sp.add_argument("--total-rate", default=S, help="comma list of total budgets (with units)")
    sp.add_argument("--allocation", default=S, help="comma list of per-coordinate rates summing to the total")
    sp.add_argument("--mc-samples", default=S, help="Monte-Carlo draws when enumeration is impossible")
    sp = sub.add_parser("mnist", parents=[common], help="projected image classification vs information dropout")
    sp.add_argument("--images", default=S, help="IDX images file or CSV file")
    sp.add_argument("--labels", default=S, help="IDX labels file (default: sibling of --images)")
    sp.add_argument("--format", dest="data_format", default=S, help="idx (default) or csv")
    sp.add_argument("--classes", default=S, help="two digit classes mapped to -1,+1 (default 7,9)")
    sp.add_argument("--d0", default=S, help="projected dimension (default 3)")
    sp.add_argument("--budgets", default=S, help="comma list of total budgets (default 0.5..6 bits)")
    sp.add_argument("--class-cap", default=S, help="samples kept per class (default 2000)")
    sp.add_argument("--train-fraction", default=S)
    sp.add_argument("--w-grid", default=S, help="dropout weight grid start:stop:step (default -10:10:1)")
    sp = sub.add_parser("baselines", parents=[common], help="BA, Agg-IB, Seq-IB, Det-IB, information dropout")
    sp.add_argument("--solvers", default=S, help=f"comma list or 'all' from {', '.join(ALL_SOLVERS)}")
    sp.add_argument("--grid-size", default=S, help="x-grid points (default 200)")
    sp.add_argument("--t-size", default=S, help="|T| for BA and Det-IB (default 32)")
    sp.add_argument("--restarts", default=S, help="restarts for BA and Seq-IB (default 5)")
    sp.add_argument("--lambdas", default=S, help="comma list, or lo:hi:count geometric (default 1.05:200:40)")
    sp.add_argument("--m", dest="m_values", default=S, help="cluster counts for Agg/Seq-IB (default 2)")
    sp.add_argument("--w-grid", default=S, help="dropout weight grid start:stop:step (default -10:10:0.1)")
    sp.add_argument("--dropout-lambda", default=S)
    return p


def _default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}={env!r} is not an integer") from None
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Merge built-in defaults, an optional JSON file and command-line flags."""
    ns, unknown = _build_parser().parse_known_args(argv)
    ns = vars(ns)
    errors: list[str] = [f"{tok}: unknown option" for tok in unknown if tok.startswith("-")]
    errors += [f"{tok}: unexpected argument" for tok in unknown if not tok.startswith("-")]
    raw: dict[str, Any] = {}
    if "config" in ns:
        try:
            with open(ns.pop("config")) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    raw.update(ns)
    command = raw.pop("command")
    cfg = RunConfig(command=command)

    def take(key, conv, target=None):
        if key in raw:
            try:
                setattr(cfg, target or key, conv(raw.pop(key)))
            except (ConfigError, ValueError, TypeError) as exc:
                errors.append(f"{key}: {exc}")

    take("units", _check_units)
    take("dropout_lambda", float)
    units = cfg.units
    take("out", str)
    take("seed", int)
    take("betas", parse_floats)
    take("r", lambda v: [parse_rate(t, units) for t in (v if isinstance(v, list) else str(v).split(","))], "rates")
    take("r_grid", lambda v: parse_grid(v, units), "rates")
    take("schemes", lambda v: parse_names(v, ALL_SCHEMES, "scheme"))
    take("mc_n", int)
    take("total_rate", lambda v: [parse_rate(t, units) for t in (v if isinstance(v, list) else str(v).split(","))],
         "total_rates")
    take("allocation", lambda v: [parse_rate(t, units) for t in (v if isinstance(v, list) else str(v).split(","))])
    take("mc_samples", int)
    take("images", str)
    take("labels", str)
    take("data_format", _check_format)
    take("classes", lambda v: [int(c) for c in parse_floats(v)])
    take("d0", int)
    take("budgets", lambda v: [parse_rate(t, units) for t in (v if isinstance(v, list) else str(v).split(","))])
    take("class_cap", int)
    take("train_fraction", float)
    take("w_grid", parse_float_grid)
    take("solvers", lambda v: parse_names(v, ALL_SOLVERS, "solver"))
    take("grid_size", int)
    take("t_size", int)
    take("restarts", int)
    take("lambdas", _parse_lambdas)
    take("m_values", lambda v: [int(c) for c in parse_floats(v)])
    if "workers" in raw:
        take("workers", int)
    else:
        try:
            cfg.workers = _default_workers()
        except ConfigError as exc:
            errors.append(str(exc))
    for key in raw:
        errors.append(f"{key}: unknown option")
    errors += _validate(cfg)
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


def _check_format(v) -> str:
    if v not in ("idx", "csv"):
        raise ConfigError("must be idx or csv")
    return v


def _check_units(v) -> str:
    if v not in ("bits", "nats"):
        raise ConfigError("must be bits or nats")
    return v


def _parse_lambdas(v) -> list[float]:
    if isinstance(v, list):
        return [float(x) for x in v]
    if ":" in str(v):
        lo, hi, n = str(v).split(":")
        return list(np.geomspace(float(lo), float(hi), int(n)))
    return parse_floats(v)


def _validate(cfg: RunConfig) -> list[str]:
    errs = []
    if cfg.command not in COMMANDS:
        errs.append(f"command: must be one of {', '.join(COMMANDS)}")
    if not cfg.betas or any(not math.isfinite(b) or b < 0 for b in cfg.betas):
        errs.append("betas: need at least one finite non-negative value")
    if any(r < 0 for r in cfg.rates + cfg.total_rates + cfg.budgets):
        errs.append("rates: must be non-negative")
    if cfg.workers < 1:
        errs.append("workers: must be at least 1")
    if cfg.mc_n and cfg.mc_n < 1000:
        errs.append("mc_n: need at least 1000 samples")
    if cfg.command == "vector":
        if not cfg.total_rates and cfg.allocation is None:
            errs.append("total_rate: required for the vector command")
        if cfg.allocation is not None:
            if len(cfg.allocation) != len(cfg.betas):
                errs.append("allocation: needs one rate per beta")
            for tot in cfg.total_rates:
                if abs(math.fsum(cfg.allocation) - tot) > 1e-9:
                    errs.append(f"allocation: sums to {math.fsum(cfg.allocation)}, total rate is {tot}")
    if cfg.command == "mnist":
        if not cfg.images:
            errs.append("images: required for the mnist command")
        if len(cfg.classes) != 2:
            errs.append("classes: need exactly two classes")
        if not 0 < cfg.train_fraction < 1:
            errs.append("train_fraction: must lie in (0, 1)")
    if cfg.command == "baselines":
        if cfg.grid_size < 8:
            errs.append("grid_size: must be at least 8")
        if cfg.t_size < 2:
            errs.append("t_size: must be at least 2")
        if cfg.restarts < 1:
            errs.append("restarts: must be at least 1")
        if any(l <= 0 for l in cfg.lambdas):
            errs.append("lambdas: must be positive")
    return errs


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".9g")
    return str(v)


def _param_str(params: dict) -> str:
    parts = []
    for k in sorted(params):
        v = params[k]
        if isinstance(v, (list, tuple)):
            v = "[" + " ".join(fmt(x) for x in v) + "]"
        elif isinstance(v, dict):
            continue
        else:
            v = fmt(v)
        parts.append(f"{k}={v}")
    return ";".join(parts)


@dataclass
class Row:
    scheme: str
    beta: Any
    rate: float
    value: float
    stderr: Optional[float] = None
    converged: bool = True
    params: dict = field(default_factory=dict)


def write_csv(path: Path, rows: Sequence[Row], value_name: str, units: str, value_is_info: bool) -> None:
    scale = (1.0 / LN2) if units == "bits" else 1.0
    vname = f"{value_name}_{units}" if value_is_info else value_name
    lines = [f"scheme,beta,rate_{units},{vname},stderr,converged,params"]
    for r in rows:
        beta = r.beta if isinstance(r.beta, str) else fmt(r.beta)
        value = r.value * scale if value_is_info else r.value
        lines.append(",".join([r.scheme, beta, fmt(r.rate * scale), fmt(value), fmt(r.stderr),
                               fmt(bool(r.converged)), _param_str(r.params)]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_results(path) -> list[dict]:
    """Load a CSV written by this tool, re-checking ``relevance <= min(rate, ln 2)``."""
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        units = header[2].split("_", 1)[1]
        ln2 = 1.0 if units == "bits" else LN2
        info = header[3].startswith("relevance")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            fields = line.rstrip("\n").split(",", 6)
            rec = dict(zip(header, fields))
            rate, val = float(fields[2]), float(fields[3])
            if info and not val <= min(rate, ln2) + 1e-6:
                raise ValueError(f"line {lineno}: relevance {val} exceeds min(rate, ln 2)")
            rows.append(rec)
    return rows


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _pool_map(fn, tasks, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _curve_task(task):
    from .experiments import scheme_point
    from .schemes import best_soft
    scheme, beta, R = task
    model = MixtureModel(beta)
    if scheme == "soft":
        pt = best_soft(R, model)
    else:
        pt = scheme_point(scheme, R, model)
    if pt is None:
        return None
    params = {k: v for k, v in pt.params.items() if k in ("q", "alpha", "delta", "levels", "winner")}
    if scheme == "soft":
        params["winner"] = pt.scheme
    return Row(scheme, beta, R, pt.relevance, None, pt.converged, params)


def _classify_task(task):
    from .experiments import error_point
    from .schemes import best_soft
    from .classify import err_soft
    scheme, beta, R = task
    model = MixtureModel(beta)
    if scheme == "soft":
        pt = best_soft(R, model)
        e = err_soft(pt.params["alpha"], model)
        return Row("soft", beta, e.rate, e.error, None, True, {"alpha": pt.params["alpha"], "budget": R,
                                                               "winner": pt.scheme})
    e = error_point(scheme, R, model)
    if e is None:
        return None
    return Row(scheme, beta, e.rate, e.error, None, True, {"budget": R})


def _mc_task(task):
    from .classify import mc_error
    from .experiments import scheme_point
    from .schemes import best_soft
    scheme, beta, R, n, seed = task
    model = MixtureModel(beta)
    pt = best_soft(R, model) if scheme == "soft" else scheme_point(scheme, R, model)
    if pt is None:
        return None
    e = mc_error(pt, model, n, seed)
    return Row(f"{scheme}_mc", beta, pt.rate, e.error, e.stderr, True, {"budget": R, "n": n})


def _rates_or_default(cfg: RunConfig) -> list[float]:
    return cfg.rates or [round(0.1 * k, 12) for k in range(31)]


def run_curve(cfg: RunConfig) -> tuple[list[Row], str, bool]:
    tasks = [(s, b, R) for b in cfg.betas for s in cfg.schemes for R in _rates_or_default(cfg)]
    rows = [r for r in _pool_map(_curve_task, tasks, cfg.workers) if r is not None]
    return rows, "relevance", True


def run_classify(cfg: RunConfig) -> tuple[list[Row], str, bool]:
    grid = _rates_or_default(cfg)
    tasks = [(s, b, R) for b in cfg.betas for s in cfg.schemes for R in grid]
    rows = [r for r in _pool_map(_classify_task, tasks, cfg.workers) if r is not None]
    if cfg.mc_n:
        seeds = np.random.SeedSequence(cfg.seed).generate_state(len(tasks))
        mc = [(s, b, R, cfg.mc_n, int(sd)) for (s, b, R), sd in zip(tasks, seeds)]
        rows += [r for r in _pool_map(_mc_task, mc, cfg.workers) if r is not None]
    return rows, "error", False


def run_vector(cfg: RunConfig) -> tuple[list[Row], str, bool]:
    from .vector import RateAllocation, VectorModel, equal_allocation, vector_unified
    model = VectorModel(tuple(cfg.betas))
    beta_str = "[" + " ".join(fmt(b) for b in cfg.betas) + "]"
    rows = []
    allocs = ([RateAllocation(tuple(cfg.allocation))] if cfg.allocation is not None
              else [equal_allocation(R, model.d0) for R in cfg.total_rates])
    for k, alloc in enumerate(allocs):
        pt = vector_unified(model, alloc, cfg.mc_samples, cfg.seed + k, cfg.workers)
        params = {"method": pt.params["method"], "winners": pt.params["winners"],
                  "allocation": pt.params["allocation"]}
        rows.append(Row("vector_unified", beta_str, pt.rate, pt.relevance, pt.params.get("stderr"),
                        True, params))
    return rows, "relevance", True


def run_mnist(cfg: RunConfig) -> tuple[list[Row], str, bool]:
    from .experiments import image_experiment
    data = load_dataset(cfg.images, cfg.data_format, tuple(cfg.classes), cfg.labels)
    budgets_bits = [b / LN2 for b in cfg.budgets] if cfg.budgets else (0.5, 1, 1.5, 2, 3, 4, 6)
    res = image_experiment(data, budgets_bits, cfg.d0, cfg.seed, cfg.class_cap, cfg.train_fraction,
                           cfg.w_grid or None)
    rows = []
    for r in res:
        params = {k: v for k, v in r.params.items() if k != "betas"}
        if not math.isnan(r.budget):
            params["budget"] = r.budget
        rows.append(Row(r.method, "[" + " ".join(fmt(b) for b in r.params["betas"]) + "]",
                        r.leakage, r.error, r.stderr, True, params))
    return rows, "error", False


def run_baselines(cfg: RunConfig) -> tuple[list[Row], str, bool]:
    from .solvers import agg_ib, ba_curve, default_lambdas, det_ib, info_dropout_curve, seq_ib
    rows = []
    lambdas = cfg.lambdas or list(default_lambdas())
    for b in cfg.betas:
        model = MixtureModel(b)
        joint = discretize(model, cfg.grid_size)
        if "ba" in cfg.solvers:
            for pt in ba_curve(joint, lambdas, cfg.restarts, cfg.seed, cfg.t_size):
                if not pt.converged:
                    log.warning("BA did not converge at lambda=%s (beta=%s)", pt.params["lambda"], b)
                rows.append(Row("ba", b, pt.rate, pt.relevance, None, pt.converged,
                                {"lambda": pt.params["lambda"]}))
        for m in cfg.m_values:
            if "agg_ib" in cfg.solvers:
                _, pt = agg_ib(joint, m)
                rows.append(Row("agg_ib", b, pt.rate, pt.relevance, None, True, {"m": m}))
            if "seq_ib" in cfg.solvers:
                _, pt = seq_ib(joint, m, cfg.seed, cfg.restarts)
                rows.append(Row("seq_ib", b, pt.rate, pt.relevance, None, pt.converged, {"m": m}))
        if "det_ib" in cfg.solvers:
            for lam in lambdas:
                _, pt = det_ib(joint, lam, cfg.t_size, cfg.seed)
                rows.append(Row("det_ib", b, pt.rate, pt.relevance, None, pt.converged,
                                {"lambda": lam, "clusters": pt.params["clusters"]}))
        if "info_dropout" in cfg.solvers:
            grid = cfg.w_grid or None
            for pt in info_dropout_curve(model, grid, grid, cfg.dropout_lambda, seed=cfg.seed):
                rows.append(Row("info_dropout", b, pt.rate, pt.relevance, None, True,
                                {k: v for k, v in pt.params.items()}))
    return rows, "relevance", True


RUNNERS = {"curve": run_curve, "classify": run_classify, "vector": run_vector,
           "mnist": run_mnist, "baselines": run_baselines}


def run(cfg: RunConfig) -> int:
    start = time.perf_counter()
    rows, value_name, is_info = RUNNERS[cfg.command](cfg)
    out = Path(cfg.out)
    write_csv(out, rows, value_name, cfg.out_units, is_info)
    sidecar = {"config": asdict(cfg), "version": __version__,
               "wall_time_s": round(time.perf_counter() - start, 3), "rows": len(rows)}
    with open(str(out) + ".json", "w", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(format="gmib: warning: %(message)s", level=logging.WARNING)
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"gmib: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DataFormatError, UnknownClassError) as exc:
        print(f"gmib: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError, SingularCovarianceError, ValueError) as exc:
        print(f"gmib: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
