"""Command-line front end: closed forms, simulation, validation, sweeps.

Four subcommands over the library:

    analytic   evaluate the closed forms for one parameter set (JSON)
    simulate   run seeded replications and report estimates (JSON)
    validate   analytic-vs-simulated table with z-scores (CSV, exit 1
               on any |z| above threshold)
    sweep      correlation coefficient over a lambda_1 grid for one or
               more mu values (CSV, one row per grid point)

Options resolve as: explicit flags beat values from --config (a flat JSON
object keyed by flag name with dashes as underscores), which beat built-in
defaults.  Every subcommand honors --seed; when omitted, a seed is drawn
from OS entropy and printed so the run can be reproduced.  Output carries
no timestamps, so identical invocations produce identical bytes.

Exit codes: 0 success, 1 validation exceedance, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, analytics, estimators, simulator
from .errors import (
    EmptySourceList,
    IndexOutOfRange,
    InsufficientReplications,
    InsufficientSamples,
    NegativeTransformArgument,
    NonPositiveRate,
    RequiresTwoSources,
)
from .model import (
    ModelParams,
    effective_update_rate,
    valid_packet_probability,
    validate as validate_params,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2

_CONFIG_ERRORS = (
    NonPositiveRate,
    EmptySourceList,
    IndexOutOfRange,
    NegativeTransformArgument,
    RequiresTwoSources,
    InsufficientReplications,
    InsufficientSamples,
    ValueError,
)


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"{flag} expects a comma-separated list of numbers, got {text!r}")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("--config file must hold a JSON object")
    return cfg


def _resolve(args: argparse.Namespace, config: dict, key: str, default=None):
    """Flag value if given, else config value, else default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return default


def _resolve_params(args: argparse.Namespace, config: dict) -> ModelParams:
    lambdas = _resolve(args, config, "lambdas")
    mu = _resolve(args, config, "mu")
    if lambdas is None:
        raise ValueError("missing required option --lambdas")
    if mu is None:
        raise ValueError("missing required option --mu")
    if isinstance(lambdas, str):
        lambdas = _parse_float_list(lambdas, "--lambdas")
    if isinstance(mu, str):
        mu = float(mu)
    return validate_params(lambdas, mu)


def _resolve_seed(args: argparse.Namespace, config: dict) -> int:
    seed = _resolve(args, config, "seed")
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
        print(f"seed drawn from entropy: {seed}", file=sys.stderr)
    return int(seed)


def _resolve_s_grid(args, config, p: ModelParams) -> np.ndarray:
    raw = _resolve(args, config, "s_grid")
    if raw is None:
        return np.stack(
            [estimators.default_s_grid(p, k) for k in range(1, p.n_sources + 1)]
        )
    if isinstance(raw, str):
        raw = _parse_float_list(raw, "--s-grid")
    grid = np.asarray(raw, dtype=float)
    if grid.size == 0:
        raise ValueError("--s-grid must contain at least one point")
    if np.any(grid <= 0.0):
        raise NegativeTransformArgument("--s-grid points must be > 0")
    return np.tile(grid, (p.n_sources, 1))


@contextlib.contextmanager
def _out_stream(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _emit_json(payload: dict, path: str | None) -> None:
    with _out_stream(path) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# analytic
# ---------------------------------------------------------------------------

def cmd_analytic(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    p = _resolve_params(args, config)
    s_grids = _resolve_s_grid(args, config, p)
    which = range(1, p.n_sources + 1) if args.source is None else [args.source]

    report: dict = {
        "params": p.to_dict(),
        "valid_packet_probability": valid_packet_probability(p),
        "sources": [],
    }
    for k in which:
        grid = s_grids[k - 1]
        report["sources"].append({
            "source": k,
            "mean_age": analytics.mean_aoi(p, k),
            "var_age": analytics.var_aoi(p, k),
            "effective_update_rate": effective_update_rate(p, k),
            "mean_update_interval": analytics.source_interval_mean(p, k),
            "lst": {
                "s": grid.tolist(),
                "value": np.asarray(analytics.aoi_lst(p, k, grid)).tolist(),
            },
        })
    if p.n_sources == 2:
        report["correlation"] = analytics.correlation_coefficient(p).to_dict()
    _emit_json(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _resolve_run_options(args, config) -> dict:
    opts = {
        "arrivals": _resolve(args, config, "arrivals"),
        "sim_time": _resolve(args, config, "sim_time"),
        "reps": int(_resolve(args, config, "reps", 30)),
        "warmup_frac": float(
            _resolve(args, config, "warmup_frac", simulator.DEFAULT_WARMUP_FRAC)
        ),
    }
    if opts["arrivals"] is not None:
        opts["arrivals"] = int(opts["arrivals"])
    if opts["sim_time"] is not None:
        opts["sim_time"] = float(opts["sim_time"])
    if opts["reps"] < 1:
        raise ValueError(f"--reps must be >= 1, got {opts['reps']}")
    return opts


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    p = _resolve_params(args, config)
    seed = _resolve_seed(args, config)
    s_grids = _resolve_s_grid(args, config, p)
    opts = _resolve_run_options(args, config)

    paths = simulator.run_replications(
        p,
        opts["reps"],
        seed,
        arrivals=opts["arrivals"],
        sim_time=opts["sim_time"],
        warmup_frac=opts["warmup_frac"],
    )
    est = estimators.aggregate_replications(paths, s_grids)
    payload = est.to_dict()
    payload["base_seed"] = seed
    payload["rng"] = simulator.RNG_NAME
    payload["horizon"] = {
        "arrivals": opts["arrivals"],
        "sim_time": opts["sim_time"],
        "warmup_frac": opts["warmup_frac"],
    }
    if args.dump_path is not None:
        with open(args.dump_path, "w") as fh:
            paths[0].to_csv(fh)
        payload["path_csv"] = args.dump_path
    _emit_json(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    p = _resolve_params(args, config)
    seed = _resolve_seed(args, config)
    s_grids = _resolve_s_grid(args, config, p)
    opts = _resolve_run_options(args, config)
    threshold = float(_resolve(args, config, "z_threshold", 4.0))
    if opts["reps"] < 2:
        raise ValueError("validate needs --reps >= 2 for standard errors")

    paths = simulator.run_replications(
        p,
        opts["reps"],
        seed,
        arrivals=opts["arrivals"],
        sim_time=opts["sim_time"],
        warmup_frac=opts["warmup_frac"],
    )
    table = estimators.build_validation_table(paths, s_grids)
    with _out_stream(args.out) as fh:
        table.to_csv(fh)
    offenders = table.offenders(threshold)
    if offenders:
        for r in offenders:
            print(
                f"EXCEEDED |z|<={threshold:g}: {r.quantity} "
                f"analytic={r.analytic:.6g} simulated={r.simulated:.6g} z={r.z:.3f}",
                file=sys.stderr,
            )
        return EXIT_VALIDATION
    print(
        f"all {len(table.rows)} quantities within |z| <= {threshold:g} "
        f"(max |z| = {table.max_abs_z:.3f})",
        file=sys.stderr,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """Correlation sweep: lambda_1 varies over a grid, lambda_2 is fixed,
    one curve per mu value."""

    lambda1_grid: tuple[float, ...]
    lambda2: float
    mus: tuple[float, ...]
    mode: str = "analytic"
    reps: int = 10
    arrivals: int | None = None
    base_seed: int = 0
    warmup_frac: float = simulator.DEFAULT_WARMUP_FRAC

    def __post_init__(self) -> None:
        if len(self.lambda1_grid) == 0:
            raise ValueError("sweep grid is empty")
        if len(self.mus) == 0:
            raise ValueError("sweep needs at least one mu value")
        if self.mode not in ("analytic", "simulate", "both"):
            raise ValueError(f"mode must be analytic|simulate|both, got {self.mode!r}")
        for lam1 in self.lambda1_grid:
            validate_params([lam1, self.lambda2], min(self.mus))

    @property
    def simulated(self) -> bool:
        return self.mode in ("simulate", "both")


@dataclass
class SweepRow:
    lambda1: float
    lambda2: float
    mu: float
    rho_analytic: float
    rho_sim: float | None = None
    rho_se: float | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]

    def analytic_minima(self) -> dict[float, tuple[float, float]]:
        """Per mu curve: (lambda1 at the analytic minimum, minimum rho)."""
        out: dict[float, tuple[float, float]] = {}
        for mu in self.spec.mus:
            curve = [r for r in self.rows if r.mu == mu]
            best = min(curve, key=lambda r: r.rho_analytic)
            out[mu] = (best.lambda1, best.rho_analytic)
        return out


_SWEEP_BASE_COLS = "lambda1,lambda2,mu,rho_analytic"


def _sweep_point_seed(base_seed: int, mu_index: int, grid_index: int) -> int:
    ss = np.random.SeedSequence([base_seed, mu_index, grid_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    lambda2 = float(_resolve(args, config, "lambda2", 2.0))
    mus = _resolve(args, config, "mu")
    if mus is None:
        raise ValueError("missing required option --mu")
    if isinstance(mus, str):
        mus = _parse_float_list(mus, "--mu")
    elif isinstance(mus, (int, float)):
        mus = [float(mus)]
    lo = float(_resolve(args, config, "lambda1_min", 0.1))
    hi = float(_resolve(args, config, "lambda1_max", 20.0))
    n_points = int(_resolve(args, config, "points", 200))
    if n_points < 1:
        raise ValueError(f"--points must be >= 1, got {n_points}")
    log_grid = bool(_resolve(args, config, "log", False))
    if log_grid:
        grid = np.geomspace(lo, hi, n_points)
    else:
        grid = np.linspace(lo, hi, n_points)
    mode = _resolve(args, config, "mode", "analytic")

    opts = _resolve_run_options(args, config)
    base_seed = _resolve_seed(args, config) if mode != "analytic" else 0
    spec = SweepSpec(
        lambda1_grid=tuple(float(x) for x in grid),
        lambda2=lambda2,
        mus=tuple(float(m) for m in mus),
        mode=mode,
        reps=opts["reps"],
        arrivals=opts["arrivals"],
        base_seed=base_seed,
        warmup_frac=opts["warmup_frac"],
    )

    header = _SWEEP_BASE_COLS + (",rho_sim,rho_se" if spec.simulated else "")
    rows: list[SweepRow] = []
    with _out_stream(args.out) as fh:
        fh.write(header + "\n")
        fh.flush()
        for i_mu, mu in enumerate(spec.mus):
            for i_g, lam1 in enumerate(spec.lambda1_grid):
                p = validate_params([lam1, spec.lambda2], mu)
                row = SweepRow(
                    lambda1=lam1,
                    lambda2=spec.lambda2,
                    mu=mu,
                    rho_analytic=analytics.correlation_coefficient(p).rho,
                )
                if spec.simulated:
                    paths = simulator.run_replications(
                        p,
                        spec.reps,
                        _sweep_point_seed(spec.base_seed, i_mu, i_g),
                        arrivals=spec.arrivals,
                        warmup_frac=spec.warmup_frac,
                    )
                    est = estimators.correlation_estimate(paths)
                    row.rho_sim = est.rho_hat
                    row.rho_se = est.rho_se
                rows.append(row)
                cells = [repr(row.lambda1), repr(row.lambda2), repr(row.mu),
                         repr(row.rho_analytic)]
                if spec.simulated:
                    cells += [repr(row.rho_sim), repr(row.rho_se)]
                fh.write(",".join(cells) + "\n")
                fh.flush()

    result = SweepResult(spec=spec, rows=rows)
    for mu, (lam1, rho) in result.analytic_minima().items():
        print(
            f"analytic minimum for mu={mu:g}: rho={rho:.12g} at lambda1={lam1:.12g}",
            file=sys.stderr,
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser plumbing
# ---------------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser, *, needs_params: bool = True) -> None:
    if needs_params:
        sub.add_argument("--lambdas", help="comma-separated arrival rates, one per source")
        sub.add_argument("--mu", help="service rate")
    sub.add_argument("--config", help="JSON file with defaults for any flag")
    sub.add_argument("--s-grid", dest="s_grid",
                     help="comma-separated transform arguments (default: scale-aware grid)")
    sub.add_argument("--out", help="output file (default: stdout)")


def _add_sim_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--arrivals", type=int, help="arrivals per replication (default 1000000)")
    sub.add_argument("--sim-time", dest="sim_time", type=float,
                     help="time horizon per replication (alternative to --arrivals)")
    sub.add_argument("--reps", type=int, help="number of replications (default 30)")
    sub.add_argument("--seed", type=int, help="base seed (default: drawn from entropy)")
    sub.add_argument("--warmup-frac", dest="warmup_frac", type=float,
                     help="fraction of horizon discarded as warm-up (default 0.01)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoi-mm11",
        description="Age-of-information correlation in a K-source preemptive "
                    "M/M/1/1 queue: closed forms, simulation, validation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_an = subs.add_parser("analytic", help="evaluate closed forms (JSON)")
    _add_common(p_an)
    p_an.add_argument("--source", type=int, help="restrict per-source output to one source")
    p_an.set_defaults(func=cmd_analytic)

    p_sim = subs.add_parser("simulate", help="run seeded replications (JSON)")
    _add_common(p_sim)
    _add_sim_options(p_sim)
    p_sim.add_argument("--dump-path", dest="dump_path",
                       help="also write the first replication's update records to this CSV")
    p_sim.set_defaults(func=cmd_simulate)

    p_val = subs.add_parser("validate", help="analytic-vs-simulated table (CSV)")
    _add_common(p_val)
    _add_sim_options(p_val)
    p_val.add_argument("--z-threshold", dest="z_threshold", type=float,
                       help="max tolerated |z| (default 4)")
    p_val.set_defaults(func=cmd_validate)

    p_sw = subs.add_parser("sweep", help="rho over a lambda1 grid (CSV)")
    _add_common(p_sw, needs_params=False)
    p_sw.add_argument("--mu", help="comma-separated service rates, one curve each")
    p_sw.add_argument("--lambda2", type=float, help="fixed rate of source 2 (default 2)")
    p_sw.add_argument("--lambda1-min", dest="lambda1_min", type=float,
                      help="grid start (default 0.1)")
    p_sw.add_argument("--lambda1-max", dest="lambda1_max", type=float,
                      help="grid end (default 20)")
    p_sw.add_argument("--points", type=int, help="grid size (default 200)")
    p_sw.add_argument("--log", action="store_const", const=True,
                      help="use a geometric grid")
    p_sw.add_argument("--mode", choices=["analytic", "simulate", "both"],
                      help="columns to compute (default analytic)")
    _add_sim_options(p_sw)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
