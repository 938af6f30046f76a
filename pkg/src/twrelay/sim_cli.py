"""Seeded Monte-Carlo scenario runner and command-line front end.

Four scenarios:

* ``lemma2-sweep``    broadcast rate sum versus the direction-1 water level
                      at fixed total relay power, one curve per relay
                      power-to-noise ratio (dB); demonstrates that the sum
                      peaks at the common pooled level and falls off
                      monotonically on both sides.
* ``prmax-sweep``     one channel realization, relay budget swept; emits the
                      minimum-power solution next to the full-power baseline
                      so the saturation of consumed power is visible.
* ``asymmetry-study`` averages sum rate, consumed relay power and the
                      fraction of efficient allocations over a grid of
                      antenna and power splits with fixed totals.
* ``single``          one instance end to end, optionally grid-certified and
                      optionally loaded from an explicit gains/rates file.

Each trial derives its own RNG stream from (seed, trial index), so any
execution order produces identical output. CSV output is byte-stable for a
fixed spec; the only non-deterministic line is a leading timestamp comment,
suppressed by --deterministic. Floats are serialized with 12 significant
digits. Rates are in nats: sum_rate_tw columns carry the 1/2 two-slot
factor, bc_*/r_* columns do not.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .channel import (
    SubchannelGains,
    SystemConfig,
    decompose,
    generate_channels,
    synthetic_gains,
)
from .errors import ConfigError, NoConvergenceError, RankZeroError
from .ma_phase import max_ma_strategy
from .oracle import baseline_full_power, grid_certify
from .relay_opt import SourceRates, optimize, two_way_rate
from .waterfill import forward_level, power_of_level, rate_of_level

__all__ = [
    "ScenarioSpec",
    "run_lemma2_sweep",
    "run_prmax_sweep",
    "run_asymmetry_study",
    "run_single",
    "run_scenario",
    "main",
    "cli_entry",
]

SCENARIOS = ("lemma2-sweep", "prmax-sweep", "asymmetry-study", "single")

# Points per curve when sweeping the direction-1 level in lemma2-sweep.
LEMMA2_LEVEL_POINTS = 121

LEMMA2_COLUMNS = [
    "trial", "ratio_db", "pr_total", "inv_lambda0",
    "inv_lambda1", "inv_lambda2", "bc_sum",
]
PRMAX_COLUMNS = [
    "point", "n1", "n2", "nr", "p1_max", "p2_max", "sigma_sq",
    "pr_max", "r_ma", "r_bar_1r", "r_bar_2r",
    "inv_lambda1", "inv_lambda2", "consumed_power",
    "bc_rate_1", "bc_rate_2", "bc_sum", "sum_rate_tw",
    "step_path", "efficient", "source_waste",
    "baseline_inv_lambda1", "baseline_inv_lambda2", "baseline_consumed",
    "baseline_bc_1", "baseline_bc_2", "baseline_bc_sum", "baseline_sum_rate_tw",
]
ASYM_COLUMNS = [
    "trial", "n1", "n2", "p1_max", "p2_max",
    "sum_rate_tw", "consumed_power", "efficient",
]
SINGLE_COLUMNS = [
    "trial", "n1", "n2", "nr", "p1_max", "p2_max", "pr_max", "sigma_sq",
    "r_ma", "r_bar_1r", "r_bar_2r",
    "inv_lambda1", "inv_lambda2", "consumed_power",
    "bc_rate_1", "bc_rate_2", "bc_sum", "sum_rate_tw",
    "step_path", "efficient", "source_waste",
]
SINGLE_ORACLE_COLUMNS = [
    "oracle_best_rate", "oracle_min_power",
    "oracle_argmax_inv_lambda1", "oracle_argmax_inv_lambda2",
    "baseline_inv_lambda1", "baseline_inv_lambda2", "baseline_bc_sum",
    "grid_resolution",
]


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything one scenario run needs; validated on construction."""

    scenario: str
    config: SystemConfig
    trials: int = 1
    sweep_start: float = 0.0
    sweep_stop: float = 1.0
    sweep_points: int = 1
    certify: bool = False
    resolution: float = 1e-3
    out: str | None = None
    fmt: str = "csv"
    deterministic: bool = False
    instance_path: str | None = None

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.sweep_points < 1:
            raise ConfigError("sweep grid must be nonempty")
        if self.sweep_stop < self.sweep_start:
            raise ConfigError("sweep stop must be >= sweep start")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.fmt!r}")
        if self.resolution <= 0.0:
            raise ConfigError("certification resolution must be positive")


def _solution_fields(sol) -> dict:
    return {
        "inv_lambda1": sol.level1,
        "inv_lambda2": sol.level2,
        "consumed_power": sol.consumed_power,
        "bc_rate_1": sol.bc_rates[0],
        "bc_rate_2": sol.bc_rates[1],
        "bc_sum": sol.bc_rates[0] + sol.bc_rates[1],
        "sum_rate_tw": sol.sum_rate_tw,
        "step_path": "-".join(str(s) for s in sol.step_trace),
        "efficient": sol.efficient,
        "source_waste": sol.source_waste,
    }


def run_lemma2_sweep(spec: ScenarioSpec) -> tuple[list[dict], dict]:
    """Broadcast rate sum along full-power level splits, per dB ratio."""
    cfg = spec.config
    ratios_db = np.linspace(spec.sweep_start, spec.sweep_stop, spec.sweep_points)
    records: list[dict] = []
    skipped = 0
    for trial in range(spec.trials):
        try:
            gains = decompose(generate_channels(cfg, trial), cfg)
        except RankZeroError:
            skipped += 1
            continue
        pooled = gains.pooled()
        budgets = 10.0 ** (ratios_db / 10.0) * cfg.sigmar_sq
        # One shared level grid per trial so curves for different ratios can
        # be compared at identical abscissae; infeasible points are skipped.
        lo = 1.0 / gains.alpha1[0]
        hi = forward_level(gains.alpha1, float(np.max(budgets)))
        grid = np.linspace(lo, hi, LEMMA2_LEVEL_POINTS)
        power1 = power_of_level(gains.alpha1, grid)
        for db, pr in zip(ratios_db, budgets):
            inv_lambda0 = forward_level(pooled, pr)
            feasible = power1 <= pr + 1e-12
            remainder = np.maximum(pr - power1[feasible], 0.0)
            level2 = forward_level(gains.alpha2, remainder)
            bc_sum = rate_of_level(gains.alpha1, grid[feasible]) + rate_of_level(
                gains.alpha2, level2
            )
            for l1, l2, bc in zip(grid[feasible], level2, bc_sum):
                records.append({
                    "trial": trial,
                    "ratio_db": float(db),
                    "pr_total": pr,
                    "inv_lambda0": inv_lambda0,
                    "inv_lambda1": float(l1),
                    "inv_lambda2": float(l2),
                    "bc_sum": float(bc),
                })
    return records, {"trials": spec.trials, "skipped": skipped}


def run_prmax_sweep(spec: ScenarioSpec) -> tuple[list[dict], dict]:
    """Budget sweep on one realization: min-power solution vs baseline."""
    cfg = spec.config
    channels = generate_channels(cfg, 0)
    gains = decompose(channels, cfg)
    strategy = max_ma_strategy(channels, cfg)
    budgets = np.linspace(spec.sweep_start, spec.sweep_stop, spec.sweep_points)
    records: list[dict] = []
    for point, pr in enumerate(budgets):
        sol = optimize(gains, strategy, float(pr))
        bl_levels, bl_bc = baseline_full_power(gains, strategy, float(pr), spec.resolution)
        bl_consumed = power_of_level(gains.alpha1, bl_levels[0]) + power_of_level(
            gains.alpha2, bl_levels[1]
        )
        row = {
            "point": point,
            "n1": cfg.n1,
            "n2": cfg.n2,
            "nr": cfg.n_r,
            "p1_max": cfg.p1_max,
            "p2_max": cfg.p2_max,
            "sigma_sq": cfg.sigmar_sq,
            "pr_max": float(pr),
            "r_ma": strategy.r_ma,
            "r_bar_1r": strategy.r_bar_1r,
            "r_bar_2r": strategy.r_bar_2r,
            "baseline_inv_lambda1": bl_levels[0],
            "baseline_inv_lambda2": bl_levels[1],
            "baseline_consumed": bl_consumed,
            "baseline_bc_1": bl_bc[0],
            "baseline_bc_2": bl_bc[1],
            "baseline_bc_sum": bl_bc[0] + bl_bc[1],
            "baseline_sum_rate_tw": two_way_rate(
                strategy.r_ma, strategy.r_bar_1r, strategy.r_bar_2r, bl_bc[0], bl_bc[1]
            ),
        }
        row.update(_solution_fields(sol))
        records.append(row)
    return records, {"trials": 1, "skipped": 0}


def _asym_power_splits(p_total: float) -> np.ndarray:
    return np.linspace(0.1, 0.9, 5) * p_total


def run_asymmetry_study(spec: ScenarioSpec) -> tuple[list[dict], list[dict]]:
    """Average performance over antenna/power splits with fixed totals.

    Antenna splits cover every n1 in 1..n_total-1 with n1+n2 fixed; power
    splits cover five evenly spaced fractions of the fixed power total.
    Channel realizations are reused across power splits within an antenna
    split, so cells differ only in what they must.
    """
    cfg = spec.config
    n_total = cfg.n1 + cfg.n2
    p_total = cfg.p1_max + cfg.p2_max
    if n_total < 2:
        raise ConfigError("asymmetry study needs n1 + n2 >= 2")
    records: list[dict] = []
    aggregates: list[dict] = []
    for n1 in range(1, n_total):
        base = dataclasses.replace(cfg, n1=n1, n2=n_total - n1)
        cells = {
            float(p1): {"sum_rate": [], "consumed": [], "efficient": [], "skipped": 0}
            for p1 in _asym_power_splits(p_total)
        }
        for trial in range(spec.trials):
            try:
                channels = generate_channels(base, trial)
                gains = decompose(channels, base)
            except RankZeroError:
                for cell in cells.values():
                    cell["skipped"] += 1
                continue
            for p1, cell in cells.items():
                cell_cfg = dataclasses.replace(base, p1_max=p1, p2_max=p_total - p1)
                try:
                    strategy = max_ma_strategy(channels, cell_cfg)
                    sol = optimize(gains, strategy, cell_cfg.pr_max)
                except (NoConvergenceError, RankZeroError):
                    cell["skipped"] += 1
                    continue
                cell["sum_rate"].append(sol.sum_rate_tw)
                cell["consumed"].append(sol.consumed_power)
                cell["efficient"].append(sol.efficient)
                records.append({
                    "trial": trial,
                    "n1": n1,
                    "n2": n_total - n1,
                    "p1_max": p1,
                    "p2_max": p_total - p1,
                    "sum_rate_tw": sol.sum_rate_tw,
                    "consumed_power": sol.consumed_power,
                    "efficient": sol.efficient,
                })
        for p1, cell in cells.items():
            done = len(cell["sum_rate"])
            aggregates.append({
                "n1": n1,
                "n2": n_total - n1,
                "p1_max": p1,
                "p2_max": p_total - p1,
                "trials": spec.trials,
                "completed": done,
                "skipped": cell["skipped"],
                "avg_sum_rate_tw": float(np.mean(cell["sum_rate"])) if done else float("nan"),
                "avg_consumed_power": float(np.mean(cell["consumed"])) if done else float("nan"),
                "efficient_fraction": float(np.mean(cell["efficient"])) if done else float("nan"),
            })
    return records, aggregates


def _load_instance(path: str, cfg: SystemConfig) -> tuple[SubchannelGains, SourceRates, float, dict]:
    try:
        payload = json.loads(Path(path).read_text())
        gains = synthetic_gains(payload["alpha1"], payload["alpha2"])
        rates = SourceRates(
            r_ma=float(payload["r_ma"]),
            r_bar_1r=float(payload["r_bar_1r"]),
            r_bar_2r=float(payload["r_bar_2r"]),
        )
        pr_max = float(payload.get("pr_max", cfg.pr_max))
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad instance file {path}: {exc}") from exc
    echo = {"n1": 0, "n2": 0, "nr": gains.n_r, "sigma_sq": 1.0}
    return gains, rates, pr_max, echo


def run_single(spec: ScenarioSpec) -> tuple[list[dict], dict]:
    """One instance end to end, with optional grid certification."""
    cfg = spec.config
    if spec.instance_path is not None:
        gains, strategy, pr_max, echo = _load_instance(spec.instance_path, cfg)
    else:
        channels = generate_channels(cfg, 0)
        gains = decompose(channels, cfg)
        strategy = max_ma_strategy(channels, cfg)
        pr_max = cfg.pr_max
        echo = {"n1": cfg.n1, "n2": cfg.n2, "nr": cfg.n_r, "sigma_sq": cfg.sigmar_sq}
    sol = optimize(gains, strategy, pr_max)
    row = {
        "trial": 0,
        "p1_max": cfg.p1_max,
        "p2_max": cfg.p2_max,
        "pr_max": pr_max,
        "r_ma": strategy.r_ma,
        "r_bar_1r": strategy.r_bar_1r,
        "r_bar_2r": strategy.r_bar_2r,
    }
    row.update(echo)
    row.update(_solution_fields(sol))
    if spec.certify:
        res = grid_certify(gains, strategy, pr_max, spec.resolution)
        row.update({
            "oracle_best_rate": res.best_rate,
            "oracle_min_power": res.min_power_at_best,
            "oracle_argmax_inv_lambda1": res.argmax_levels[0],
            "oracle_argmax_inv_lambda2": res.argmax_levels[1],
            "baseline_inv_lambda1": res.baseline_levels[0],
            "baseline_inv_lambda2": res.baseline_levels[1],
            "baseline_bc_sum": res.baseline_bc_rates[0] + res.baseline_bc_rates[1],
            "grid_resolution": res.grid_resolution,
        })
    return [row], {"trials": 1, "skipped": 0}


def run_scenario(spec: ScenarioSpec):
    runner = {
        "lemma2-sweep": run_lemma2_sweep,
        "prmax-sweep": run_prmax_sweep,
        "asymmetry-study": run_asymmetry_study,
        "single": run_single,
    }[spec.scenario]
    return runner(spec)


def scenario_columns(spec: ScenarioSpec) -> list[str]:
    if spec.scenario == "lemma2-sweep":
        return list(LEMMA2_COLUMNS)
    if spec.scenario == "prmax-sweep":
        return list(PRMAX_COLUMNS)
    if spec.scenario == "asymmetry-study":
        return list(ASYM_COLUMNS)
    cols = list(SINGLE_COLUMNS)
    if spec.certify:
        cols += SINGLE_ORACLE_COLUMNS
    return cols


def _fmt_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _json_clean(value):
    if isinstance(value, dict):
        return {k: _json_clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.12g}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def render_csv(spec: ScenarioSpec, records: list[dict]) -> str:
    columns = scenario_columns(spec)
    lines = []
    if not spec.deterministic:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat()}")
    lines.append(",".join(columns))
    for rec in records:
        lines.append(",".join(_fmt_cell(rec.get(col, "")) for col in columns))
    return "\n".join(lines) + "\n"


def render_json(spec: ScenarioSpec, records: list[dict], aggregates) -> str:
    payload = {
        "config": _json_clean({
            "scenario": spec.scenario,
            **dataclasses.asdict(spec.config),
            "trials": spec.trials,
            "sweep_start": spec.sweep_start,
            "sweep_stop": spec.sweep_stop,
            "sweep_points": spec.sweep_points,
            "certify": spec.certify,
        }),
        "records": _json_clean(records),
        "aggregates": _json_clean(aggregates),
    }
    if not spec.deterministic:
        payload["generated"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit(spec: ScenarioSpec, records: list[dict], aggregates) -> None:
    text = (
        render_csv(spec, records)
        if spec.fmt == "csv"
        else render_json(spec, records, aggregates)
    )
    if spec.out is None:
        sys.stdout.write(text)
    else:
        Path(spec.out).write_text(text)


_SCENARIO_DEFAULTS = {
    # n1, n2, nr, p1, p2, pr, sweep (start, stop, points), trials
    "lemma2-sweep": dict(n1=6, n2=5, nr=8, p1=3.0, p2=3.0, pr=3.0,
                         sweep=(4.0, 7.0, 4), trials=1),
    "prmax-sweep": dict(n1=6, n2=5, nr=8, p1=3.0, p2=3.0, pr=3.0,
                        sweep=(0.25, 12.0, 50), trials=1),
    "asymmetry-study": dict(n1=3, n2=3, nr=6, p1=2.5, p2=2.5, pr=3.0,
                            sweep=(0.0, 0.0, 1), trials=100),
    "single": dict(n1=2, n2=2, nr=2, p1=1.0, p2=1.0, pr=1.0,
                   sweep=(0.0, 0.0, 1), trials=1),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twrelay",
        description="Two-way relay power allocation scenarios",
    )
    parser.add_argument("--scenario", required=True, choices=SCENARIOS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--n1", type=int, default=None)
    parser.add_argument("--n2", type=int, default=None)
    parser.add_argument("--nr", type=int, default=None)
    parser.add_argument("--p1", type=float, default=None, help="source 1 power budget, W")
    parser.add_argument("--p2", type=float, default=None, help="source 2 power budget, W")
    parser.add_argument("--pr", type=float, default=None, help="relay power budget, W")
    parser.add_argument("--sigma", type=float, default=1.0, help="noise variance at all nodes, W")
    parser.add_argument("--sweep-start", type=float, default=None)
    parser.add_argument("--sweep-stop", type=float, default=None)
    parser.add_argument("--sweep-points", type=int, default=None)
    parser.add_argument("--certify", action="store_true",
                        help="attach grid-search certification (single scenario)")
    parser.add_argument("--resolution", type=float, default=1e-3,
                        help="certification grid resolution, W")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", type=str, default=None, help="output path (default: stdout)")
    parser.add_argument("--deterministic", action="store_true",
                        help="suppress the timestamp line for byte-stable output")
    parser.add_argument("--instance", type=str, default=None,
                        help="JSON gains/rates file for the single scenario")
    return parser


def spec_from_args(args: argparse.Namespace) -> ScenarioSpec:
    defaults = _SCENARIO_DEFAULTS[args.scenario]
    sweep = defaults["sweep"]
    if args.sigma <= 0:
        raise ConfigError("noise variance must be positive")
    try:
        config = SystemConfig(
            n1=args.n1 if args.n1 is not None else defaults["n1"],
            n2=args.n2 if args.n2 is not None else defaults["n2"],
            n_r=args.nr if args.nr is not None else defaults["nr"],
            p1_max=args.p1 if args.p1 is not None else defaults["p1"],
            p2_max=args.p2 if args.p2 is not None else defaults["p2"],
            pr_max=args.pr if args.pr is not None else defaults["pr"],
            sigma1_sq=args.sigma,
            sigma2_sq=args.sigma,
            sigmar_sq=args.sigma,
            seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ScenarioSpec(
        scenario=args.scenario,
        config=config,
        trials=args.trials if args.trials is not None else defaults["trials"],
        sweep_start=args.sweep_start if args.sweep_start is not None else sweep[0],
        sweep_stop=args.sweep_stop if args.sweep_stop is not None else sweep[1],
        sweep_points=args.sweep_points if args.sweep_points is not None else sweep[2],
        certify=args.certify,
        resolution=args.resolution,
        out=args.out,
        fmt=args.fmt,
        deterministic=args.deterministic,
        instance_path=args.instance,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        spec = spec_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        records, aggregates = run_scenario(spec)
        emit(spec, records, aggregates)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def cli_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli_entry()
