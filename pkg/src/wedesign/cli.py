"""Batch command line: simulate scenarios, reproduce reference tables, run calibrations, serve the conduct API.

Exit codes: 0 success, 1 parse/usage error (missing or malformed files, unknown
table ids), 2 invariant violation (valid JSON that fails domain validation or
an internal invariant). Diagnostics go to stderr; results are written as
CSV plus a JSON mirror.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import studies, tables
from .calibration import PriorGrid, prior_grid_search, safety_grid_search
from .config import (
    ConfigError,
    Scenario,
    TrialConfig,
    config_from_dict,
    load_config,
    load_scenario,
)
from .montecarlo import run_monte_carlo
from .output import write_rows
from .testing import calibrate_cutoff

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVARIANT = 2

MODES = ("simulate", "reproduce", "calibrate-prior", "calibrate-safety", "calibrate-cutoff", "serve")


@dataclass(frozen=True)
class RunManifest:
    """Resolved inputs of one CLI invocation; flags override manifest-file fields."""

    mode: str
    config_path: str | None = None
    scenario_paths: tuple[str, ...] = ()
    replications: int = 10_000
    seed: int | None = None
    out_dir: str = "results"
    parallelism: int = 1
    kappa: float | None = None
    rule: str | None = None
    experimental_kappa_below_half: bool = False
    table_id: str | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.replications < 1:
            raise ConfigError("replications must be positive")


def _manifest_from_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"manifest file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest file {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("manifest must be a JSON object")
    return data


def _load_inputs(manifest: RunManifest) -> tuple[TrialConfig, list[Scenario]]:
    if manifest.config_path is None:
        raise ConfigError("a --config file is required")
    config = load_config(manifest.config_path)
    overrides = {}
    if manifest.seed is not None:
        overrides["seed"] = manifest.seed
    if manifest.kappa is not None:
        overrides["kappa"] = manifest.kappa
    if manifest.rule is not None:
        overrides["rule"] = manifest.rule.lower()
    if manifest.experimental_kappa_below_half:
        overrides["experimental_low_kappa"] = True
    if overrides:
        config = config.with_updates(**overrides)
    scenarios = [load_scenario(p) for p in manifest.scenario_paths]
    if not scenarios:
        raise ConfigError("at least one --scenario file is required")
    return config, scenarios


def _design_label(config: TrialConfig) -> str:
    return f"{config.rule}({config.kappa:g})"


def cmd_simulate(manifest: RunManifest) -> int:
    config, scenarios = _load_inputs(manifest)
    rows = []
    for scenario in scenarios:
        oc = run_monte_carlo(
            config, scenario, manifest.replications, parallelism=manifest.parallelism
        )
        row = {"design": _design_label(config), "scenario": scenario.name, "kappa": config.kappa}
        row.update(oc.as_dict())
        rows.append(row)
    csv_path, _ = write_rows(rows, manifest.out_dir, "results")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_reproduce(manifest: RunManifest) -> int:
    if manifest.table_id not in tables.TABLE_IDS:
        print(
            f"error: unknown table id {manifest.table_id!r}; expected one of {tables.TABLE_IDS}",
            file=sys.stderr,
        )
        return EXIT_PARSE
    result = tables.reproduce(
        manifest.table_id,
        replications=manifest.replications,
        seed=manifest.seed,
        parallelism=manifest.parallelism,
    )
    if manifest.table_id == "figure1":
        rows = result
    else:
        rows = [r.as_dict() for r in result]
        flagged = [r for r in result if r.within_tolerance is False]
        for r in flagged:
            print(
                f"out of tolerance: {r.row} {r.metric}: simulated {r.simulated:.3f} "
                f"vs reference {r.reference:.3f} (tol {r.tolerance})",
                file=sys.stderr,
            )
    csv_path, _ = write_rows(rows, manifest.out_dir, manifest.table_id)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_calibrate_prior(manifest: RunManifest, beta_values, step_values) -> int:
    config = (
        load_config(manifest.config_path)
        if manifest.config_path
        else studies.toxicity_trial_config(seed=manifest.seed or 0)
    )
    if manifest.seed is not None:
        config = config.with_updates(seed=manifest.seed)
    scenarios = (
        [load_scenario(p) for p in manifest.scenario_paths]
        if manifest.scenario_paths
        else list(studies.TOXICITY_SCENARIOS)
    )
    grid = PriorGrid(
        beta_values=tuple(beta_values),
        step_values=tuple(step_values),
        base_mode=config.gamma[config.safety.toxicity_outcome if config.safety else 0],
    )
    result = prior_grid_search(
        grid, scenarios, config, manifest.replications, parallelism=manifest.parallelism
    )
    rows = []
    for cell in result.cells:
        row = {
            "beta": cell.beta,
            "step": cell.step,
            "valid": cell.valid,
            "geometric_mean_pcs": cell.geometric_mean,
            "geometric_mean_se": cell.geometric_mean_se,
            "selected": cell is result.best,
        }
        for scenario, pcs in zip(scenarios, cell.pcs):
            row[f"pcs_{scenario.name}"] = pcs
        rows.append(row)
    csv_path, _ = write_rows(rows, manifest.out_dir, "prior_calibration")
    print(
        f"selected prior: beta={result.best.beta} step={result.best.step} "
        f"(geometric mean PCS {result.best.geometric_mean:.4f})"
    )
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_calibrate_safety(manifest: RunManifest, gamma_star_values, r_values) -> int:
    config = (
        load_config(manifest.config_path)
        if manifest.config_path
        else studies.toxicity_trial_config(seed=manifest.seed or 0)
    )
    if manifest.seed is not None:
        config = config.with_updates(seed=manifest.seed)
    if len(manifest.scenario_paths) == 2:
        linear = load_scenario(manifest.scenario_paths[0])
        unsafe = load_scenario(manifest.scenario_paths[1])
    elif not manifest.scenario_paths:
        linear, unsafe = studies.SAFETY_LINEAR_SCENARIO, studies.SAFETY_UNSAFE_SCENARIO
    else:
        raise ConfigError("calibrate-safety expects exactly two scenarios: linear then unsafe")
    cells = safety_grid_search(
        gamma_star_values, r_values, linear, unsafe, config,
        manifest.replications, parallelism=manifest.parallelism,
    )
    rows = [
        {
            "gamma_star": c.gamma_star,
            "r": c.r,
            "termination_rate": c.termination_rate,
            "termination_se": c.termination_se,
            "pcs": c.pcs,
            "pcs_se": c.pcs_se,
        }
        for c in cells
    ]
    csv_path, _ = write_rows(rows, manifest.out_dir, "safety_calibration")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_calibrate_cutoff(manifest: RunManifest) -> int:
    config, scenarios = _load_inputs(manifest)
    if config.testing is None:
        raise ConfigError("config has no testing block to calibrate")
    cutoff = calibrate_cutoff(
        config, scenarios[0], manifest.replications, parallelism=manifest.parallelism
    )
    rows = [
        {
            "design": _design_label(config),
            "null_scenario": scenarios[0].name,
            "alpha_target": config.testing.alpha_target,
            "replications": manifest.replications,
            "cutoff": cutoff,
        }
    ]
    csv_path, _ = write_rows(rows, manifest.out_dir, "cutoff")
    print(f"cutoff={cutoff!r}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_serve(host: str, port: int, data_dir: str, token: str | None, ui_dir: str | None = None) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(data_dir=data_dir, token=token, static_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wedesign",
        description="Weighted-entropy adaptive design: simulation, calibration, and trial conduct.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenarios=True):
        p.add_argument("--config", help="trial configuration JSON file")
        if scenarios:
            p.add_argument("--scenario", action="append", default=[], help="scenario JSON file (repeatable)")
        p.add_argument("--reps", type=int, default=None, help="Monte Carlo replications")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--parallelism", type=int, default=1, help="worker processes")

    p = sub.add_parser("simulate", help="run Monte Carlo on config x scenarios")
    add_common(p)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--rule", choices=("rule1", "rule2", "fixed"), default=None)
    p.add_argument("--experimental-kappa-below-half", action="store_true")

    p = sub.add_parser("reproduce", help="reproduce a published reference table")
    p.add_argument("table", choices=tables.TABLE_IDS)
    add_common(p, scenarios=False)

    p = sub.add_parser("calibrate-prior", help="grid search the operational prior")
    add_common(p)
    p.add_argument("--beta", default="0.5,1,2", help="comma-separated beta grid")
    p.add_argument("--step", default="0.2,0.3,0.4", help="comma-separated mode-spread grid")

    p = sub.add_parser("calibrate-safety", help="grid search the safety constraint")
    add_common(p)
    p.add_argument("--gamma-star", default="0.45,0.55", help="comma-separated overdose thresholds")
    p.add_argument("--r", default="0.010,0.035", help="comma-separated decay rates")

    p = sub.add_parser("calibrate-cutoff", help="calibrate the rejection cutoff on a null scenario")
    add_common(p)

    p = sub.add_parser("serve", help="run the trial-conduct HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="trial-sessions")
    p.add_argument("--token", default=None, help="require this static token on every API request")
    p.add_argument("--ui-dir", default=None, help="serve a built companion UI from this directory")

    p = sub.add_parser("run", help="run a mode described by a manifest file")
    p.add_argument("--manifest", required=True, help="manifest JSON with mode, config, scenarios, ...")
    add_common(p)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--rule", choices=("rule1", "rule2", "fixed"), default=None)
    return parser


def _manifest_from_args(args, mode: str, defaults: dict | None = None) -> RunManifest:
    base = dict(defaults or {})
    scenario_paths = list(base.get("scenarios", []))
    if getattr(args, "scenario", None):
        scenario_paths = list(args.scenario)
    reps = args.reps if args.reps is not None else base.get("reps", 10_000)
    return RunManifest(
        mode=mode,
        config_path=args.config or base.get("config"),
        scenario_paths=tuple(scenario_paths),
        replications=int(reps),
        seed=args.seed if args.seed is not None else base.get("seed"),
        out_dir=args.out if args.out != "results" else base.get("out", args.out),
        parallelism=args.parallelism,
        kappa=getattr(args, "kappa", None),
        rule=getattr(args, "rule", None),
        experimental_kappa_below_half=getattr(args, "experimental_kappa_below_half", False),
        table_id=base.get("table"),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(_manifest_from_args(args, "simulate"))
        if args.command == "reproduce":
            manifest = _manifest_from_args(args, "reproduce")
            manifest = replace(manifest, table_id=args.table)
            return cmd_reproduce(manifest)
        if args.command == "calibrate-prior":
            return cmd_calibrate_prior(
                _manifest_from_args(args, "calibrate-prior"),
                _float_list(args.beta),
                _float_list(args.step),
            )
        if args.command == "calibrate-safety":
            return cmd_calibrate_safety(
                _manifest_from_args(args, "calibrate-safety"),
                _float_list(args.gamma_star),
                _float_list(args.r),
            )
        if args.command == "calibrate-cutoff":
            return cmd_calibrate_cutoff(_manifest_from_args(args, "calibrate-cutoff"))
        if args.command == "serve":
            return cmd_serve(args.host, args.port, args.data_dir, args.token, args.ui_dir)
        if args.command == "run":
            data = _manifest_from_file(args.manifest)
            mode = data.get("mode")
            manifest = _manifest_from_args(args, mode or "simulate", defaults=data)
            if mode == "simulate":
                return cmd_simulate(manifest)
            if mode == "reproduce":
                return cmd_reproduce(manifest)
            if mode == "calibrate-prior":
                return cmd_calibrate_prior(
                    manifest, data.get("beta", [0.5, 1, 2]), data.get("step", [0.2, 0.3, 0.4])
                )
            if mode == "calibrate-safety":
                return cmd_calibrate_safety(
                    manifest, data.get("gamma_star", [0.45]), data.get("r", [0.035])
                )
            if mode == "calibrate-cutoff":
                return cmd_calibrate_cutoff(manifest)
            if mode == "serve":
                return cmd_serve(
                    data.get("host", "127.0.0.1"), int(data.get("port", 8000)),
                    data.get("data_dir", "trial-sessions"), data.get("token"),
                )
            raise ConfigError(f"manifest mode {mode!r} is not runnable")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, KeyError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
