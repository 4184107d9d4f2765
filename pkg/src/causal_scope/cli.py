"""Command-line interface.

Subcommands: probe, discover, baseline, sweep, report. Every command
records a run manifest next to its outputs and obeys the exit-code
contract: 0 ok, 2 config error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BASELINE_METHODS, run_baseline
from .env import ConfigError, EnvConfig
from .probe import ProbeConfig, TrajectorySet, collect
from .report import (
    SWEEP_FIGURES,
    read_csv,
    read_json,
    render_pvalue_figure,
    render_ranking_figure,
    write_csv,
    write_json,
)
from .stats import TestConfig, discover
from .sweeps import (
    PARTIAL_ALPHAS,
    SCALING_LEVELS,
    SCALING_METHODS,
    partial_sweep,
    scaling_sweep,
    scout_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(command: str, config: dict, seeds, outputs, path) -> dict:
    """Emit the run manifest. The manifest hash covers the deterministic
    fields only; timestamps live outside the hashed core so reruns of the
    same configuration produce the same hash and identical artifacts."""
    core = {
        "command": command,
        "config": config,
        "seeds": [int(s) for s in seeds],
        "version": __version__,
    }
    manifest_hash = hashlib.sha256(
        json.dumps(core, sort_keys=True).encode()
    ).hexdigest()[:16]
    manifest = dict(core)
    manifest["manifest_hash"] = manifest_hash
    manifest["timestamp"] = (
        datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    )
    manifest["outputs"] = [
        {"path": str(p), "sha256": _sha256(Path(p))} for p in outputs
    ]
    write_json(manifest, path)
    return manifest


def _load_env_config(path) -> EnvConfig:
    with open(path) as fh:
        return EnvConfig.from_dict(json.load(fh))


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


# -- subcommands -----------------------------------------------------------


def cmd_probe(args) -> int:
    env_config = _load_env_config(args.env_config)
    probe_config = ProbeConfig(
        n_trajectories=args.n,
        horizon=args.horizon,
        mode=args.mode,
        policy=args.policy,
        seed=args.seed,
    )
    probe_config.validate()
    traj_set = collect(env_config, probe_config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    traj_set.save(out)
    outputs = [out]
    if args.csv:
        traj_set.to_csv(args.csv)
        outputs.append(Path(args.csv))
    write_manifest(
        "probe",
        {"env_config": env_config.to_dict(), "probe_config": probe_config.to_dict()},
        [args.seed],
        outputs,
        out.with_suffix(out.suffix + ".manifest.json"),
    )
    return EXIT_OK


def cmd_discover(args) -> int:
    baseline = TrajectorySet.load(args.baseline)
    intervention = TrajectorySet.load(args.intervention)
    cfg = TestConfig(
        horizons=tuple(_parse_int_list(args.horizons)),
        alpha=args.alpha,
        test_kind=args.test,
        n_permutations=args.permutations,
        seed=args.seed,
    )
    cfg.validate()
    result = discover(baseline, intervention, cfg)
    out = Path(args.out)
    report = result.to_report_dict()
    write_json(report, out)
    csv_rows = []
    for entry in report["per_dim"]:
        for h in result.horizons:
            csv_rows.append(
                {
                    "dim": entry["index"],
                    "label": entry["label_if_known"] or "",
                    "horizon": h,
                    "raw_p": entry["p_by_horizon"][str(h)],
                    "adjusted_p": entry["adjusted_p_by_horizon"][str(h)],
                    "selected": int(entry["selected"]),
                }
            )
    csv_path = out.with_suffix(".csv")
    write_csv(csv_rows, csv_path)
    write_manifest(
        "discover",
        {
            "baseline": Path(args.baseline).name,
            "intervention": Path(args.intervention).name,
            "test_config": cfg.to_dict(),
        },
        [args.seed],
        [out, csv_path],
        out.with_suffix(".manifest.json"),
    )
    return EXIT_OK


def cmd_baseline(args) -> int:
    traj_set = TrajectorySet.load(args.trajs)
    result = run_baseline(args.method, traj_set, args.budget)
    out = Path(args.out)
    report = result.to_report_dict()
    write_json(report, out)
    csv_path = out.with_suffix(".csv")
    write_csv(
        [
            {
                "dim": i,
                "score": float(result.scores[i]),
                "rank": int(np.where(result.ranking == i)[0][0]),
                "selected": int(result.mask[i]),
            }
            for i in range(result.scores.size)
        ],
        csv_path,
    )
    write_manifest(
        "baseline",
        {"method": args.method, "trajs": Path(args.trajs).name, "budget": args.budget},
        [args.seed],
        [out, csv_path],
        out.with_suffix(".manifest.json"),
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    seeds = _parse_int_list(args.seeds)
    if not seeds:
        raise ConfigError("--seeds must list at least one seed")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config: dict = {"kind": args.kind, "n": args.n, "horizon": args.horizon}
    if args.kind == "scaling":
        levels = args.levels.split(",") if args.levels else list(SCALING_LEVELS)
        methods = args.methods.split(",") if args.methods else list(SCALING_METHODS)
        rows = scaling_sweep(
            seeds, levels=levels, methods=methods,
            n_trajectories=args.n, horizon=args.horizon,
        )
        config.update({"levels": levels, "methods": methods})
    elif args.kind == "partial":
        alphas = (
            [float(a) for a in args.alphas.split(",")]
            if args.alphas
            else list(PARTIAL_ALPHAS)
        )
        rows = partial_sweep(
            seeds, alphas=alphas, n_trajectories=args.n, horizon=args.horizon
        )
        config.update({"alphas": alphas})
    else:
        env_configs = None
        if args.env_config:
            env_configs = {"custom": _load_env_config(args.env_config)}
        rows = scout_sweep(
            seeds, env_configs=env_configs,
            n_trajectories=args.n, horizon=args.horizon,
        )
    csv_path = out_dir / f"{args.kind}.csv"
    write_csv(rows, csv_path)
    fig_path = out_dir / f"{args.kind}.svg"
    SWEEP_FIGURES[args.kind](rows, fig_path)
    write_manifest(
        "sweep", config, seeds, [csv_path, fig_path],
        out_dir / f"{args.kind}.manifest.json",
    )
    return EXIT_OK


def cmd_report(args) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise FileNotFoundError(f"input directory {in_dir} does not exist")
    manifests = sorted(in_dir.glob("*.manifest.json"))
    if not manifests:
        raise ConfigError(f"no manifests found in {in_dir}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    outputs = []
    for mpath in manifests:
        manifest = read_json(mpath)
        for output in manifest["outputs"]:
            opath = in_dir / Path(output["path"]).name
            summary_rows.append(
                {
                    "manifest": mpath.name,
                    "command": manifest["command"],
                    "manifest_hash": manifest["manifest_hash"],
                    "artifact": opath.name,
                    "sha256": output["sha256"],
                }
            )
            if not args.plots or not opath.exists():
                continue
            if manifest["command"] == "sweep" and opath.suffix == ".csv":
                kind = manifest["config"]["kind"]
                fig = out_dir / f"{kind}.svg"
                SWEEP_FIGURES[kind](read_csv(opath), fig)
                outputs.append(fig)
            elif manifest["command"] == "discover" and opath.suffix == ".json":
                fig = out_dir / f"{opath.stem}.pvalues.svg"
                render_pvalue_figure(read_json(opath), fig)
                outputs.append(fig)
            elif manifest["command"] == "baseline" and opath.suffix == ".json":
                fig = out_dir / f"{opath.stem}.ranking.svg"
                render_ranking_figure(read_json(opath), fig)
                outputs.append(fig)
    summary_path = out_dir / "summary.csv"
    write_csv(summary_rows, summary_path)
    outputs.insert(0, summary_path)
    write_manifest(
        "report",
        {"in": in_dir.name, "plots": bool(args.plots)},
        [args.seed],
        outputs,
        out_dir / "report.manifest.json",
    )
    return EXIT_OK


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-scope",
        description="Interventional boundary discovery for control environments.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probe", help="collect a trajectory set")
    p.add_argument("--env-config", required=True)
    p.add_argument("--n", type=int, default=80)
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--mode", choices=("baseline", "intervention"), default="baseline")
    p.add_argument(
        "--policy", choices=("structured_random", "uniform_random"),
        default="structured_random",
    )
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None, help="optional flat CSV export path")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("discover", help="run the two-sample boundary test")
    p.add_argument("--baseline", required=True)
    p.add_argument("--intervention", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--horizons", default="1,5,10")
    p.add_argument("--test", choices=("welch", "permutation"), default="welch")
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("baseline", help="observational feature-selection baseline")
    p.add_argument("--method", choices=sorted(BASELINE_METHODS), required=True)
    p.add_argument("--trajs", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep", help="multi-seed experiment sweeps")
    p.add_argument("--kind", choices=("scaling", "partial", "scout"), required=True)
    p.add_argument("--seeds", required=True, help="comma-separated seed list")
    p.add_argument("--env-config", default=None)
    p.add_argument("--levels", default=None)
    p.add_argument("--methods", default=None)
    p.add_argument("--alphas", default=None)
    p.add_argument("--n", type=int, default=80)
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="aggregate manifests into summary + plots")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
