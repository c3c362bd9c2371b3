"""Command-line entry point for reproducible batch workflows.

Subcommands: generate, train, eval, sweep, failstats. Every invocation
writes a manifest.json into the output directory capturing the resolved
configuration, seeds, artifact paths, and versions, which is sufficient to
re-run the command and obtain byte-identical CSV/JSON outputs (on the same
kernel backend). Flag defaults can be overridden per-flag with environment
variables named UAVEDGE_<FLAG> (dashes as underscores), e.g. UAVEDGE_ITERS.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from ._kernels import backend_name
from .dqn import QNetwork, TrainConfig, save_training_log, train
from .evac import DEFAULT_RADIUS, DensityFormatError, load_density, scenario_priorities
from .policy_eval import (BASELINE_NAMES, EpisodeResult, failure_stats,
                          make_policy, rollout, sweep)
from .rewards import REWARD_IDS, RewardSpec
from .scenario import Scenario, ScenarioError, assign_outages, generate, load, save
from .simcore import SimConfig
from .tables import CapabilityTableError, load_capability_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

ENV_PREFIX = "UAVEDGE_"


class CliDataError(Exception):
    """Validation or input-data problem; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _env_default(flag: str, default, cast):
    raw = os.environ.get(ENV_PREFIX + flag.replace("-", "_").upper())
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise CliDataError(f"bad value for {ENV_PREFIX}{flag.upper()}: {exc}") from None


def _add(parser, flag: str, *, type=str, default=None, **kwargs):
    parser.add_argument(f"--{flag}", type=type,
                        default=_env_default(flag, default, type), **kwargs)


def _float_cell(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# manifest


def _write_manifest(out_dir: Path, command: str, config: dict, seeds, artifacts: dict,
                    started: float) -> None:
    manifest = {
        "manifest_version": "1",
        "version": f"uavedge {__version__}",
        "kernel_backend": backend_name(),
        "command": command,
        "config": config,
        "seeds": list(seeds),
        "artifacts": artifacts,
        "wall_clock_s": time.time() - started,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _config_snapshot(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


# ---------------------------------------------------------------------------
# CSV writers


def write_trace_csv(scenario: Scenario, result: EpisodeResult, path: Path) -> None:
    """One row per slot, replaying battery levels from the outcome energies."""
    uav_batt = scenario.uav.battery_capacity
    batteries = [d.battery_capacity for d in scenario.devices]
    with open(path, "w", newline="") as fh:
        fh.write("slot,action,served,travel_s,slot_s,uav_batt_J,min_dev_batt_J,max_age,terminated\n")
        for slot, out in enumerate(result.trace, start=1):
            uav_batt -= out.uav_energy
            batteries = [max(b - e, 0.0) for b, e in zip(batteries, out.per_device_energy)]
            served = "|".join(str(i) for i in out.served_ids)
            cause = out.terminated.kind if out.terminated else ""
            fh.write(f"{slot},{out.action},{served},{_float_cell(out.travel_time)},"
                     f"{_float_cell(out.slot_duration)},{_float_cell(uav_batt)},"
                     f"{_float_cell(min(batteries))},{max(out.per_device_age)},{cause}\n")


def _write_sweep_csv(table, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("power,comm,seed,length,cause,first_failure\n")
        for r in table.records:
            ff = "" if r.first_failure is None else r.first_failure
            fh.write(f"{r.power},{r.comm},{r.seed},{r.length},{r.cause.kind},{ff}\n")


def _write_tally_csv(tally, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("device_id,failure_count\n")
        for device_id in sorted(tally.counts):
            fh.write(f"{device_id},{tally.counts[device_id]}\n")


def _write_failure_runs_csv(tally, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("run,length,cause,first_failure\n")
        for r in tally.runs:
            ff = "" if r.first_failure is None else r.first_failure
            fh.write(f"{r.run},{r.length},{r.cause.kind},{ff}\n")


# ---------------------------------------------------------------------------
# shared pieces


def _load_scenario(path: str) -> Scenario:
    if not Path(path).exists():
        raise CliDataError(f"scenario file not found: {path}")
    try:
        return load(path)
    except (ScenarioError, json.JSONDecodeError, KeyError) as exc:
        raise CliDataError(f"bad scenario file {path}: {exc}") from exc


def _apply_priority(scenario: Scenario, args) -> Scenario:
    if getattr(args, "priority_file", None):
        try:
            segments = load_density(args.priority_file)
        except FileNotFoundError:
            raise CliDataError(f"density file not found: {args.priority_file}") from None
        except DensityFormatError as exc:
            raise CliDataError(str(exc)) from exc
        scenario = scenario_priorities(scenario, segments, args.priority_radius)
    return scenario


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        batch_size=args.batch,
        gamma=args.gamma,
        learning_rate=args.lr,
        iterations=args.iters,
        exploration_fraction=args.exploration_fraction,
        min_epsilon=args.min_epsilon,
        buffer_capacity=args.buffer,
        target_sync_interval=args.sync_interval,
        warmup=args.warmup,
        normalize_age=args.normalize_age,
    )


def _add_train_flags(p) -> None:
    _add(p, "reward", default="U_logAoverO", choices=list(REWARD_IDS),
         help="reward function id")
    _add(p, "iters", type=int, default=1_000_000, help="training iterations")
    _add(p, "batch", type=int, default=16)
    _add(p, "gamma", type=float, default=0.98)
    _add(p, "lr", type=float, default=0.0071)
    _add(p, "exploration-fraction", type=float, default=0.35, dest="exploration_fraction")
    _add(p, "min-epsilon", type=float, default=0.05, dest="min_epsilon")
    _add(p, "buffer", type=int, default=50_000, help="replay buffer capacity")
    _add(p, "sync-interval", type=int, default=1_000, dest="sync_interval",
         help="gradient steps between target-network refreshes")
    _add(p, "warmup", type=int, default=1_000, help="transitions before learning starts")
    p.add_argument("--normalize-age", action="store_true",
                   help="divide ages by the age limit in the state vector")
    _add(p, "priority-kappa", type=float, default=1.0, dest="priority_kappa",
         help="scale of the priority bonus added to the reward")


def _add_priority_flags(p) -> None:
    _add(p, "priority-file", default=None, dest="priority_file",
         help="road-segment density CSV (segment_id,x,y,mean_density)")
    _add(p, "priority-radius", type=float, default=DEFAULT_RADIUS, dest="priority_radius",
         help="meters within which a segment counts toward a device priority")


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    config = SimConfig(region_width=args.width, region_height=args.height,
                       n_devices=args.devices)
    table = None
    if args.tables:
        try:
            table = load_capability_table(args.tables)
        except FileNotFoundError:
            raise CliDataError(f"capability table not found: {args.tables}") from None
        except CapabilityTableError as exc:
            raise CliDataError(str(exc)) from exc
    scenario = generate(args.seed, config, table=table)
    n_power = args.devices if args.power is None else args.power
    n_comm = args.devices if args.comm is None else args.comm
    scenario = assign_outages(scenario, n_power, n_comm, seed=args.seed)
    scenario = _apply_priority(scenario, args)
    out_path = out_dir / args.out
    save(scenario, out_path)
    _write_manifest(out_dir, "generate", _config_snapshot(args), [args.seed],
                    {"scenario": args.out}, started)
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_train(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    scenario = _load_scenario(args.scenario)
    scenario = _apply_priority(scenario, args)
    cfg = _train_config(args)
    spec = RewardSpec(id=args.reward, kappa=args.priority_kappa)
    net, log = train(scenario, spec, cfg, seed=args.seed)
    weights_path = out_dir / args.weights
    log_path = out_dir / args.log
    net.save(weights_path)
    save_training_log(log, log_path)
    _write_manifest(out_dir, "train", _config_snapshot(args), [args.seed],
                    {"weights": args.weights, "training_log": args.log}, started)
    lengths = [row.length for row in log]
    best = max(lengths) if lengths else 0
    print(f"trained {cfg.iterations} iterations, {len(log)} episodes, "
          f"best episode length {best}; wrote {weights_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    scenario = _load_scenario(args.scenario)
    net = None
    if args.policy == "greedy":
        if not args.weights:
            raise CliDataError("greedy evaluation needs --weights")
        if not Path(args.weights).exists():
            raise CliDataError(f"weights file not found: {args.weights}")
        net = QNetwork.load(args.weights)
        if net.n_actions != scenario.n_devices:
            raise CliDataError(
                f"weights expect {net.n_actions} devices but scenario has {scenario.n_devices}")
    policy = make_policy(args.policy, scenario, seed=args.seed, net=net)
    result = rollout(scenario, policy, seed=args.seed)
    trace_path = out_dir / args.trace
    write_trace_csv(scenario, result, trace_path)
    _write_manifest(out_dir, "eval", _config_snapshot(args), [args.seed],
                    {"trace": args.trace}, started)
    ff = "-" if result.first_failure_device is None else result.first_failure_device
    print(f"length={result.length} cause={result.cause.kind} first_failure={ff}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    counts = [int(x) for x in args.grid.split(",") if x.strip()]
    if not counts or any(not 0 <= c <= args.devices for c in counts):
        raise CliDataError(f"grid counts must lie in [0, {args.devices}]: {args.grid}")
    seeds = [args.seed + k for k in range(args.seeds)]
    cfg = _train_config(args)
    spec = RewardSpec(id=args.reward, kappa=args.priority_kappa)

    def factory(seed):
        return generate(seed, SimConfig(n_devices=args.devices))

    table = sweep(counts, counts, seeds, cfg, spec, workers=args.workers,
                  scenario_factory=factory)
    out_path = out_dir / args.out
    _write_sweep_csv(table, out_path)
    _write_manifest(out_dir, "sweep", _config_snapshot(args), seeds,
                    {"sweep": args.out}, started)
    print("power\\comm " + " ".join(f"{c:>6}" for c in counts))
    for p in counts:
        row = " ".join(f"{table.cell_mean(p, c):6.1f}" for c in counts)
        print(f"{p:>10} {row}")
    return EXIT_OK


def cmd_failstats(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    if args.scenario:
        base = _load_scenario(args.scenario)
    else:
        base = generate(args.seed, SimConfig(n_devices=args.devices))
    base = _apply_priority(base, args)
    n = base.n_devices
    if not 0 <= args.power_out <= n or not 0 <= args.comm_out <= n:
        raise CliDataError(f"outage counts must lie in [0, {n}]")
    cfg = _train_config(args)
    spec = RewardSpec(id=args.reward, kappa=args.priority_kappa)
    tally = failure_stats(base, args.runs, cfg, spec,
                          n_power=n - args.power_out, n_comm=n - args.comm_out,
                          seed=args.seed, workers=args.workers)
    _write_tally_csv(tally, out_dir / args.out)
    _write_failure_runs_csv(tally, out_dir / args.runs_out)
    _write_manifest(out_dir, "failstats", _config_snapshot(args),
                    [args.seed + r for r in range(args.runs)],
                    {"tally": args.out, "runs": args.runs_out}, started)
    print(f"{tally.n_device_failures}/{args.runs} runs ended in a device failure")
    for device_id in sorted(tally.counts):
        print(f"device {device_id}: {tally.counts[device_id]}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uavedge",
                     description="UAV-serviced edge network simulator and DQN visit planner")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        _add(p, "seed", type=int, default=0)
        _add(p, "out-dir", default=".", dest="out_dir")

    g = sub.add_parser("generate", help="draw a scenario and write scenario.json")
    common(g)
    _add(g, "devices", type=int, default=12)
    _add(g, "width", type=float, default=800.0)
    _add(g, "height", type=float, default=800.0)
    _add(g, "power", type=int, default=None, help="devices that keep grid power (default all)")
    _add(g, "comm", type=int, default=None, help="devices that keep communication (default all)")
    _add(g, "tables", default=None, help="capability-table override CSV (kind,task,power_w,rate_Bps)")
    _add_priority_flags(g)
    g.add_argument("-o", "--out", default="scenario.json")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train a DQN visit policy on a scenario")
    common(t)
    t.add_argument("-s", "--scenario", required=True)
    _add_train_flags(t)
    _add_priority_flags(t)
    _add(t, "weights", default="weights.json", help="output weights filename")
    _add(t, "log", default="train_log.csv", help="output training log filename")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="roll out a policy and report the first failure")
    common(e)
    e.add_argument("-s", "--scenario", required=True)
    e.add_argument("-w", "--weights", default=None)
    _add(e, "policy", default="greedy", choices=["greedy", *BASELINE_NAMES])
    _add(e, "trace", default="trace.csv", help="output per-slot trace filename")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="train and evaluate over a power/comm availability grid")
    common(s)
    _add(s, "devices", type=int, default=12)
    _add(s, "grid", default="12,10,8,6,4", help="comma-separated availability counts")
    _add(s, "seeds", type=int, default=3, help="scenario seeds per cell")
    _add(s, "workers", type=int, default=1)
    _add_train_flags(s)
    s.add_argument("-o", "--out", default="sweep.csv")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("failstats", help="repeat outage draws and tally first failures")
    common(f)
    f.add_argument("-s", "--scenario", default=None,
                   help="base scenario file (default: generate from --seed)")
    _add(f, "devices", type=int, default=12)
    _add(f, "runs", type=int, default=30)
    _add(f, "power-out", type=int, default=4, dest="power_out",
         help="devices stripped of power each run")
    _add(f, "comm-out", type=int, default=6, dest="comm_out",
         help="devices stripped of communication each run")
    _add(f, "workers", type=int, default=1)
    _add_train_flags(f)
    _add_priority_flags(f)
    f.add_argument("-o", "--out", default="failstats.csv")
    _add(f, "runs-out", default="failstats_runs.csv", dest="runs_out")
    f.set_defaults(func=cmd_failstats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ScenarioError, CapabilityTableError, DensityFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
