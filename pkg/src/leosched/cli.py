"""Command-line front end.

Subcommands:

- ``simulate``: run one scenario, write the metrics CSV and optionally a
  per-slot JSONL trace.
- ``sweep``: paired-seed grids over one axis, optionally from a named
  preset, with process parallelism.
- ``train``: REINFORCE training of the neural allocation policy.
- ``epfd-audit``: recompute protected-user flux margins from a raw trace,
  independently of whatever the simulation recorded.
- ``validate-config``: parse and cross-check a config file.

Exit codes: 0 success, 1 audit found violations, 2 invalid configuration
(every offending field is named), 3 training diverged (the last good
parameters are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import (
    STRATEGIES,
    ConfigError,
    ScenarioConfig,
    config_from_file,
    config_hash,
    validate_config,
)
from .interference import TransmitterSnapshot, epfd_check
from .policy import (
    NeuralAllocationPolicy,
    PolicyDivergenceError,
    params_to_json,
    reinforce,
)
from .simharness import (
    SWEEP_AXES,
    SWEEP_PRESETS,
    build_rf,
    metrics_to_csv,
    preset_base_config,
    resolve_protected,
    run_episode,
    run_sweep,
    sweep_rows_to_csv,
    bandit_episode_runner,
    training_config,
    training_episode_runner,
)

ARTIFACT_VERSION = 1
OUTPUT_DIR_ENV = "LEOSCHED_OUTPUT_DIR"


def _out_path(args, name: str) -> str:
    if os.path.isabs(name):
        return name
    base = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, name)


def _load_config(path: str) -> ScenarioConfig:
    return config_from_file(path)


def _fail_config(err: ConfigError) -> int:
    for msg in err.errors:
        print(f"config error: {msg}", file=sys.stderr)
    return 2


def _header_obj(cfg: ScenarioConfig) -> dict:
    return {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "artifact_version": ARTIFACT_VERSION,
    }


# -- simulate ------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    try:
        cfg = _load_config(args.config)
        if args.strategy or args.seed is not None:
            from dataclasses import replace

            if args.strategy:
                cfg = replace(cfg, strategy=args.strategy)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            errors = validate_config(cfg)
            if errors:
                raise ConfigError(errors)
    except ConfigError as err:
        return _fail_config(err)
    metrics = run_episode(cfg, collect_trace=args.trace is not None)
    out = _out_path(args, args.out)
    with open(out, "w") as fh:
        fh.write(metrics_to_csv(metrics, cfg))
    if args.trace is not None:
        trace_path = _out_path(args, args.trace)
        with open(trace_path, "w") as fh:
            fh.write(json.dumps(_header_obj(cfg)) + "\n")
            for row in metrics.trace:
                fh.write(json.dumps(row) + "\n")
        print(f"trace written to {trace_path}")
    print(
        f"throughput {metrics.throughput_bps / 1e6:.3f} Mbps, "
        f"mean latency {metrics.mean_latency_slots:.2f} slots, "
        f"epfd violations {metrics.epfd_violations}, "
        f"metrics written to {out}"
    )
    return 0


# -- sweep ---------------------------------------------------------------------


def _parse_values(axis: str, raw: str) -> list:
    vals = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        vals.append(int(tok) if axis in ("neighbors", "beams", "uts") else float(tok))
    return vals


def _cmd_sweep(args) -> int:
    if args.preset:
        preset = SWEEP_PRESETS[args.preset]
        cfg = preset_base_config(args.preset, seed=0)
        axis = args.axis or preset["axis"]
        values = _parse_values(axis, args.values) if args.values else list(preset["values"])
        strategies = args.strategies.split(",") if args.strategies else list(preset["strategies"])
        seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(preset["seeds"])
    else:
        if not args.config:
            print("sweep needs --preset or --config", file=sys.stderr)
            return 2
        try:
            cfg = _load_config(args.config)
        except ConfigError as err:
            return _fail_config(err)
        if not args.axis or not args.values:
            print("sweep needs --axis and --values without a preset", file=sys.stderr)
            return 2
        axis = args.axis
        values = _parse_values(axis, args.values)
        strategies = args.strategies.split(",") if args.strategies else [cfg.strategy]
        seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [cfg.seed]
    if axis not in SWEEP_AXES:
        print(f"config error: axis must be one of {', '.join(SWEEP_AXES)}", file=sys.stderr)
        return 2
    if args.policy_params:
        from dataclasses import replace

        cfg = replace(cfg, policy_params=args.policy_params)
    jobs = args.jobs if args.jobs is not None else len(values)
    rows = run_sweep(cfg, axis, values, strategies, seeds, jobs=jobs)
    out = _out_path(args, args.out)
    with open(out, "w") as fh:
        fh.write(sweep_rows_to_csv(rows, cfg))
    print(
        f"{len(values)} axis points x {len(strategies)} strategies x "
        f"{len(seeds)} seeds written to {out}"
    )
    return 0


# -- train ---------------------------------------------------------------------


def _cmd_train(args) -> int:
    if args.scenario == "bandit":
        if args.config:
            print("config error: --config does not apply to the bandit scenario", file=sys.stderr)
            return 2
        base_cfg = None
        runner = bandit_episode_runner()
        header = {"scenario": "bandit", "seed": args.seed, "artifact_version": ARTIFACT_VERSION}
    else:
        if args.config:
            try:
                base_cfg = _load_config(args.config)
            except ConfigError as err:
                return _fail_config(err)
        else:
            base_cfg = training_config(seed=args.seed)
        runner = training_episode_runner(base_cfg)
        header = dict(_header_obj(base_cfg))
    rng = np.random.default_rng(args.seed)
    if args.init:
        policy = NeuralAllocationPolicy.load(args.init)
    else:
        policy = NeuralAllocationPolicy.random_init(rng)
    out = _out_path(args, args.out)

    def write_params(params_policy, extra: dict):
        payload = dict(header)
        payload.update(extra)
        payload["params"] = json.loads(params_to_json(params_policy.params))
        with open(out, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    try:
        result = reinforce(
            runner,
            policy,
            iterations=args.iterations,
            rng=rng,
            learning_rate=args.learning_rate,
        )
    except PolicyDivergenceError as err:
        policy.params = err.last_good_params
        write_params(policy, {"diverged": True})
        print(f"training diverged: {err}; last good parameters written to {out}", file=sys.stderr)
        return 3
    write_params(policy, {"diverged": False})
    if args.log:
        log_path = _out_path(args, args.log)
        source = "# scenario=bandit" if base_cfg is None else f"# config_hash={config_hash(base_cfg)}"
        lines = [
            source,
            f"# seed={args.seed}",
            f"# artifact_version={ARTIFACT_VERSION}",
            "iteration,cost",
        ]
        for it, cost in enumerate(result.costs):
            lines.append(f"{it},{cost!r}")
        with open(log_path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"training log written to {log_path}")
    print(f"{result.iterations} iterations, parameters written to {out}")
    return 0


# -- epfd audit ------------------------------------------------------------------


def _cmd_epfd_audit(args) -> int:
    try:
        cfg = _load_config(args.config)
    except ConfigError as err:
        return _fail_config(err)
    env, _ = build_rf(cfg)
    protected = resolve_protected(cfg, env)
    if not protected:
        print("no protected users")
        return 0
    rows = []
    required = ("slot", "sat_id", "position_m", "boresights", "powers_w")
    try:
        with open(args.trace) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if "slot" not in obj:
                    continue  # header/metadata line
                missing = [k for k in required if k not in obj]
                if missing:
                    raise ValueError(f"trace row missing {', '.join(missing)}")
                rows.append(obj)
    except (OSError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    violations = []
    min_margin = float("inf")
    audit_rows = []
    for row in rows:
        snap = TransmitterSnapshot(
            sat_id=int(row["sat_id"]),
            position=np.asarray(row["position_m"], dtype=float),
            boresights=np.asarray(row["boresights"], dtype=float),
            powers_w=np.asarray(row["powers_w"], dtype=float),
        )
        for user in protected:
            res = epfd_check(
                env, snap, user, reference_bandwidth_hz=user.reference_bandwidth_hz
            )
            min_margin = min(min_margin, res.margin_db)
            audit_rows.append((row["slot"], snap.sat_id, user.user_id, res.margin_db))
            if res.margin_db < 0.0:
                violations.append((row["slot"], user.user_id, res.margin_db))
    if args.out:
        out = _out_path(args, args.out)
        lines = [
            f"# config_hash={config_hash(cfg)}",
            f"# seed={cfg.seed}",
            f"# artifact_version={ARTIFACT_VERSION}",
            "slot,sat_id,user_id,margin_db",
        ]
        for slot, sid, uid, margin in audit_rows:
            lines.append(f"{slot},{sid},{uid},{margin!r}")
        with open(out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"audit written to {out}")
    for slot, uid, margin in violations:
        print(f"violation: slot={slot} user={uid} margin_db={margin:.3f}")
    if min_margin != float("inf"):
        print(f"min margin {min_margin:.3f} dB over {len(audit_rows)} checks")
    return 1 if violations else 0


# -- validate-config -------------------------------------------------------------


def _cmd_validate(args) -> int:
    try:
        cfg = _load_config(args.config)
    except ConfigError as err:
        return _fail_config(err)
    print(f"ok: config_hash={config_hash(cfg)}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leosched",
        description="Satellite downlink scheduling simulator and optimizer.",
    )
    parser.add_argument(
        "--output-dir",
        default=None,
        help=f"directory for output files (default: ${OUTPUT_DIR_ENV} or '.')",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, help="override the config's strategy")
    p.add_argument("--seed", type=int, default=None, help="override the config's seed")
    p.add_argument("--out", default="metrics.csv")
    p.add_argument("--trace", default=None, help="also write a per-slot JSONL trace")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="paired-seed grid over one axis")
    p.add_argument("--preset", choices=sorted(SWEEP_PRESETS))
    p.add_argument("--config")
    p.add_argument("--axis", choices=SWEEP_AXES)
    p.add_argument("--values", help="comma-separated axis values")
    p.add_argument("--strategies", help="comma-separated strategy names")
    p.add_argument("--seeds", help="comma-separated seeds")
    p.add_argument("--policy-params", default=None)
    p.add_argument(
        "--jobs",
        type=int,
        default=None,
        help="parallel worker processes (default: one per axis point)",
    )
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("train", help="train the neural allocation policy")
    p.add_argument("--config", help="scenario config (default: built-in training scenario)")
    p.add_argument(
        "--scenario",
        choices=("downlink", "bandit"),
        default="downlink",
        help="downlink runs full episodes; bandit is the synthetic two-beam convergence probe",
    )
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--init", help="warm-start parameter file")
    p.add_argument("--out", default="policy_params.json")
    p.add_argument("--log", default=None, help="per-iteration cost CSV")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("epfd-audit", help="recompute flux margins from a trace")
    p.add_argument("--config", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_epfd_audit)

    p = sub.add_parser("validate-config", help="parse and cross-check a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
