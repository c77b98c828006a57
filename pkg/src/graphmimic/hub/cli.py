"""Command-line entry points.

Subcommands: collect-demos, train-il, train-rl, eval, explain,
profile-features, serve, replay, report. A flat key=value config file
(--config) supplies defaults; explicit flags always win. Relative
output paths land under GRAPHMIMIC_DATA_DIR when it is set.
"""

from __future__ import annotations

import argparse
import json
import sys

from .. import worlds
from ..demos import (
    default_blockworld_corpus,
    default_dishwasher_corpus,
    expert_for,
    load_demos,
    record,
    replay as replay_demos,
    save_demos,
)
from ..explain import ExplainConfig, explain_decision, feature_profile
from ..learn import (
    ILConfig,
    RLConfig,
    evaluate,
    ladder_specs,
    total_interactions,
    train_il,
    train_ppo,
)
from ..learn.evaluate import greedy_policy
from ..scenegraph import encode_scene
from ..worlds import WorldSpec
from .config import load_config, resolve_artifact
from .weights import load_weights, save_weights


def _add_world_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--world", default="kblock", choices=worlds.FAMILIES)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--stacks", type=int, default=1)
    parser.add_argument("--n-boxes", type=int, default=2)
    parser.add_argument("--box-mode", default="swap", choices=worlds.BOX_MODES)
    parser.add_argument("--n-plates", type=int, default=5)
    parser.add_argument("--n-bowls", type=int, default=5)
    parser.add_argument("--scenario", default="top_bottom", choices=worlds.SCENARIOS)
    parser.add_argument("--world-seed", type=int, default=0)
    parser.add_argument("--failure-rate", type=float, default=0.0)


def _world_spec(args: argparse.Namespace) -> WorldSpec:
    return WorldSpec(
        family=args.world,
        k=args.k,
        stacks=args.stacks,
        n_boxes=args.n_boxes,
        box_mode=args.box_mode,
        n_plates=args.n_plates,
        n_bowls=args.n_bowls,
        scenario=args.scenario,
        seed=args.world_seed,
        failure_rate=args.failure_rate,
    )


def _parse_seeds(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in text.split(",") if s.strip() != "")


def _cmd_collect_demos(args) -> int:
    if args.preset == "default-blockworld":
        dataset = default_blockworld_corpus(seed=args.seed)
    elif args.preset == "default-dishwasher":
        dataset = default_dishwasher_corpus(args.scenario, seed=args.seed)
    else:
        spec = _world_spec(args)
        dataset = record(spec, expert_for(spec), args.n_traj, seed=args.seed)
    out = resolve_artifact(args.out)
    save_demos(dataset, out)
    print(f"wrote {dataset.n_pairs()} pairs from {len(dataset.trajectories)} trajectories to {out}")
    return 0


def _cmd_train_il(args) -> int:
    dataset = load_demos(args.demos)
    config = ILConfig(
        architecture=args.arch,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        augment_factor=args.augment,
        log_path=resolve_artifact(args.log) if args.log else None,
    )
    params = train_il(dataset, config)
    out = resolve_artifact(args.out)
    save_weights(params, out)
    print(f"trained {args.arch} on {dataset.n_pairs()} pairs -> {out}")
    return 0


def _cmd_train_rl(args) -> int:
    config = RLConfig(
        interactions_per_stack=args.interactions,
        k_base=args.k_base,
        k_max=args.k_max,
        lambda_il=args.lambda_il,
        seed=args.seed,
    )
    demos_dataset = load_demos(args.demos) if args.demos else None
    specs = ladder_specs(config)
    result = train_ppo(specs, config, variant=args.variant,
                       demos_dataset=demos_dataset, architecture=args.arch)
    out = resolve_artifact(args.out)
    save_weights(result.final, out)
    if args.out_per_stage:
        for k, params in result.stages.items():
            save_weights(params, resolve_artifact(f"{args.out_per_stage}-k{k}.gmim"))
    print(
        f"{args.variant} over K={args.k_base}..{args.k_max} "
        f"({total_interactions(config)} interactions budgeted) -> {out}"
    )
    return 0


def _cmd_eval(args) -> int:
    params = load_weights(args.weights)
    spec = _world_spec(args)
    report = evaluate(params, spec, n_episodes=args.episodes, seeds=_parse_seeds(args.seeds))
    print(report.row())
    if args.json:
        print(json.dumps({"mean": report.mean, "std": report.std,
                          "success_rate": report.success_rate,
                          "seed_means": report.seed_means}))
    return 0


def _cmd_explain(args) -> int:
    params = load_weights(args.weights)
    spec = _world_spec(args)
    state = worlds.reset(spec)
    policy = greedy_policy(params)
    for _ in range(args.at_step):
        if worlds.is_done(state):
            break
        state, _, _ = worlds.step(state, policy(state))
    graph = encode_scene(state)
    explanation = explain_decision(
        params, graph, c_edges=args.c_e, c_features=args.c_f,
        config=ExplainConfig(steps=args.steps),
    )
    print(json.dumps(explanation.to_json(), indent=2))
    return 0


def _cmd_profile_features(args) -> int:
    params = load_weights(args.weights)
    spec = _world_spec(args)
    profile = feature_profile(params, spec, n_decisions=args.decisions,
                              c_edges=args.c_e, c_features=args.c_f)
    print(json.dumps({"counts": profile.counts, "top": profile.top(2),
                      "entropy": profile.entropy()}))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(demo_path=resolve_artifact(args.demos_out), ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_replay(args) -> int:
    dataset = load_demos(args.demo_file)
    problems = replay_demos(dataset)
    if problems:
        for p in problems:
            print(p)
        return 1
    print(f"{len(dataset.trajectories)} trajectories replay exactly")
    return 0


def _cmd_report(args) -> int:
    losses = []
    with open(args.log, "r", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec.get("event") == "epoch":
                losses.append(rec["loss"])
    if not losses:
        print("no epoch records found")
        return 1
    print(f"epochs: {len(losses)}  first loss: {losses[0]:.4f}  "
          f"best loss: {min(losses):.4f}  last loss: {losses[-1]:.4f}")
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="graphmimic")
    parser.add_argument("--config", default=None, help="flat key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collect-demos", help="record scripted expert demonstrations")
    p.add_argument("--preset", choices=("default-blockworld", "default-dishwasher"), default=None)
    _add_world_args(p)
    p.add_argument("--n-traj", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="demos.jsonl")
    p.set_defaults(fn=_cmd_collect_demos)

    p = sub.add_parser("train-il", help="imitation-train a policy on a demo file")
    p.add_argument("--demos", required=True)
    p.add_argument("--arch", default="sage", choices=("gcn", "sage", "gated", "attention"))
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--augment", type=int, default=10)
    p.add_argument("--log", default=None)
    p.add_argument("--out", default="weights.gmim")
    p.set_defaults(fn=_cmd_train_il)

    p = sub.add_parser("train-rl", help="train a PPO baseline")
    p.add_argument("--variant", default="gnn-seq", choices=("mlp", "gnn", "gnn-seq", "gnn-demo"))
    p.add_argument("--arch", default="sage", choices=("gcn", "sage", "gated", "attention"))
    p.add_argument("--k-base", type=int, default=2)
    p.add_argument("--k-max", type=int, default=9)
    p.add_argument("--interactions", type=int, default=2000)
    p.add_argument("--lambda-il", type=float, default=0.0)
    p.add_argument("--demos", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="rl-weights.gmim")
    p.add_argument("--out-per-stage", default=None)
    p.set_defaults(fn=_cmd_train_rl)

    p = sub.add_parser("eval", help="evaluate weights on a world")
    p.add_argument("--weights", required=True)
    _add_world_args(p)
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("explain", help="explain one greedy decision")
    p.add_argument("--weights", required=True)
    _add_world_args(p)
    p.add_argument("--at-step", type=int, default=0)
    p.add_argument("--c-e", type=int, default=3)
    p.add_argument("--c-f", type=int, default=1)
    p.add_argument("--steps", type=int, default=200)
    p.set_defaults(fn=_cmd_explain)

    p = sub.add_parser("profile-features", help="tally top features over many decisions")
    p.add_argument("--weights", required=True)
    _add_world_args(p)
    p.add_argument("--decisions", type=int, default=100)
    p.add_argument("--c-e", type=int, default=3)
    p.add_argument("--c-f", type=int, default=1)
    p.set_defaults(fn=_cmd_profile_features)

    p = sub.add_parser("serve", help="run the demonstration-collection service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--demos-out", default="ui-demos.jsonl")
    p.add_argument("--ui", default=None, help="static UI directory to mount at /")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("replay", help="verify a demo file replays exactly")
    p.add_argument("demo_file")
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("report", help="summarize a training metrics log")
    p.add_argument("--log", required=True)
    p.set_defaults(fn=_cmd_report)

    return parser, dict(sub.choices)


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    args, _ = parser.parse_known_args(argv)
    if args.config:
        defaults = load_config(args.config)
        known = {a.dest for a in parser._actions}
        for sp in subparsers.values():
            known |= {a.dest for a in sp._actions}
            sp.set_defaults(**{k: _coerce(sp, k, v) for k, v in defaults.items()
                               if any(a.dest == k for a in sp._actions)})
        unknown = set(defaults) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
    args = parser.parse_args(argv)
    return args.fn(args)


def _coerce(subparser: argparse.ArgumentParser, dest: str, value: str):
    for action in subparser._actions:
        if action.dest == dest and action.type is not None:
            return action.type(value)
    return value


if __name__ == "__main__":
    sys.exit(main())
