"""Command line entry points: gen-kb, train, eval, play, serve."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import agents, evaluation, kb as kb_mod, nn, service as service_mod
from .simulator import SimulatorConfig


def _add_sim_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--target-mode", choices=("uniform", "popularity"), default="popularity")
    parser.add_argument("--noise", type=float, default=0.0, help="answer corruption probability")
    parser.add_argument("--sim-seed", type=int, default=0)


def _sim_config(args) -> SimulatorConfig:
    return SimulatorConfig(target_mode=args.target_mode, noise_epsilon=args.noise, seed=args.sim_seed)


def _load_policy(path: str) -> nn.MlpParams:
    p = Path(path)
    if p.is_dir():
        return agents.load_checkpoint(p).policy
    return nn.load_params(p)


def cmd_gen_kb(args) -> int:
    kb = kb_mod.generate_synthetic_kb(
        n_objects=args.objects,
        n_questions=args.questions,
        n_code_questions=args.code_questions,
        count_scale=args.scale,
        answer_ambiguity=args.ambiguity,
        seed=args.seed,
        zipf_exponent=args.zipf,
    )
    kb_mod.save_kb(kb, args.out)
    print(f"wrote {kb.n_objects} objects x {kb.n_questions} questions to {args.out}")
    return 0


def cmd_train(args) -> int:
    kb = kb_mod.load_kb(args.kb)
    config = agents.TrainingConfig(
        episodes=args.episodes,
        gamma=args.gamma,
        lr_policy=args.lr_policy,
        lr_value=args.lr_value,
        lr_reward=args.lr_reward,
        hidden_size=args.hidden,
        batch_size=args.batch_size,
        d1_capacity=args.capacity,
        d2_capacity=args.capacity,
        d1_threshold=args.threshold,
        d2_threshold=args.threshold,
        eval_interval=args.eval_interval,
        eval_episodes=args.eval_episodes,
        reward_mode=args.mode,
        s0_mode=args.s0_mode,
        horizon=args.horizon,
        seed=args.seed,
        eval_seed=args.eval_seed,
    )
    result = agents.run_training(
        kb,
        _sim_config(args),
        config,
        metrics_path=args.metrics,
        checkpoint_dir=args.checkpoint_dir,
        progress=lambda row: print(
            f"step {row.step:>8}  episodes {row.episodes:>7}  win rate {row.win_rate:.3f}"
        ),
    )
    print(f"trained {result.total_steps} steps; final win rate {result.final_win_rate:.3f}")
    return 0


def cmd_eval(args) -> int:
    kb = kb_mod.load_kb(args.kb)
    if args.agent == "infogain":
        agent = agents.InfoGainAgent(kb)
    else:
        agent = agents.PolicyAgent(_load_policy(args.checkpoint), mode=args.policy_mode)
    sim = _sim_config(args)
    result = evaluation.evaluate_win_rate(
        agent, kb, sim, args.episodes, horizon=args.horizon, s0_mode=args.s0_mode
    )
    print(f"win rate {result}")
    report = evaluation.EvalReport(
        config={
            "agent": args.agent,
            "horizon": args.horizon,
            "episodes": args.episodes,
            "noise": args.noise,
            "target_mode": args.target_mode,
        },
        seeds=[args.sim_seed],
    )
    if args.budgets:
        budgets = [int(b) for b in args.budgets.split(",")]
        report.budget_series = evaluation.win_rate_vs_budget(
            agent, kb, sim, budgets, args.episodes, s0_mode=args.s0_mode
        )
        for b, res in report.budget_series:
            print(f"  budget {b:>3}: {res}")
    if args.noise_sweep:
        epsilons = [float(e) for e in args.noise_sweep.split(",")]
        report.noise_series = evaluation.noise_sweep(
            agent, kb, sim, epsilons, args.episodes, horizon=args.horizon, s0_mode=args.s0_mode
        )
        for eps, res in report.noise_series:
            print(f"  noise {eps:.2f}: {res}")
    if args.out_dir:
        report.save(args.out_dir)
        print(f"report written to {args.out_dir}")
    return 0


def cmd_play(args) -> int:
    kb = kb_mod.load_kb(args.kb)
    policy = _load_policy(args.checkpoint)
    svc = service_mod.GameService(
        kb,
        policy,
        policy_mode=args.policy_mode,
        horizon=args.horizon,
        transcript_path=args.transcript,
        seed=args.seed,
    )
    print("Think of an object; answer each question with y / n / u.")
    state = svc.create_session()
    session_id = state["id"]
    tokens = {"y": "yes", "n": "no", "u": "unknown"}
    while "question_text" in state:
        print(f"[{state.get('question_number', '?')}/{svc.horizon}] {state['question_text']}")
        raw = input("> ").strip().lower()
        token = tokens.get(raw, raw)
        try:
            state = svc.submit_answer(session_id, token)
        except service_mod.ServiceError as err:
            print(f"  ({err.message})")
    print(f"My guess: {state['guess']}")
    verdict = input("Was that right? [y/n] > ").strip().lower()
    summary = svc.submit_result(session_id, verdict.startswith("y"))
    print("I win!" if summary["won"] else "You got me.", f"(reward {summary['reward']:+.0f})")
    return 0


def cmd_serve(args) -> int:
    kb = kb_mod.load_kb(args.kb)
    policy = _load_policy(args.checkpoint)
    svc = service_mod.GameService(
        kb,
        policy,
        policy_mode=args.policy_mode,
        horizon=args.horizon,
        transcript_path=args.transcript,
        debug=args.debug,
    )
    host, _, port = args.addr.rpartition(":")
    server = service_mod.make_server(
        svc, (host or "127.0.0.1", int(port)), static_dir=args.static_dir, quiet=False
    )
    print(f"serving on http://{server.server_address[0]}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="q20", description="Belief-state 20 Questions toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-kb", help="generate a synthetic knowledge base")
    p.add_argument("--objects", type=int, default=64)
    p.add_argument("--questions", type=int, default=32)
    p.add_argument("--code-questions", type=int, default=6)
    p.add_argument("--scale", type=int, default=1000)
    p.add_argument("--ambiguity", type=float, default=0.05)
    p.add_argument("--zipf", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_kb)

    p = sub.add_parser("train", help="train the questioner against the simulator")
    p.add_argument("--kb", required=True)
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--mode", choices=agents.REWARD_MODES, default="rewardnet")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--lr-policy", type=float, default=1e-3)
    p.add_argument("--lr-value", type=float, default=1e-2)
    p.add_argument("--lr-reward", type=float, default=1e-2)
    p.add_argument("--hidden", type=int, default=1000)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--capacity", type=int, default=100_000)
    p.add_argument("--threshold", type=int, default=1000)
    p.add_argument("--eval-interval", type=int, default=5000)
    p.add_argument("--eval-episodes", type=int, default=2000)
    p.add_argument("--eval-seed", type=int, default=20_877)
    p.add_argument("--s0-mode", choices=("uniform", "popularity"), default="uniform")
    p.add_argument("--horizon", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", default=None, help="write the metrics CSV here")
    p.add_argument("--checkpoint-dir", default=None)
    _add_sim_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a policy or the info-gain baseline")
    p.add_argument("--kb", required=True)
    p.add_argument("--checkpoint", default=None, help="checkpoint dir or policy .npz")
    p.add_argument("--agent", choices=("policy", "infogain"), default="policy")
    p.add_argument("--policy-mode", choices=("greedy", "sample"), default="greedy")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=20)
    p.add_argument("--s0-mode", choices=("uniform", "popularity"), default="uniform")
    p.add_argument("--budgets", default=None, help="comma-separated question budgets")
    p.add_argument("--noise-sweep", default=None, help="comma-separated epsilon values")
    p.add_argument("--out-dir", default=None)
    _add_sim_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("play", help="play a live game in the terminal")
    p.add_argument("--kb", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--policy-mode", choices=("greedy", "sample"), default="greedy")
    p.add_argument("--horizon", type=int, default=20)
    p.add_argument("--transcript", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("serve", help="serve the live-play HTTP API (and web UI)")
    p.add_argument("--addr", default="127.0.0.1:8000")
    p.add_argument("--kb", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--policy-mode", choices=("greedy", "sample"), default="greedy")
    p.add_argument("--horizon", type=int, default=20)
    p.add_argument("--transcript", default=None)
    p.add_argument("--static-dir", default=None, help="directory with the web UI assets")
    p.add_argument("--debug", action="store_true", help="expose top beliefs in session views")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "eval" and args.agent == "policy" and not args.checkpoint:
        print("eval with the policy agent needs --checkpoint", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
