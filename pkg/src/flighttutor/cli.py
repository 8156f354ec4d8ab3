"""Command-line entry point tying the pipeline together.

Subcommands: gen-demos, train, eval, serve, replay, synth-student.

Exit codes:
  0  success
  1  runtime error (missing or malformed files, failed session)
  2  usage or configuration error
  3  evaluation gate failure (eval only)
  4  replay divergence (replay only)
"""

from __future__ import annotations

import argparse
import sys
import time

from . import data, seeding
from .autopilot import ExpertGains, TaskSpec, generate_demos, sample_task
from .config import CliConfig, ConfigError, format_resolved, load_config
from .evaluation import (
    action_agreement,
    avg_heading_error,
    policy_fn_from,
    rollout,
    save_trajectory,
    synthesize_student,
)
from .network import SchemaMismatchError, load_policy, save_policy
from .session import (
    MODE_LIVE,
    SessionConfig,
    SessionError,
    SessionServer,
    load_session_log,
    verify_replay,
)
from .training import TrainingDivergedError, train
from .tutor import TutorThresholds

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_GATE = 3
EXIT_DIVERGED = 4


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="INI config file (sections: sim, expert, train, tutor, session, eval)")
    p.add_argument("--set", metavar="SECTION.KEY=VALUE", action="append", default=[],
                   dest="overrides", help="override one config value (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flighttutor",
        description="Straight-and-level flight tutor: demonstrate, train, evaluate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-demos", help="fly expert demonstrations and write a dataset")
    _add_common(p)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--duration", type=float, default=30.0, help="seconds per trial")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="FILE")

    p = sub.add_parser("train", help="train the imitation policy on a dataset")
    _add_common(p)
    p.add_argument("--data", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE", help="policy file to write")
    p.add_argument("--seed", type=int, default=None, help="overrides train.seed")
    p.add_argument("--curve", metavar="FILE", help="training-curve table (default: OUT.curve.tsv)")
    p.add_argument("--fig", metavar="FILE", help="training-curve figure (default: OUT.curve.png)")
    p.add_argument("--no-fig", action="store_true", help="skip figure rendering")

    p = sub.add_parser("eval", help="measure rollout heading error and the deployment gate")
    _add_common(p)
    p.add_argument("--policy", required=True, metavar="FILE")
    p.add_argument("--trials", type=int, default=None, help="overrides eval.trials")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE", help="write the full (trial, tick, error) table")
    p.add_argument("--fig", metavar="FILE", help="error-curve figure (default: OUT with .png)")
    p.add_argument("--no-fig", action="store_true")

    p = sub.add_parser("serve", help="run the tutoring session server until interrupted")
    _add_common(p)
    p.add_argument("--policy", required=True, metavar="FILE")
    p.add_argument("--port", type=int, default=None, help="overrides session.port")
    p.add_argument("--http-port", type=int, default=None, help="overrides session.http_port (web UI)")
    p.add_argument("--log", metavar="FILE", help="session log path")

    p = sub.add_parser("replay", help="re-run the tutor over a session log and verify determinism")
    _add_common(p)
    p.add_argument("--log", required=True, metavar="FILE")
    p.add_argument("--fast", action="store_true", help="no tick-rate pacing")
    p.add_argument("--policy", metavar="FILE", help="override the policy path recorded in the log")

    p = sub.add_parser("synth-student", help="synthesize a flawed student flight for tutor testing")
    _add_common(p)
    p.add_argument("--flaw", required=True, choices=["overshooter", "pitch-neglect"])
    p.add_argument("--severity", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=30.0)
    p.add_argument("--out", required=True, metavar="FILE", help="trajectory file to write")

    return parser


def _load(args: argparse.Namespace) -> CliConfig:
    return load_config(args.config, args.overrides)


def _usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def cmd_gen_demos(args) -> int:
    if args.trials < 1:
        return _usage(f"--trials must be >= 1, got {args.trials}")
    if args.duration <= 0:
        return _usage(f"--duration must be positive, got {args.duration}")
    cfg = _load(args)
    print(format_resolved(cfg))
    dataset = generate_demos(args.trials, args.duration, cfg.expert, cfg.sim, args.seed)
    data.save(dataset, args.out)
    total_s = args.trials * args.duration
    print(f"wrote {len(dataset)} samples ({args.trials} trials x {args.duration} s "
          f"= {total_s / 60:.6g} min) to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load(args)
    if args.seed is not None:
        cfg.train.seed = args.seed
    print(format_resolved(cfg))
    dataset = data.load(args.data)

    def eval_hook(policy) -> float:
        report = avg_heading_error(
            policy,
            n_trials=cfg.eval.trials,
            seed=cfg.train.seed,
            duration=cfg.eval.duration,
            params=cfg.sim,
        )
        return report.avg_heading_error

    policy, curve = train(dataset, cfg.train, eval_hook)
    save_policy(policy, args.out)

    curve_path = args.curve or f"{args.out}.curve.tsv"
    from .reporting import save_training_figure, write_training_curve

    write_training_curve(curve, curve_path)
    fig_path = None
    if not args.no_fig:
        fig_path = args.fig or f"{args.out}.curve.png"
        save_training_figure(curve, fig_path)

    print(f"trained {curve.epochs[-1]} epochs on {len(dataset)} samples")
    print(f"final per-sample train loss = {curve.train_loss[-1]!r}")
    print(f"best rollout heading error = {curve.best_metric!r} deg at epoch {curve.best_epoch}")
    print(f"wrote policy to {args.out}, curve to {curve_path}"
          + (f", figure to {fig_path}" if fig_path else ""))
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _load(args)
    if args.trials is not None:
        cfg.eval.trials = args.trials
    print(format_resolved(cfg))
    policy = load_policy(args.policy)
    report = avg_heading_error(
        policy, n_trials=cfg.eval.trials, seed=args.seed,
        duration=cfg.eval.duration, params=cfg.sim,
    )
    agreement = action_agreement(
        policy, n_trials=cfg.eval.trials, seed=args.seed,
        duration=cfg.eval.duration, params=cfg.sim, gains=cfg.expert,
    )

    print("trial\tmean_abs_heading_error")
    for trial, mean in enumerate(report.per_trial_mean):
        print(f"{trial}\t{mean!r}")
    print(f"avg_heading_error = {report.avg_heading_error!r} deg "
          f"(gate: < {cfg.eval.max_avg_heading_error})")
    print(f"action_distance_to_expert = {agreement!r} "
          f"(gate: < {cfg.eval.max_action_distance})")

    if args.out:
        from .reporting import save_eval_figure, write_eval_table
        write_eval_table(report, args.out)
        print(f"wrote report table to {args.out}")
        if not args.no_fig:
            fig_path = args.fig or f"{args.out}.png"
            save_eval_figure(report, fig_path, cfg.sim.dt)
            print(f"wrote report figure to {fig_path}")

    heading_ok = report.avg_heading_error < cfg.eval.max_avg_heading_error
    action_ok = agreement < cfg.eval.max_action_distance
    print(f"deployment gate: {'PASS' if heading_ok and action_ok else 'FAIL'}")
    return EXIT_OK if heading_ok and action_ok else EXIT_GATE


def _session_config_from(cfg: CliConfig, policy_path: str, log_path: str | None) -> SessionConfig:
    s = cfg.session
    task = TaskSpec(
        target_heading=s.target_heading,
        target_altitude=s.target_altitude,
        target_airspeed=s.target_airspeed,
        duration=s.duration,
        seed=s.task_seed,
        initial_heading=s.initial_heading,
    )
    return SessionConfig(
        task=task,
        thresholds=cfg.tutor,
        sim=cfg.sim,
        mode=s.mode,
        tick_hz=s.tick_hz,
        policy_path=policy_path,
        log_path=log_path,
        host=s.host,
        port=s.port,
        udp_port=s.udp_port or None,
        http_port=s.http_port or None,
        static_dir=s.static_dir or None,
        trajectory_path=s.trajectory_path or None,
        real_time=s.real_time,
    )


def cmd_serve(args) -> int:
    cfg = _load(args)
    if args.port is not None:
        cfg.session.port = args.port
    if args.http_port is not None:
        cfg.session.http_port = args.http_port
    print(format_resolved(cfg))
    policy = load_policy(args.policy)
    config = _session_config_from(cfg, args.policy, args.log)
    config.validate()

    server = SessionServer(config, policy)
    print(f"session server listening on {config.host}:{server.bound_port}", flush=True)
    web = None
    if config.http_port is not None:
        from .web import WebServer
        web = WebServer(config, policy, static_dir=config.static_dir)
        web.start_background()
        print(f"web UI on http://{config.host}:{web.bound_port}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("interrupted, shutting down")
    finally:
        server.stop()
        if web is not None:
            web.stop()
    return EXIT_OK


def cmd_replay(args) -> int:
    log = load_session_log(args.log)
    policy_path = args.policy or log.config.policy_path
    if not policy_path:
        return _usage("log records no policy path; pass --policy")
    policy = load_policy(policy_path)
    if not args.fast and log.config.tick_hz > 0:
        # paced walk-through, then verification
        period = 1.0 / log.config.tick_hz
        for event in log.events:
            time.sleep(period)
            if event.flags:
                kinds = ", ".join(f.kind for f in event.flags)
                print(f"t={event.t:.2f}s flags: {kinds}")
    divergences = verify_replay(log, policy)
    if divergences:
        print(f"replay DIVERGED at {len(divergences)} ticks:")
        for line in divergences[:20]:
            print(f"  {line}")
        return EXIT_DIVERGED
    print(f"replay deterministic: {len(log.events)} events reproduced exactly")
    return EXIT_OK


def cmd_synth_student(args) -> int:
    if not (0.0 < args.severity <= 1.0):
        return _usage(f"--severity must be in (0, 1], got {args.severity}")
    if args.duration <= 0:
        return _usage(f"--duration must be positive, got {args.duration}")
    cfg = _load(args)
    print(format_resolved(cfg))
    student = synthesize_student(cfg.expert, args.flaw, args.severity, seed=args.seed)
    init_rng = seeding.rng_for(args.seed, seeding.STUDENT, 1)
    task = sample_task(
        init_rng.uniform(0.0, 360.0),
        seeding.sub_seed(args.seed, seeding.STUDENT, 2),
        target_airspeed=cfg.sim.v_trim,
        duration=args.duration,
    )
    traj = rollout(student, task, args.duration, cfg.sim)
    save_trajectory(traj, cfg.sim, args.out)
    print(f"wrote {len(traj.states)}-tick {args.flaw} trajectory (severity {args.severity}) to {args.out}")
    print(f"final heading error {traj.summary.final_heading_error:.2f} deg, "
          f"mean |altitude error| {traj.summary.mean_abs_altitude_error:.2f} m")
    return EXIT_OK


_COMMANDS = {
    "gen-demos": cmd_gen_demos,
    "train": cmd_train,
    "eval": cmd_eval,
    "serve": cmd_serve,
    "replay": cmd_replay,
    "synth-student": cmd_synth_student,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, data.DatasetFormatError, SchemaMismatchError,
            SessionError, TrainingDivergedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
