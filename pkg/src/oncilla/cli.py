"""Experiment runner: gait runs, turning, COT sweeps, SBCP tools, PSO tuning.

Every run writes CSV outputs plus a manifest (config hash, seed, versions)
into the output directory, and is byte-reproducible from that manifest.
Exit codes: 0 success, 1 validation/config error, 2 runtime error.
"""

import argparse
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, actuation, config as config_mod, gaitsim, pso
from .errors import ConfigError, OncillaError, ValidationError
from .kernel import backend_name
from .sbcp import (HalfDuplexBus, Instruction, PacketGroup, Response,
                   SbcpFrame, SimSlave, decode, encode, master_transact)
from .steering import TurnCommand, TurnStrategy, apply_turn

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _fmt(v):
    return format(float(v), ".10g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) if isinstance(c, str) else _fmt(c)
                              for c in row) + "\n")


def _write_metrics_csv(path, metrics):
    _write_csv(path, list(metrics), [list(metrics.values())])


class Runner:
    """Shared context: effective config, seed, output dir, manifest."""

    def __init__(self, args):
        self.args = args
        self.cfg = config_mod.load(args.config) if args.config \
            else config_mod.from_dict({})
        self.seed = args.seed if args.seed is not None else self.cfg.seed
        out = args.out or os.environ.get("ONCILLA_OUT") or "."
        self.outdir = Path(out)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.outputs = []

    def path(self, name):
        self.outputs.append(name)
        return self.outdir / name

    def say(self, message):
        if not self.args.quiet:
            print(message)

    def write_manifest(self, subcommand):
        manifest = {
            "subcommand": subcommand,
            "seed": self.seed,
            "config_sha256": config_mod.config_hash(self.cfg),
            "versions": {
                "oncilla": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
            },
            "kernel_backend": backend_name(),
            "outputs": self.outputs,
        }
        with open(self.outdir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def cmd_gait_run(runner):
    gait = config_mod.make_gait(runner.cfg)
    sim = runner.cfg.sim
    log = gaitsim.simulate(gait, sim.duration_s, sim.dt_s)
    log.to_csv(runner.path("gait_log.csv"))
    m = gaitsim.metrics(log)
    _write_metrics_csv(runner.path("gait_metrics.csv"), m)
    runner.say(f"speed_avg {m['speed_avg_mps']:.3f} m/s, stride"
               f" {m['stride_effective_m']:.4f} m over {sim.duration_s} s")
    return EXIT_OK


def cmd_gait_metrics(runner):
    log = gaitsim.TrajectoryLog.from_csv(runner.args.log,
                                         runner.cfg.gait.frequency_hz)
    m = gaitsim.metrics(log)
    _write_metrics_csv(runner.path("gait_metrics.csv"), m)
    runner.say(", ".join(f"{k}={v:.5g}" for k, v in m.items()))
    return EXIT_OK


def cmd_turn(runner):
    args = runner.args
    strategy = TurnStrategy(args.strategy)
    cmd = TurnCommand(strategy=strategy, varpi=args.varpi,
                      yaw_rate=args.yaw_rate)
    base = config_mod.make_gait(runner.cfg)
    gait = apply_turn(base, cmd)
    sim = runner.cfg.sim
    log = gaitsim.simulate(gait, sim.duration_s, sim.dt_s)
    log.to_csv(runner.path("turn_log.csv"))
    m = gaitsim.turning_metrics(log)
    _write_metrics_csv(runner.path("turning_metrics.csv"), m)
    runner.say(f"radius {m['radius_m']:.3f} m, full turn"
               f" {m['time_full_turn_s']:.2f} s, speed"
               f" {m['speed_avg_mps']:.3f} m/s")
    return EXIT_OK


def cmd_cot_sweep(runner):
    motor = runner.cfg.motor
    results = actuation.cot_sweep(
        motor.sweep_speeds_mps,
        step_length=runner.cfg.gait.step_length_m,
        lift_height=runner.cfg.gait.lift_height_m,
        effective_stride_fraction=motor.effective_stride_fraction,
        mass=motor.mass_kg, gear_efficiency=motor.gear_efficiency)
    _write_csv(runner.path("cot_sweep.csv"),
               ["speed_mps", "power_W", "cot_J_per_Nm"],
               [(r.speed, r.power, r.cot) for r in results])
    for r in results:
        runner.say(f"v={r.speed:.2f} m/s  P={r.power:.2f} W"
                   f"  COT={r.cot:.2f} J/(N*m)")
    return EXIT_OK


def cmd_optimize(runner):
    p = runner.cfg.pso
    space = pso.SearchSpace(params=tuple(
        (name, lo, hi) for name, (lo, hi) in p.bounds.items()))
    swarm = pso.SwarmConfig(particles=p.particles, iterations=p.iterations,
                            inertia=p.inertia, cognitive=p.cognitive,
                            social=p.social, seed=runner.seed)
    base = config_mod.make_gait(runner.cfg)
    result = pso.optimize(
        lambda v: pso.gait_objective(v, space, base=base,
                                     slip=runner.cfg.gait.slip),
        space, swarm)
    _write_csv(runner.path("convergence.csv"),
               ["iteration", "best_score", "mean_score"], result.trace)
    _write_csv(runner.path("best_params.csv"),
               list(result.best_params) + ["distance_m"],
               [list(result.best_params.values()) + [result.best_score]])
    runner.say(f"best distance {result.best_score:.3f} m at "
               + ", ".join(f"{k}={v:.4g}"
                           for k, v in result.best_params.items()))
    return EXIT_OK


def cmd_sbcp_encode(runner):
    args = runner.args
    frame = SbcpFrame(class_id=args.class_id, device_id=args.device_id,
                      instruction=args.instruction,
                      params=bytes.fromhex(args.params))
    print(encode(frame).hex().upper())
    return EXIT_OK


def cmd_sbcp_decode(runner):
    raw = bytes.fromhex(runner.args.hex)
    result, consumed = decode(raw)
    if not isinstance(result, SbcpFrame):
        raise ValidationError(f"not a valid frame: {result}")
    print(f"class_id:    0x{result.class_id:02X}"
          + ("  (legacy Bioloid)" if result.is_legacy else ""))
    print(f"device_id:   0x{result.device_id:02X}")
    print(f"length:      {result.length}")
    print(f"instruction: 0x{result.instruction:02X}")
    print(f"params:      {result.params.hex().upper() or '(none)'}")
    print(f"checksum:    0x{result.checksum:02X}  ({consumed} bytes)")
    return EXIT_OK


def cmd_sbcp_demo(runner):
    n = runner.args.slaves
    cfg = config_mod.make_bus_config(runner.cfg, seed=runner.seed)
    bus = HalfDuplexBus(cfg, slaves=[
        SimSlave(class_id=0x10, device_id=i + 1) for i in range(n)])
    for start in range(0, n, 8):
        frames = [SbcpFrame(class_id=0x10, device_id=i + 1,
                            instruction=Instruction.PING)
                  for i in range(start, min(start + 8, n))]
        outcomes = master_transact(PacketGroup(frames=tuple(frames)), bus)
        ok = sum(isinstance(o, Response) for o in outcomes)
        runner.say(f"pinged devices {start + 1}..{start + len(frames)}:"
                   f" {ok}/{len(frames)} responses")
    _write_csv(runner.path("event_trace.csv"),
               ["t_us", "actor", "event", "bytes_hex"],
               [(t * 1e6, actor, event, data)
                for t, actor, event, data in bus.trace])
    runner.say(f"bus idle at t={bus.now * 1e6:.2f} us;"
               f" {len(bus.trace)} trace rows")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oncilla",
        description="Quadruped gait experiments: CPG gait runs, turning,"
                    " cost-of-transport sweeps, SBCP bus tools and PSO"
                    " gait optimisation.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON experiment config (defaults used if absent)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (default $ONCILLA_OUT or .)")
    common.add_argument("--quiet", action="store_true",
                        help="suppress progress output")

    sub = parser.add_subparsers(dest="command", required=True)

    gait = sub.add_parser("gait", help="gait simulation and metrics")
    gait_sub = gait.add_subparsers(dest="gait_command", required=True)
    run = gait_sub.add_parser("run", parents=[common],
                              help="simulate the configured gait")
    run.set_defaults(func=cmd_gait_run, name="gait run")
    gm = gait_sub.add_parser("metrics", parents=[common],
                             help="recompute metrics from a log CSV")
    gm.add_argument("--log", required=True, metavar="CSV",
                    help="trajectory log produced by 'gait run'")
    gm.set_defaults(func=cmd_gait_metrics, name="gait metrics")

    turn = sub.add_parser("turn", parents=[common],
                          help="run a turning experiment")
    turn.add_argument("--strategy", choices=[s.value for s in TurnStrategy],
                      required=True)
    turn.add_argument("--varpi", type=float, default=0.0,
                      help="ASL turning factor in [-1, 1]")
    turn.add_argument("--yaw-rate", type=float, default=0.0,
                      help="AA_AMP desired yaw rate, rad/s")
    turn.set_defaults(func=cmd_turn, name="turn")

    cot = sub.add_parser("cot", help="cost-of-transport model")
    cot_sub = cot.add_subparsers(dest="cot_command", required=True)
    sweep = cot_sub.add_parser("sweep", parents=[common],
                               help="COT over the configured speed sweep")
    sweep.set_defaults(func=cmd_cot_sweep, name="cot sweep")

    opt = sub.add_parser("optimize", parents=[common],
                         help="PSO gait-parameter search")
    opt.set_defaults(func=cmd_optimize, name="optimize")

    sbcp = sub.add_parser("sbcp", help="SBCP frame and bus tools")
    sbcp_sub = sbcp.add_subparsers(dest="sbcp_command", required=True)
    enc = sbcp_sub.add_parser("encode", parents=[common],
                              help="build a frame and print its hex bytes")
    enc.add_argument("--class-id", type=lambda s: int(s, 0), required=True)
    enc.add_argument("--device-id", type=lambda s: int(s, 0), required=True)
    enc.add_argument("--instruction", type=lambda s: int(s, 0), required=True)
    enc.add_argument("--params", default="", help="parameter bytes as hex")
    enc.set_defaults(func=cmd_sbcp_encode, name="sbcp encode")
    dec = sbcp_sub.add_parser("decode", parents=[common],
                              help="pretty-print a hex frame")
    dec.add_argument("hex", help="frame bytes as hex")
    dec.set_defaults(func=cmd_sbcp_decode, name="sbcp decode")
    demo = sbcp_sub.add_parser("demo", parents=[common],
                               help="simulate grouped pings on the bus")
    demo.add_argument("--slaves", type=int, default=8)
    demo.set_defaults(func=cmd_sbcp_demo, name="sbcp demo")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        runner = Runner(args)
    except (ConfigError, ValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        code = args.func(runner)
        runner.write_manifest(args.name)
        return code
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OncillaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:  # malformed user input (hex strings, numbers)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
