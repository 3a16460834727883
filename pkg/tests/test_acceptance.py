"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Tolerances are pinned here, not configurable.
"""

import math
import random

import numpy as np
import pytest

from oncilla import actuation as act
from oncilla import cpg, pso
from oncilla.gaitsim import GaitProgram, metrics, simulate, turning_metrics
from oncilla.leg import TrajectoryParams
from oncilla.sbcp import (BusConfig, HalfDuplexBus, Instruction, PacketGroup,
                          Response, SbcpFrame, SimSlave, decode, encode,
                          master_transact)
from oncilla.steering import LEGS, LegId, TurnCommand, TurnStrategy, apply_turn

TWO_PI = 2.0 * math.pi


def report(n, text):
    print(f"ACCEPTANCE {n}: PASS - {text}")


def test_criterion_1_froude_reproduction():
    fr_fast = act.froude(0.63, 0.16)
    fr_slow = act.froude(0.55, 0.16)
    assert fr_fast == pytest.approx(0.25, abs=0.01)
    assert fr_slow == pytest.approx(0.19, abs=0.01)
    report(1, f"froude(0.63, 0.16) = {fr_fast:.4f}, "
              f"froude(0.55, 0.16) = {fr_slow:.4f} (tol 0.01)")


def test_criterion_2_cost_of_transport():
    cot = act.cost_of_transport(89.0, 4.5, 0.63)
    assert cot == pytest.approx(3.2, abs=0.05)
    # exact scale invariance for power-of-two factors
    for k in (2.0, 4.0, 0.5, 8.0):
        assert act.cost_of_transport(k * 89.0, 4.5, k * 0.63) == cot
    report(2, f"COT(89 W, 4.5 kg, 0.63 m/s) = {cot:.4f} J/(N*m); "
              "COT(kP, m, kv) == COT(P, m, v) exactly")


def test_criterion_3_motor_envelope():
    stall = act.available_torque(0.0, act.LA_SPEC)
    top = act.available_torque(20.3, act.LA_SPEC)
    assert stall == 4.5
    assert top == 0.0
    report(3, "available_torque(0) = 4.5 N*m, available_torque(20.3) = 0"
              " (exact)")


def test_criterion_4_turning_table():
    from oncilla.steering import asl_amplifier

    right = (LegId.RF, LegId.RH)
    # amplifier table, exact
    for leg in LEGS:
        assert asl_amplifier(0.0, leg) == 1.0
    for leg in right:
        assert asl_amplifier(0.5, leg) == 0.0
        assert asl_amplifier(1.0, leg) == -1.0
    for leg in (LegId.LF, LegId.LH):
        assert asl_amplifier(0.5, leg) == 1.0
        assert asl_amplifier(1.0, leg) == 1.0

    # full stride reversal turns in place: radius < 0.05 m
    gait = apply_turn(
        GaitProgram.trot(frequency=3.5,
                         params=TrajectoryParams(step_length=0.4 / 7.0)),
        TurnCommand(TurnStrategy.ASL, varpi=1.0))
    log = simulate(gait, 6.0, 0.002)
    radius = turning_metrics(log)["radius_m"]
    assert radius < 0.05
    report(4, f"asl_amplifier table exact; in-place turn radius ="
              f" {radius:.4f} m (< 0.05)")


def test_criterion_5_cpg_phase_locking():
    params = cpg.make_trot_network(3.5, joints_per_leg=2)
    n = params.n
    rng = np.random.default_rng(2024)
    thetas = rng.uniform(0.0, TWO_PI, (100, n))
    rs = rng.uniform(-10.0, 10.0, (100, n))
    th, _ = cpg.run_batch(thetas, rs, params, dt=1e-3, n_steps=10000)

    hip = {"LF": 0, "RF": 2, "LH": 4, "RH": 6}

    def circ_err(a, b, target):
        d = th[:, a] - th[:, b] - target
        return np.abs(np.remainder(d + math.pi, TWO_PI) - math.pi)

    worst = 0.0
    for a, b in (("LF", "RF"), ("LH", "RH"), ("LF", "LH"), ("RF", "RH")):
        worst = max(worst, circ_err(hip[a], hip[b], math.pi).max())
    for a, b in (("LF", "RH"), ("RF", "LH")):
        worst = max(worst, circ_err(hip[a], hip[b], 0.0).max())
    # intra-leg nodes lock to zero offset as well
    worst = max(worst, circ_err(0, 1, 0.0).max())
    assert worst < 1e-3
    report(5, f"100 random initialisations locked to trot phases after 10 s"
              f" at dt=1 ms; worst residual {worst:.2e} rad (< 1e-3)")


def test_criterion_6_odometry_identities():
    results = []
    for step, expected in ((0.09, 0.63), (0.14, 0.98)):
        gait = GaitProgram.trot(frequency=3.5,
                                params=TrajectoryParams(step_length=step))
        log = simulate(gait, 4.0, 0.002)
        m = metrics(log)
        speed = m["speed_avg_mps"]
        ident = 2.0 * m["stride_effective_m"] * 3.5
        assert speed == pytest.approx(ident, rel=0.02)
        assert speed == pytest.approx(expected, rel=0.02)
        results.append(f"{speed:.3f} m/s (expect {expected})")
    report(6, "no-slip trot speeds " + ", ".join(results)
           + "; speed = 2*stride*f within 2%")


def test_criterion_7_sbcp():
    # 10,000 randomised frames round-trip exactly
    rng = random.Random(1234)
    for _ in range(10000):
        frame = SbcpFrame(class_id=rng.randrange(256),
                          device_id=rng.randrange(256),
                          instruction=rng.randrange(256),
                          params=bytes(rng.randrange(256)
                                       for _ in range(rng.randrange(0, 40))))
        result, consumed = decode(encode(frame))
        assert result == frame and consumed == len(encode(frame))

    # every single-bit corruption of 100 frames is detected (decode errors
    # or yields a different frame; a same-frame decode would be silent)
    for _ in range(100):
        frame = SbcpFrame(class_id=rng.randrange(256),
                          device_id=rng.randrange(256),
                          instruction=rng.randrange(256),
                          params=bytes(rng.randrange(256)
                                       for _ in range(rng.randrange(0, 16))))
        wire = encode(frame)
        for byte_idx in range(len(wire)):
            for bit in range(8):
                corrupted = bytearray(wire)
                corrupted[byte_idx] ^= 1 << bit
                result, _ = decode(bytes(corrupted))
                assert not (isinstance(result, SbcpFrame) and result == frame)

    # 8 request/response pairs (<= 16-byte frames) inside the 1 kHz budget
    cfg = BusConfig(rng_seed=7)
    bus = HalfDuplexBus(cfg, slaves=[
        SimSlave(class_id=0x10, device_id=i + 1, response_latency=0.0)
        for i in range(8)])
    frames = tuple(SbcpFrame(class_id=0x10, device_id=i + 1,
                             instruction=Instruction.READ,
                             params=bytes([0, 10])) for i in range(8))
    outcomes = master_transact(PacketGroup(frames=frames), bus)
    assert all(isinstance(o, Response) for o in outcomes)
    total = outcomes[-1].t
    assert total < 1e-3
    report(7, f"10k frames round-trip; all single-bit corruptions detected;"
              f" 8-packet transaction took {total * 1e6:.1f} us (< 1000)")


def test_criterion_8_pso():
    cfg = pso.SwarmConfig(particles=30, iterations=200, seed=1)
    space = pso.SearchSpace(params=tuple(
        (f"x{i}", -5.0, 5.0) for i in range(5)))
    result = pso.optimize(lambda x: float(np.sum(np.square(x))), space, cfg,
                          maximize=False)
    assert result.best_score < 1e-6

    bounds = pso.SearchSpace(params=(("step_length_m", 0.04, 0.12),))
    gait_cfg = pso.SwarmConfig(particles=8, iterations=12, seed=3)
    gait_result = pso.optimize(lambda v: pso.gait_objective(v, bounds),
                               bounds, gait_cfg)
    best_step = gait_result.best_params["step_length_m"]
    assert best_step == pytest.approx(0.12, abs=2e-3)
    report(8, f"sphere best {result.best_score:.2e} (< 1e-6); gait search"
              f" drove step length to {best_step:.4f} m (bound 0.12)")


def test_criterion_9_sldm_shape_check():
    rows = act.cot_sweep([0.05, 0.23, 0.41, 0.57, 0.71])
    cots = {round(r.speed, 2): r.cot for r in rows}
    values = [r.cot for r in rows]
    assert cots[0.05] > cots[0.41]
    assert cots[0.71] <= 1.3 * min(values)
    report(9, "COT declines with speed: "
           + ", ".join(f"{r.cot:.2f}@{r.speed:.2f}" for r in rows)
           + " J/(N*m); hardware point values are out of desk-scale scope")
