"""End-to-end acceptance gate.

Each check prints exactly one line

    ACCEPTANCE <n> <name>: PASS|FAIL -- <measurements>

straight to the terminal (bypassing capture) before asserting, so the
scorecard is visible in full even when a criterion fails.  Tolerances are
the shipped contracts; a failing line is a finding, not a test bug: the
reference scenario's truncated control series is known to exceed what the
verification simulator can cancel, and the gate reports that honestly.
"""
import math
import time

import numpy as np
import pytest

from schroflat import (
    BeamData,
    IntegrationProblem,
    SimConfig,
    beam_controls,
    beam_simulate,
    beam_terminal_report,
    flat_output_derivatives,
    integrate,
    kernel_derivative,
    lift_initial_data,
    odd_kernel,
    simulate,
    state_series,
    terminal_report,
)
from schroflat.quadrature import NODES15, WEIGHTS15
from schroflat.smoothing import PiecewiseProfile
from schroflat.cli import builtin_scenarios, sine_profile, synthesize_control


@pytest.fixture
def announce(capfd):
    def _announce(num, name, ok, detail):
        with capfd.disabled():
            print(f"ACCEPTANCE {num} {name}: {'PASS' if ok else 'FAIL'} -- {detail}")
        assert ok, f"ACCEPTANCE {num} {name}: {detail}"
    return _announce


@pytest.fixture(scope="module")
def ref_bundle():
    """Reference scenario synthesized and simulated once, shared below."""
    sc = builtin_scenarios()["reference"]
    t0 = time.perf_counter()
    trace, fo, diags = synthesize_control(sc)
    snapshots = simulate(sc.theta0, trace, sc.sim)
    runtime = time.perf_counter() - t0
    return {"sc": sc, "trace": trace, "fo": fo, "diags": diags,
            "snapshots": snapshots, "runtime": runtime}


@pytest.fixture(scope="module")
def beam_bundle():
    cfg = SimConfig(Nx=128, Nt=2000, T=2.0, snapshot_count=9)
    data = BeamData(sine_profile(), PiecewiseProfile.zero())
    ctl = beam_controls(data, 1.4, 2.0, 1.6, cfg=cfg)
    result = beam_simulate(data, ctl.u1, ctl.u2, cfg, u2_avg=ctl.u2_avg)
    return {"cfg": cfg, "data": data, "ctl": ctl, "result": result}


def test_criterion_1_reference_scenario_steering(announce, ref_bundle):
    sc = ref_bundle["sc"]
    rels = [terminal_report(ref_bundle["snapshots"])["relative"]]
    for lvl in (1, 2):
        cfg = SimConfig(Nx=sc.sim.Nx * 2 ** lvl, Nt=sc.sim.Nt * 2 ** lvl,
                        T=sc.T, snapshot_count=sc.sim.snapshot_count)
        rels.append(terminal_report(
            simulate(sc.theta0, ref_bundle["trace"], cfg))["relative"])
    runtime = ref_bundle["runtime"]
    small = rels[0] <= 1e-2
    monotone = all(b <= a for a, b in zip(rels, rels[1:]))
    fast = runtime <= 60.0
    announce(1, "reference scenario steering", small and monotone and fast,
             f"relative terminal norm per level {['%.4g' % r for r in rels]} "
             f"(need <= 1e-2, non-increasing), runtime {runtime:.1f}s "
             f"(need <= 60s)")


def test_criterion_2_control_continuity_at_switch(announce, ref_bundle):
    gap = ref_bundle["diags"]["continuity_gap"]
    budget = ref_bundle["diags"]["gap_budget"]
    ok = gap <= 10.0 * budget
    announce(2, "control continuity at phase switch", ok,
             f"|u(tau+) - u(tau-)| = {gap:.3e} vs 10x(tail+quad) = "
             f"{10.0 * budget:.3e}")


def test_criterion_3_seed_coefficient_growth(announce, ref_bundle):
    seed = ref_bundle["fo"].seed
    tau = seed.tau
    ratios = [abs(seed.y[k]) * tau ** k / (2.0 ** k * math.factorial(k))
              for k in range(seed.K + 1)]
    C = max(ratios[:9])          # fitted on k <= 8
    worst = max(ratios[9:])      # verified on 9 <= k <= 15
    ok = worst <= C * (1.0 + 1e-12)
    announce(3, "seed coefficient growth", ok,
             f"C fitted on k<=8: {C:.4f}; max ratio on k=9..15: {worst:.3e} "
             f"(need <= C)")


def test_criterion_4_flat_output_endpoint_jets(announce, ref_bundle):
    fo = ref_bundle["fo"]
    at_start = flat_output_derivatives(fo, fo.tau)
    at_end = flat_output_derivatives(fo, fo.T)
    K = fo.seed.K
    start_exact = (all(at_start[k] == fo.seed.y[k] for k in range(K + 1))
                   and bool(np.all(at_start[K + 1:] == 0.0)))
    end_exact = bool(np.all(at_end == 0.0))
    announce(4, "flat output endpoint jets", start_exact and end_exact,
             f"y^(k)(tau) == y_k bit-exact: {start_exact}; "
             f"y^(k)(T) == 0 bit-exact for k <= {fo.jet_order}: {end_exact}")


def test_criterion_5_simulator_unitarity_and_order(announce):
    cfg = SimConfig(Nx=128, Nt=1024, T=0.5, snapshot_count=9)
    snaps = simulate(sine_profile(), None, cfg)
    norms = np.array([s.l2_norm for s in snaps])
    drift = float(np.max(np.abs(norms - norms[0])) / norms[0])
    errors = []
    for lvl in range(3):
        c = SimConfig(Nx=32 * 2 ** lvl, Nt=128 * 2 ** lvl, T=0.5,
                      snapshot_count=3)
        last = simulate(lambda x: np.sin(np.pi * x) + 0j, None, c)[-1]
        exact = np.exp(-1j * np.pi ** 2 * last.t) * np.sin(np.pi * last.grid)
        errors.append(float(np.max(np.abs(last.values - exact))))
    rate = float(np.mean([np.log2(a / b) for a, b in zip(errors, errors[1:])]))
    ok = drift <= 1e-12 and abs(rate - 2.0) <= 0.2
    announce(5, "simulator unitarity and convergence order", ok,
             f"free-run norm drift {drift:.2e} (need <= 1e-12); "
             f"eigenmode rate {rate:.3f} (need 2.0 +- 0.2)")


def _richardson(f, x, h=1e-3):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def _dense_composite(f, breakpoints, panels_per_piece=512):
    """Fixed-panel 15-point composite rule, conforming to the breakpoints."""
    edges = np.array([0.0, *breakpoints, 1.0])
    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        sub = np.linspace(a, b, panels_per_piece + 1)
        lo, hi = sub[:-1], sub[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        xs = mid[:, None] + half[:, None] * NODES15[None, :]
        fv = np.asarray(f(xs.ravel()), dtype=np.complex128).reshape(xs.shape)
        total += complex(np.sum(half * (fv @ WEIGHTS15)))
    return total


def test_criterion_6_kernel_and_quadrature_oracles(announce, ref_bundle):
    worst_fd = 0.0
    for t in (0.1, 0.35, 1.0):
        for m in range(1, 9):
            f = lambda x: kernel_derivative(t, x, m - 1)
            for x in (0.2, 0.5, 0.8, 1.0):
                exact = kernel_derivative(t, x, m)
                worst_fd = max(worst_fd, abs(_richardson(f, x) - exact) / abs(exact))
    theta0 = ref_bundle["sc"].theta0
    bps = theta0.breakpoints
    integrands = [lambda y, t=t: odd_kernel(t, 1.0, y, 0) * theta0(y)
                  for t in (0.1, 0.35)]
    # low-order seed integrands; higher orders exceed 1e8 in magnitude, where
    # an absolute 1e-8 target is below the resolution of the float type
    integrands += [lambda y, m=2 * k + 1: -2.0 * kernel_derivative(0.35, y, m) * theta0(y)
                   for k in range(4)]
    worst_quad = 0.0
    for f in integrands:
        adaptive, _ = integrate(IntegrationProblem(f, bps))
        dense = _dense_composite(f, bps)
        worst_quad = max(worst_quad, abs(adaptive - dense))
    ok = worst_fd <= 1e-6 and worst_quad <= 1e-8
    announce(6, "kernel and quadrature oracles", ok,
             f"kernel vs Richardson differences, m<=8: rel {worst_fd:.2e} "
             f"(need <= 1e-6); adaptive vs dense composite: abs "
             f"{worst_quad:.2e} (need <= 1e-8)")


def test_criterion_7_interior_field_match(announce, ref_bundle):
    fo = ref_bundle["fo"]
    window = [s for s in ref_bundle["snapshots"] if s.t >= fo.tau + 0.02]
    worst = 0.0
    for snap in window:
        series = state_series(fo, float(snap.t), snap.grid)
        worst = max(worst, float(np.max(np.abs(snap.values - series))))
    ok = worst <= 5e-3 and len(window) >= 3
    announce(7, "interior field match on the flat phase", ok,
             f"max |simulated - series| on [tau+0.02, T] x [0,1]: {worst:.3e} "
             f"(need <= 5e-3, {len(window)} snapshot times)")


def test_criterion_8_beam_steering_and_lift(announce, beam_bundle):
    cfg, data = beam_bundle["cfg"], beam_bundle["data"]
    ctl, result = beam_bundle["ctl"], beam_bundle["result"]
    ratio = beam_terminal_report(result, cfg.dx)["energy_ratio"]

    errors = []
    for lvl in range(3):
        c = SimConfig(Nx=32 * 2 ** lvl, Nt=128 * 2 ** lvl, T=0.25,
                      snapshot_count=3)
        zeros = np.zeros(c.Nt + 1)
        last = beam_simulate(data, zeros, zeros, c).snapshots[-1]
        exact = np.cos(np.pi ** 2 * last.t) * np.sin(np.pi * last.grid)
        errors.append(float(np.max(np.abs(last.eta - exact))))
    rate = float(np.mean([np.log2(a / b) for a, b in zip(errors, errors[1:])]))

    # the real part of the lifted complex field must shadow the displacement
    theta0 = lift_initial_data(data)
    snaps = simulate(theta0, ctl.trace, cfg)
    beam_at = {s.t: s for s in result.snapshots}
    lift_err = 0.0
    for s in snaps:
        if s.t >= 1.4 and s.t in beam_at:
            lift_err = max(lift_err, float(
                np.max(np.abs(s.values.real - beam_at[s.t].eta))))

    ok = ratio <= 1e-2 and abs(rate - 2.0) <= 0.2 and lift_err <= 1e-2
    announce(8, "beam steering, free modes, and lift agreement", ok,
             f"terminal energy ratio {ratio:.3e} (need <= 1e-2); eigenmode "
             f"rate {rate:.3f} (need 2.0 +- 0.2); Re(theta) vs eta max err "
             f"{lift_err:.2e} on [tau, T] (need <= 1e-2)")
