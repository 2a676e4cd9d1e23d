"""Scenario runner: synthesis, simulation, artifacts.

Subcommands:
    run      execute one scenario (builtin name or YAML file), write CSVs
             and a key=value report
    study    rerun a scenario over doubled resolutions, tabulate terminal
             norms and convergence rates
    selftest quick internal consistency checks

All numerical paths use fixed summation orders and no wall-clock state, so
identical configurations reproduce identical CSV bytes.
"""
import argparse
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .flatness import JET_ORDER_MARGIN, FlatOutput, control_series, control_trace
from .quadrature import QuadratureError
from .schrodinger_sim import SimConfig, simulate, terminal_report
from .smoothing import (PHASE_NAMES, ControlTrace, PiecewiseProfile,
                        SmoothingError, boundary_trace, flat_coefficients)
from .beam import (BeamData, beam_controls, beam_simulate,
                   beam_terminal_report)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ScenarioError(ValueError):
    pass


# ---------------------------------------------------------------- datums

def reference_datum():
    """Discontinuous two-indicator datum: Re = 1 on (0.5,1), Im = 1 on (0.2,0.7)."""
    return PiecewiseProfile((0.2, 0.5, 0.7), [[0.0], [1j], [1.0 + 1j], [1.0]])


def pulse_datum():
    """Smooth complex pulse 20 x^3 (1-x)^3 (1 + i(1-2x)).

    Vanishes with two derivatives at both ends, so the odd extension stays
    C^2 and the simulator propagates it without grid-scale dispersion.
    """
    re = np.array([0, 0, 0, 20.0, -60.0, 60.0, -20.0])
    im = np.array([0, 0, 0, 20.0, -100.0, 180.0, -140.0, 40.0])
    c = np.zeros(8, dtype=np.complex128)
    c[:7] += re
    c += 1j * im
    return PiecewiseProfile((), [c])


def sine_profile(degree=14):
    """Single-piece polynomial fit of sin(pi x), good to ~1e-13.

    One piece keeps the profile free of interior derivative kinks, which
    would otherwise seed spurious high-frequency bending content.
    """
    return PiecewiseProfile.from_callable(lambda x: np.sin(np.pi * x) + 0j,
                                          n_pieces=1, degree=degree)


_DATUMS = {
    "reference": reference_datum,
    "pulse": pulse_datum,
    "zero": PiecewiseProfile.zero,
    "sine": sine_profile,
}


# ------------------------------------------------------------- scenarios

@dataclass(eq=False)
class Scenario:
    name: str
    equation: str
    tau: float
    T: float
    s: float
    K: int
    K_u: int
    control: str
    sim: SimConfig
    theta0: PiecewiseProfile = None
    eta0: PiecewiseProfile = None
    eta1: PiecewiseProfile = None
    cutoff_s: float = 1.9

    def __post_init__(self):
        if self.equation not in ("schrodinger", "beam"):
            raise ScenarioError(f"equation: unknown value {self.equation!r}")
        if self.control not in ("synthesized", "none"):
            raise ScenarioError(f"control: unknown value {self.control!r}")
        if self.control == "synthesized":
            if not 0 < self.tau < self.T:
                raise ScenarioError("tau: need 0 < tau < T")
            if not self.tau > 2.0 * self.T / 3.0:
                raise ScenarioError("tau: need tau > 2T/3 for the analytic part")
            if not 1.0 < self.s < 2.0:
                raise ScenarioError("s: need s in (1,2)")
            if self.K < 1 or self.K_u < 1:
                raise ScenarioError("K: truncations must be >= 1")
        if abs(self.sim.T - self.T) > 1e-12:
            raise ScenarioError("sim.T: simulator horizon must equal T")
        if self.equation == "schrodinger" and self.theta0 is None:
            raise ScenarioError("theta0: required for the schrodinger equation")
        if self.equation == "beam" and (self.eta0 is None or self.eta1 is None):
            raise ScenarioError("eta0/eta1: required for the beam equation")


def builtin_scenarios():
    return {
        "reference": Scenario(
            name="reference", equation="schrodinger", tau=0.35, T=0.5, s=1.9,
            K=15, K_u=15, control="synthesized",
            sim=SimConfig(Nx=200, Nt=4000, T=0.5, snapshot_count=11),
            theta0=reference_datum()),
        "gentle": Scenario(
            name="gentle", equation="schrodinger", tau=1.4, T=2.0, s=1.6,
            K=15, K_u=15, control="synthesized",
            sim=SimConfig(Nx=200, Nt=4000, T=2.0, snapshot_count=11),
            theta0=pulse_datum()),
        "zero": Scenario(
            name="zero", equation="schrodinger", tau=0.35, T=0.5, s=1.9,
            K=15, K_u=15, control="synthesized",
            sim=SimConfig(Nx=64, Nt=512, T=0.5, snapshot_count=5),
            theta0=PiecewiseProfile.zero()),
        "eigenmode-check": Scenario(
            name="eigenmode-check", equation="schrodinger", tau=0.35, T=0.5,
            s=1.9, K=15, K_u=15, control="none",
            sim=SimConfig(Nx=128, Nt=1024, T=0.5, snapshot_count=9),
            theta0=sine_profile()),
        "beam": Scenario(
            name="beam", equation="beam", tau=1.4, T=2.0, s=1.6,
            K=15, K_u=15, control="synthesized",
            sim=SimConfig(Nx=128, Nt=2000, T=2.0, snapshot_count=9),
            eta0=sine_profile(), eta1=PiecewiseProfile.zero()),
    }


def _complex_entry(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ScenarioError(f"profile coefficient {v!r} must be a number or [re, im]")


def _profile_from_entry(entry, field):
    if entry is None:
        return None
    if isinstance(entry, str):
        if entry not in _DATUMS:
            raise ScenarioError(f"{field}: unknown builtin profile {entry!r}")
        return _DATUMS[entry]()
    if isinstance(entry, dict) and "pieces" in entry:
        bps = tuple(entry.get("breakpoints", ()))
        pieces = [[_complex_entry(v) for v in piece] for piece in entry["pieces"]]
        try:
            return PiecewiseProfile(bps, pieces)
        except ValueError as exc:
            raise ScenarioError(f"{field}: {exc}") from exc
    raise ScenarioError(f"{field}: expected builtin name or breakpoints/pieces map")


def scenario_from_dict(d, name):
    if not isinstance(d, dict):
        raise ScenarioError("config: top level must be a mapping")
    simd = d.get("sim", {})
    try:
        sim = SimConfig(Nx=int(simd.get("Nx", 200)), Nt=int(simd.get("Nt", 4000)),
                        T=float(d.get("T", 0.5)),
                        snapshot_count=int(simd.get("snapshot_count", 11)))
    except ValueError as exc:
        raise ScenarioError(f"sim: {exc}") from exc
    return Scenario(
        name=name,
        equation=d.get("equation", "schrodinger"),
        tau=float(d.get("tau", 0.35)),
        T=float(d.get("T", 0.5)),
        s=float(d.get("s", 1.9)),
        K=int(d.get("K", 15)),
        K_u=int(d.get("K_u", 15)),
        control=d.get("control", "synthesized"),
        sim=sim,
        theta0=_profile_from_entry(d.get("theta0"), "theta0"),
        eta0=_profile_from_entry(d.get("eta0"), "eta0"),
        eta1=_profile_from_entry(d.get("eta1"), "eta1"),
        cutoff_s=float(d.get("cutoff_s", 1.9)),
    )


def load_scenario(source):
    builtins = builtin_scenarios()
    if source in builtins:
        return builtins[source]
    path = Path(source)
    if not path.exists():
        raise ScenarioError(
            f"scenario: {source!r} is neither a builtin "
            f"({', '.join(sorted(builtins))}) nor a file")
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return scenario_from_dict(data, path.stem)


# ------------------------------------------------------------ pipelines

def synthesize_control(sc: Scenario):
    """Two-phase control trace on the simulation grid, plus diagnostics."""
    times = sc.sim.times()
    t1 = times[(times > 0) & (times <= sc.tau)]
    t2 = times[times > sc.tau]
    trace1 = boundary_trace(sc.theta0, t1, derivative=False)
    seed = flat_coefficients(sc.theta0, sc.tau, sc.K)
    fo = FlatOutput(seed, sc.T, sc.s, jet_order=sc.K_u + JET_ORDER_MARGIN)
    trace2 = control_trace(fo, t2, sc.K_u)
    full = ControlTrace.concat(trace1, trace2)
    u_minus = boundary_trace(sc.theta0, np.array([sc.tau]), derivative=False)
    u_plus, _, tail_tau = control_series(fo, sc.tau, sc.K_u)
    gap = abs(u_plus - complex(u_minus.u[0]))
    diags = {
        "continuity_gap": gap,
        "gap_budget": tail_tau + float(u_minus.err[0]),
        "tail_max": float(np.max(trace2.err)) if trace2.t.size else 0.0,
        "quad_err_max": float(np.max(trace1.err)) if trace1.t.size else 0.0,
        "seed_bound_constant": seed.bound_constant,
    }
    return full, fo, diags


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_report(path, entries):
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in entries.items():
            fh.write(f"{k}={_fmt(v)}\n")


def write_control_csv(path, trace, u1=None, u2=None):
    header = "t,re_u,im_u,phase"
    if u1 is not None:
        header += ",u1,u2"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(trace.t.size):
            row = (f"{_fmt(trace.t[i])},{_fmt(trace.u[i].real)},"
                   f"{_fmt(trace.u[i].imag)},{PHASE_NAMES[int(trace.phase[i])]}")
            if u1 is not None:
                row += f",{_fmt(u1[i])},{_fmt(u2[i])}"
            fh.write(row + "\n")


def write_field_csv(path, snapshots):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,re,im\n")
        for snap in snapshots:
            for x, v in zip(snap.grid, snap.values):
                fh.write(f"{_fmt(snap.t)},{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}\n")


def write_norms_csv(path, snapshots):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,l2\n")
        for snap in snapshots:
            fh.write(f"{_fmt(snap.t)},{_fmt(snap.l2_norm)}\n")


def write_beam_field_csv(path, snapshots):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,eta,eta_t\n")
        for snap in snapshots:
            for x, e, p in zip(snap.grid, snap.eta, snap.eta_t):
                fh.write(f"{_fmt(snap.t)},{_fmt(x)},{_fmt(e)},{_fmt(p)}\n")


def write_energy_csv(path, times, energy):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,energy\n")
        for t, e in zip(times, energy):
            fh.write(f"{_fmt(t)},{_fmt(e)}\n")


def run_schrodinger(sc: Scenario, out: Path):
    t0 = time.perf_counter()
    if sc.control == "none":
        trace, diags = None, {"continuity_gap": 0.0, "gap_budget": 0.0,
                              "tail_max": 0.0, "quad_err_max": 0.0,
                              "seed_bound_constant": 0.0}
    else:
        trace, _, diags = synthesize_control(sc)
    t1 = time.perf_counter()
    snapshots = simulate(sc.theta0, trace, sc.sim)
    t2 = time.perf_counter()
    rep = terminal_report(snapshots)
    entries = {
        "scenario": sc.name,
        "equation": sc.equation,
        "initial_l2_grid": rep["initial_l2"],
        "initial_l2_exact": sc.theta0.l2_norm(),
        "terminal_l2": rep["terminal_l2"],
        "relative_terminal": rep["relative"],
        **diags,
        "runtime_synthesis_s": t1 - t0,
        "runtime_simulation_s": t2 - t1,
    }
    if sc.control == "none":
        norms = np.array([s.l2_norm for s in snapshots])
        entries["norm_drift"] = (float(np.max(np.abs(norms - norms[0])) / norms[0])
                                 if norms[0] > 0 else 0.0)
    if trace is not None:
        write_control_csv(out / "control.csv", trace)
    write_field_csv(out / "field.csv", snapshots)
    write_norms_csv(out / "norms.csv", snapshots)
    write_report(out / "report.txt", entries)
    return entries


def run_beam(sc: Scenario, out: Path):
    data = BeamData(sc.eta0, sc.eta1)
    t0 = time.perf_counter()
    if sc.control == "none":
        nt = sc.sim.Nt + 1
        controls = None
        u1 = np.zeros(nt)
        u2 = np.zeros(nt)
        u2_avg = None
        diags = {"continuity_gap": 0.0, "tail_max": 0.0, "quad_err_max": 0.0}
    else:
        controls = beam_controls(data, sc.tau, sc.T, sc.s, sc.K, sc.K_u,
                                 cfg=sc.sim, cutoff_s=sc.cutoff_s)
        u1, u2, u2_avg = controls.u1, controls.u2, controls.u2_avg
        tr = controls.trace
        p1 = tr.phase == 0
        p2 = ~p1
        diags = {
            "continuity_gap": controls.continuity_gap,
            "tail_max": float(np.max(tr.err[p2])) if np.any(p2) else 0.0,
            "quad_err_max": float(np.max(tr.err[p1])) if np.any(p1) else 0.0,
        }
    t1 = time.perf_counter()
    result = beam_simulate(data, u1, u2, sc.sim, u2_avg=u2_avg)
    t2 = time.perf_counter()
    rep = beam_terminal_report(result, sc.sim.dx)
    entries = {
        "scenario": sc.name,
        "equation": sc.equation,
        **rep,
        **diags,
        "runtime_synthesis_s": t1 - t0,
        "runtime_simulation_s": t2 - t1,
    }
    if controls is not None:
        write_control_csv(out / "control.csv", controls.trace,
                          u1=controls.trace.u.real, u2=controls.trace.du.imag)
    write_beam_field_csv(out / "field.csv", result.snapshots)
    write_energy_csv(out / "energy.csv", result.times, result.energy)
    write_report(out / "report.txt", entries)
    return entries


def run_scenario(sc: Scenario, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if sc.equation == "beam":
        return run_beam(sc, out)
    return run_schrodinger(sc, out)


# ---------------------------------------------------------------- study

def convergence_study(sc: Scenario, levels, out_dir):
    if levels < 3:
        raise ScenarioError("levels: need at least 3 refinement levels")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    exact_errors = []
    base = sc.sim
    trace = None
    if sc.equation == "schrodinger" and sc.control == "synthesized":
        trace, _, _ = synthesize_control(sc)
    for lvl in range(levels):
        cfg = SimConfig(Nx=base.Nx * 2 ** lvl, Nt=base.Nt * 2 ** lvl,
                        T=base.T, snapshot_count=base.snapshot_count)
        if sc.equation == "beam":
            entries = run_beam(replace(sc, sim=cfg), out / f"level{lvl}")
            rel = entries["energy_ratio"]
            tail = entries["tail_max"]
        else:
            snapshots = simulate(sc.theta0, trace, cfg)
            rep = terminal_report(snapshots)
            rel = rep["relative"]
            tail = 0.0
            if sc.control == "none":
                last = snapshots[-1]
                exact = (np.exp(-1j * np.pi ** 2 * last.t)
                         * np.sin(np.pi * last.grid))
                exact_errors.append(float(np.max(np.abs(last.values - exact))))
        rows.append((lvl, cfg.Nx, cfg.Nt, rel, tail))
    with open(out / "study.csv", "w", encoding="utf-8") as fh:
        fh.write("level,Nx,Nt,terminal_relative_norm,series_tail\n")
        for row in rows:
            fh.write(f"{row[0]},{row[1]},{row[2]},{row[3]!r},{row[4]!r}\n")
    entries = {"scenario": sc.name, "levels": levels}
    rels = [r[3] for r in rows]
    for lvl, rel in enumerate(rels):
        entries[f"relative_level{lvl}"] = rel
    if exact_errors:
        rates = [np.log2(a / b) for a, b in zip(exact_errors, exact_errors[1:])]
        entries["eigenmode_rate"] = float(np.mean(rates))
        for lvl, err in enumerate(exact_errors):
            entries[f"eigenmode_error_level{lvl}"] = err
    elif all(r > 0 for r in rels):
        rates = [np.log2(a / b) for a, b in zip(rels, rels[1:])]
        entries["terminal_decay_rate"] = float(np.mean(rates))
    write_report(out / "study_report.txt", entries)
    return rows, entries


# ------------------------------------------------------------- selftest

def selftest():
    checks = []

    sc = builtin_scenarios()["zero"]
    snapshots = simulate(sc.theta0, None, sc.sim)
    checks.append(("zero-datum-stays-zero",
                   terminal_report(snapshots)["terminal_l2"] == 0.0))

    mode = sine_profile()
    cfg = SimConfig(Nx=64, Nt=256, T=0.5, snapshot_count=9)
    snaps = simulate(mode, None, cfg)
    norms = np.array([s.l2_norm for s in snaps])
    drift = float(np.max(np.abs(norms - norms[0])) / norms[0])
    checks.append(("free-run-norm-conservation", drift <= 1e-12))

    errs = []
    for nx, nt in ((16, 64), (32, 128), (64, 256)):
        c = SimConfig(Nx=nx, Nt=nt, T=0.5, snapshot_count=3)
        last = simulate(lambda x: np.sin(np.pi * x) + 0j, None, c)[-1]
        exact = np.exp(-1j * np.pi ** 2 * last.t) * np.sin(np.pi * last.grid)
        errs.append(np.max(np.abs(last.values - exact)))
    rate = float(np.mean([np.log2(a / b) for a, b in zip(errs, errs[1:])]))
    checks.append(("eigenmode-second-order", abs(rate - 2.0) <= 0.2))

    seed_sc = Scenario(
        name="selftest", equation="schrodinger", tau=1.4, T=2.0, s=1.6,
        K=10, K_u=10, control="synthesized",
        sim=SimConfig(Nx=32, Nt=64, T=2.0, snapshot_count=3),
        theta0=pulse_datum())
    _, fo, diags = synthesize_control(seed_sc)
    checks.append(("phase-continuity-at-tau",
                   diags["continuity_gap"] <= 10.0 * max(diags["gap_budget"], 1e-14)))

    ok = True
    for name, passed in checks:
        print(f"selftest: {name} {'PASS' if passed else 'FAIL'}")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_NUMERICAL


# ------------------------------------------------------------------ main

def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="schroflat",
        description="Boundary-control synthesis and verification for the "
                    "1-D Schrodinger equation and the hinged beam")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--scenario", default="reference",
                       help="builtin name or YAML file path")
    p_run.add_argument("--out-dir", default="schroflat-out")

    p_study = sub.add_parser("study", help="convergence study")
    p_study.add_argument("--scenario", default="reference")
    p_study.add_argument("--out-dir", default="schroflat-study")
    p_study.add_argument("--levels", type=int, default=3)

    sub.add_parser("selftest", help="quick internal checks")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            sc = load_scenario(args.scenario)
            entries = run_scenario(sc, args.out_dir)
            for k, v in entries.items():
                print(f"{k}={_fmt(v)}")
            return EXIT_OK
        if args.command == "study":
            sc = load_scenario(args.scenario)
            _, entries = convergence_study(sc, args.levels, args.out_dir)
            for k, v in entries.items():
                print(f"{k}={_fmt(v)}")
            return EXIT_OK
        return selftest()
    except (ScenarioError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, SmoothingError, ValueError, RuntimeError) as exc:
        print(f"numerical error ({exc.__class__.__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
