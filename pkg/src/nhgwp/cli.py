"""Command-line front end.

    nhgwp <mode> --scenario FILE --out DIR [--dt X] [--t-final X] [--grid-n N] [--grid-L X]

Modes:

gwd
    thawed Gaussian propagation; writes trajectory.csv (and density.csv when
    the scenario has grid settings).
grid
    grid reference propagation; writes grid_trajectory.csv and density.csv.
compare
    both, plus report.csv with GWD vs grid and GWD vs closed-form deviations.
analytic
    GWD next to the closed-form solution in analytic.csv.

Exit status is 0 on success, 1 for invalid input and 2 for numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracles
from .engine import propagate
from .errors import ExponentOverflow, NumericalError, ValidationError
from .grid import (
    Grid1D,
    crank_nicolson_linear_b,
    density_observables,
    evaluate_wavepacket,
    gwd_heatmap,
    heatmap_normalized,
    log_norm_squared,
    split_step_constant_b,
)
from .scenario import MODES, load_scenario
from .transforms import guiding_ic, to_real_phase_space

DEFAULT_OUT = "nhgwp_out"


@dataclass
class RunReport:
    mode: str
    metrics: dict = field(default_factory=dict)
    steps: int = 0
    wall_time: float = 0.0
    flags: list = field(default_factory=list)
    files: list = field(default_factory=list)


def fmt(value):
    """17 significant digits; exact round trip for doubles."""
    return f"{float(value):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def _has_b(model):
    return bool(np.any(model.vecpot.slope) or np.any(model.vecpot.offset))


def run_gwd(scn):
    """Propagate the scenario's packet; applies guiding initial conditions when requested."""
    state0 = scn.initial_state()
    if scn.guide == "auto" and _has_b(scn.model):
        state0 = guiding_ic(state0, scn.model)
    return propagate(state0, scn.model, scn.t_final, scn.dt, scn.sample_stride)


def trajectory_header(dim):
    header = ["t"]
    for name in ("q", "p"):
        for j in range(1, dim + 1):
            header += [f"Re_{name}_{j}", f"Im_{name}_{j}"]
    header += [f"Q_{j}" for j in range(1, dim + 1)]
    header += [f"P_{j}" for j in range(1, dim + 1)]
    for j in range(1, dim + 1):
        for l in range(j, dim + 1):
            header += [f"Re_alpha_{j}{l}", f"Im_alpha_{j}{l}"]
    header += ["Re_gamma", "Im_gamma", "norm2"]
    header += [f"sigma2_{j}" for j in range(1, dim + 1)]
    return header


def trajectory_rows(traj):
    hbar = traj.model.hbar
    dim = traj.model.dim
    iu = np.triu_indices(dim)
    for s in traj.samples:
        pt = to_real_phase_space(s)
        log_n2 = log_norm_squared(s, hbar)
        norm2 = math.exp(log_n2) if log_n2 < 709.0 else math.inf
        row = [s.t]
        for vec in (s.q, s.p):
            for z in vec:
                row += [z.real, z.imag]
        row += list(pt.Q) + list(pt.P)
        for a in s.alpha[iu]:
            row += [a.real, a.imag]
        row += [s.gamma.real, s.gamma.imag, norm2]
        row += list(s.width_squared(hbar))
        yield row


def _grid(scn):
    g = scn.grid
    return Grid1D(g.n, g.length, g.center)


def run_grid(scn, times):
    """Grid fields at ``times`` (the GWD sample times), started from the same psi(0)."""
    grid = _grid(scn)
    field = evaluate_wavepacket(scn.initial_state(), grid, scn.model.hbar)
    stepper = split_step_constant_b if scn.grid.scheme == "spectral" else crank_nicolson_linear_b
    with np.errstate(over="ignore", invalid="ignore"):
        return _grid_loop(scn, stepper, field, times)


def _grid_loop(scn, stepper, field, times):
    fields = [field]
    steps = 0
    for t_next in times[1:]:
        span = t_next - field.t
        n = max(1, math.ceil(span / scn.dt - 1e-9))
        if n > 1:
            field = stepper(field, scn.model, scn.dt, n - 1)
        field = stepper(field, scn.model, t_next - field.t, 1)
        field = type(field)(field.values, field.grid, t_next)
        if not np.all(np.isfinite(field.values)):
            raise ExponentOverflow(f"grid wavefunction overflowed at t={t_next:.6g}; shrink the box or shorten the run")
        fields.append(field)
        steps += n
    return fields, steps


def grid_rows(fields):
    for f in fields:
        n2, mean, var = density_observables(f)
        yield [f.t, n2, mean, var]


def density_rows(times, x, heat, time_stride, x_stride):
    xs = x[::x_stride]
    for i in range(0, len(times), time_stride):
        row = heat[i, ::x_stride]
        for xv, rv in zip(xs, row):
            yield [times[i], xv, rv]


def identify_oracle(scn):
    """OracleParams when the scenario has a closed form, else None."""
    m = scn.model
    if m.dim != 1 or not m.vecpot.is_constant:
        return None
    a0 = complex(scn.alpha0[0, 0])
    if a0.real != 0 or a0.imag <= 0:
        return None
    powers = {exps[0]: c for exps, c in m.potential.terms if exps[0] > 0}
    if not powers:
        kind = oracles.FreeParticle()
    elif set(powers) == {1}:
        kind = oracles.LinearRamp(powers[1])
    elif set(powers) == {2} and powers[2] > 0:
        kind = oracles.Harmonic(math.sqrt(2.0 * powers[2] / m.masses[0]))
    else:
        return None
    return oracles.OracleParams.from_alpha0(
        a0,
        m=float(m.masses[0]),
        hbar=m.hbar,
        k=float(m.vecpot.offset[0]),
        q0=float(scn.q0[0]),
        p0=float(scn.p0[0]),
        scenario=kind,
    )


def oracle_columns(params, t):
    """Dict of closed-form columns on times ``t``."""
    kind = params.scenario
    if isinstance(kind, oracles.FreeParticle):
        q_guide, alpha, Q, P = oracles.free_particle(params, t)
        return {"q_guide": q_guide, "alpha": alpha, "Q": Q, "P": P}
    if isinstance(kind, oracles.LinearRamp):
        _, q_guide, Q = oracles.linear_ramp(params, t)
        return {"q_guide": q_guide, "alpha": oracles.linear_ramp_alpha(params, t), "Q": Q}
    q_guide, alpha, Q = oracles.harmonic(params, t)
    return {"q_guide": q_guide, "alpha": alpha, "Q": Q}


def _engine_columns(traj, guided):
    pts = [to_real_phase_space(s) for s in traj.samples]
    cols = {
        "Q": np.array([p.Q[0] for p in pts]),
        "P": np.array([p.P[0] for p in pts]),
        "alpha": traj.alpha[:, 0, 0],
    }
    if guided:
        cols["q_guide"] = traj.q[:, 0].real
    return cols


def _oracle_metrics(report, engine, oracle):
    for name in ("Q", "P", "q_guide", "alpha"):
        if name in engine and name in oracle:
            dev = np.abs(engine[name] - oracle[name])
            report.metrics[f"max_abs_d{name}_oracle"] = float(dev.max())
            report.metrics[f"rms_d{name}_oracle"] = float(np.sqrt(np.mean(dev**2)))
            scale = np.maximum(1.0, np.abs(oracle[name]))
            report.metrics[f"max_rel_d{name}_oracle"] = float(np.max(dev / scale))


def run(mode, scn, out_dir):
    """Run ``scn`` in ``mode`` and write outputs into ``out_dir``."""
    if mode not in MODES:
        raise ValidationError(f"must be one of {', '.join(MODES)}", key="mode")
    propagate_grid = scn.grid is not None and scn.grid.scheme != "none"
    if mode == "grid" and not propagate_grid:
        raise ValidationError("mode grid needs grid settings with a propagation scheme", key="grid")
    params = identify_oracle(scn)
    if mode == "analytic" and params is None:
        raise ValidationError("no closed form for this scenario (needs 1D, constant b, V free/linear/harmonic)", key="mode")
    if mode == "compare" and not propagate_grid and params is None:
        raise ValidationError("compare needs a grid scheme or a closed-form scenario", key="grid")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(mode)
    start = time.perf_counter()
    want = set(scn.outputs)
    guided = scn.guide == "auto" and _has_b(scn.model)

    traj = None
    if mode != "grid":
        traj = run_gwd(scn)
        report.steps += traj.steps
        if "trajectory" in want:
            _write_csv(out / "trajectory.csv", trajectory_header(scn.model.dim), trajectory_rows(traj))
            report.files.append("trajectory.csv")
        norms = np.array([log_norm_squared(s, scn.model.hbar) for s in traj.samples])
        report.metrics["samples"] = len(traj)
        report.metrics["gwd_steps"] = traj.steps
        report.metrics["log_norm2_final"] = float(norms[-1])
        report.metrics["norm2_overflow_samples"] = int(np.sum(norms >= 709.0))
        times = traj.times
    else:
        n_steps = max(1, math.ceil((scn.t_final) / scn.dt - 1e-9))
        idx = sorted(set(range(0, n_steps + 1, scn.sample_stride)) | {n_steps})
        times = np.array([min(i * scn.dt, scn.t_final) for i in idx])
        times[-1] = scn.t_final

    if mode in ("grid", "compare") and propagate_grid:
        fields, steps = run_grid(scn, times)
        report.steps += steps
        report.metrics["grid_steps"] = steps
        obs = np.array(list(grid_rows(fields)))
        _write_csv(out / "grid_trajectory.csv", ["t", "norm2", "Q", "variance"], obs)
        report.files.append("grid_trajectory.csv")
        if "density" in want:
            heat = heatmap_normalized(fields)
            g = scn.grid
            rows = density_rows(times, fields[0].grid.x, heat, g.time_stride, g.x_stride)
            _write_csv(out / "density.csv", ["t", "x", "psi2_normalized"], rows)
            report.files.append("density.csv")
        if traj is not None:
            gwd_Q = np.array([to_real_phase_space(s).Q[0] for s in traj.samples])
            dQ = np.abs(gwd_Q - obs[:, 2])
            report.metrics["max_abs_dQ_grid"] = float(dQ.max())
            report.metrics["rms_dQ_grid"] = float(np.sqrt(np.mean(dQ**2)))
            dlog = np.abs(np.log(obs[:, 1]) - np.array([log_norm_squared(s, scn.model.hbar) for s in traj.samples]))
            report.metrics["max_abs_dlog_norm2_grid"] = float(dlog.max())
    elif traj is not None and scn.grid is not None and "density" in want:
        grid = _grid(scn)
        heat = gwd_heatmap(traj, grid, scn.model.hbar)
        rows = density_rows(times, grid.x, heat, scn.grid.time_stride, scn.grid.x_stride)
        _write_csv(out / "density.csv", ["t", "x", "psi2_normalized"], rows)
        report.files.append("density.csv")

    if mode in ("compare", "analytic") and params is not None:
        engine = _engine_columns(traj, guided)
        oracle = oracle_columns(params, times)
        _oracle_metrics(report, engine, oracle)
        if mode == "analytic":
            names = [n for n in ("Q", "P", "q_guide") if n in engine and n in oracle]
            header = ["t"]
            for n in names:
                header += [n, f"oracle_{n}"]
            header += ["Re_alpha", "Im_alpha", "oracle_Re_alpha", "oracle_Im_alpha"]
            cols = [times]
            for n in names:
                cols += [engine[n], oracle[n]]
            cols += [engine["alpha"].real, engine["alpha"].imag, oracle["alpha"].real, oracle["alpha"].imag]
            _write_csv(out / "analytic.csv", header, np.column_stack(cols))
            report.files.append("analytic.csv")

    report.wall_time = time.perf_counter() - start
    if "report" in want:
        rows = [(k, v) for k, v in report.metrics.items()]
        with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric", "value"])
            for k, v in rows:
                writer.writerow([k, v if isinstance(v, int) else fmt(v)])
        report.files.append("report.csv")
    return report


def build_parser():
    parser = argparse.ArgumentParser(prog="nhgwp", description="Non-Hermitian thawed Gaussian wavepacket dynamics.")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--scenario", required=True, help="scenario file (key = value lines)")
    parser.add_argument("--out", default=None, help=f"output directory (default $NHGWP_OUT or {DEFAULT_OUT})")
    parser.add_argument("--dt", type=float, default=None)
    parser.add_argument("--t-final", type=float, default=None)
    parser.add_argument("--grid-n", type=int, default=None)
    parser.add_argument("--grid-L", type=float, default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = args.out or os.environ.get("NHGWP_OUT") or DEFAULT_OUT
    try:
        scn = load_scenario(args.scenario)
        scn = scn.with_overrides(dt=args.dt, t_final=args.t_final, n=args.grid_n, length=args.grid_L, mode=args.mode)
        report = run(args.mode, scn, out)
    except ValidationError as exc:
        print(f"nhgwp: {args.scenario}: invalid input: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"nhgwp: {args.scenario}: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"nhgwp: {args.scenario}: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    print(f"{args.mode}: {report.steps} steps in {report.wall_time:.3f} s; wrote {', '.join(report.files)} to {out}")
    for flag in report.flags:
        print(f"flag: {flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
