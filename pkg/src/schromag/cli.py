"""Command-line front end.

Subcommands: solve, compare, pde, schro, blockenc-verify, complexity.
Outputs are plot-ready CSV/JSON files, never rendered images.  Exit
codes: 0 success, 1 violated numerical contract, 2 bad input.  Flag
values override config-file values, which override preset defaults;
SCHROMAG_THREADS caps the parallelism of method comparisons.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import baselines, blockenc, complexity, io, mag, schrod
from .errors import InputError, NumericsError
from .linalg import LinearSystem, direct_solve
from .presets import SolverConfig, compare_preset, pde_preset


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    matrix: str | None = None
    rhs: str | None = None
    method: str | None = None
    delta: float | None = None
    n_p: int | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    gammaf: float | None = None
    l_hat: float | None = None
    mu_hat: float | None = None
    out: str = "."
    seed: int = 0
    fmt: str = "csv"

    def validate(self):
        sources = sum(x is not None for x in (self.preset, self.matrix))
        if sources != 1:
            raise InputError("exactly one problem source: --preset or --matrix/--rhs")
        if self.matrix is not None and self.rhs is None:
            raise InputError("--matrix requires --rhs")
        if self.delta is not None and not (0.0 < self.delta < 1.0):
            raise InputError("--delta must be in (0, 1)")
        if self.n_p is not None and (self.n_p < 8 or (self.n_p & (self.n_p - 1)) != 0):
            raise InputError("--np must be a power of two >= 8")
        if self.fmt not in ("csv", "json"):
            raise InputError("--format must be csv or json")


def thread_cap() -> int:
    raw = os.environ.get("SCHROMAG_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, os.cpu_count() or 1)


def _load_system(cfg: RunConfig):
    """Problem, solver defaults, and the effective (delta, n_p)."""
    if cfg.preset is not None:
        problem, solver = pde_preset(cfg.preset)
        system = problem.system
    else:
        a = io.read_matrix_coo(cfg.matrix)
        b = io.read_vector(cfg.rhs)
        system, problem, solver = LinearSystem(a, b), None, SolverConfig()
    delta = cfg.delta if cfg.delta is not None else solver.delta
    n_p = cfg.n_p if cfg.n_p is not None else solver.n_p
    return system, problem, solver, delta, n_p


def _params_for(cfg: RunConfig, system: LinearSystem, solver: SolverConfig) -> mag.MagParams:
    if cfg.alpha is not None and cfg.beta is not None:
        # rebuild the bounds that produce the requested (alpha, beta)
        if not (0.0 <= cfg.beta < 1.0) or cfg.alpha <= 0.0:
            raise InputError("need alpha > 0 and 0 <= beta < 1")
        kappa = (1.0 + math.sqrt(cfg.beta)) / (1.0 - math.sqrt(cfg.beta))
        sqrt_mu = 2.0 / (math.sqrt(cfg.alpha) * (kappa + 1.0))
        return mag.derive_params((kappa * sqrt_mu) ** 2, sqrt_mu**2)
    if cfg.l_hat is not None and cfg.mu_hat is not None:
        return mag.derive_params(cfg.l_hat, cfg.mu_hat)
    return mag.params_from_matrix(system.a, safety=solver.bounds_safety)


def _solve_with_method(cfg: RunConfig, system: LinearSystem, solver: SolverConfig,
                       delta: float, n_p: int, keep_states: bool = False):
    """Returns (u, artifacts dict) for one method on one system."""
    method = cfg.method or "mag"
    params = _params_for(cfg, system, solver)
    if method == "mag":
        tsys = mag.build_transformed(system.a, system.b, params)
        mag.spectral_radius_check(tsys)
        delta_run = delta / mag.solution_error_factor(tsys)
        max_steps = 4 * mag.convergence_steps(params.kappa_hat, min(delta_run, delta))
        trace = mag.mag_iterate(
            tsys, np.zeros(2 * tsys.n), delta_run, max_steps,
            keep_states=keep_states,
        )
        artifacts = {"trace": trace.residuals, "steps": trace.steps}
        if keep_states:
            values, kappa2 = mag.relative_trace(tsys, trace)
            artifacts["relative_trace"] = (
                values if values is not None else [math.inf] * len(trace.residuals)
            )
            artifacts["kappa2_w_inf"] = kappa2
        u = mag.solution_from_state(tsys, trace.w_final)
        return u, artifacts
    if method == "gradient":
        flow = baselines.build_gradient_flow(system.a, system.b)
        s = np.linalg.svd(system.a, compute_uv=False)
        t_end = baselines.evolution_time("gradient", (float(s[-1]), float(s[0])), delta)
        traj = baselines.integrate_flow(flow, np.zeros(flow.dim), t_end, 256)
        return traj[-1][1], {"t_end": t_end}
    if method == "damped":
        s = np.linalg.svd(system.a, compute_uv=False)
        gamma = cfg.gamma if cfg.gamma is not None else (
            solver.gamma if solver.gamma is not None else 1.9 * float(s[-1])
        )
        flow = baselines.build_damped(system.a, system.b, gamma)
        t_end = baselines.evolution_time("damped", (float(s[-1]), float(s[0])), delta)
        traj = baselines.integrate_flow(flow, np.zeros(flow.dim), t_end, 256)
        return traj[-1][1][: system.n], {"t_end": t_end, "gamma": gamma}
    if method == "schro":
        u, report = schrod.pipeline(
            system.a, system.b, params, delta, n_p,
            recovery=solver.recovery, gamma_f=cfg.gammaf,
        )
        return u, {"report": report.as_dict()}
    raise InputError(f"unknown method {method!r}")


def cmd_solve(cfg: RunConfig) -> int:
    system, problem, solver, delta, n_p = _load_system(cfg)
    u_method, artifacts = _solve_with_method(cfg, system, solver, delta, n_p,
                                             keep_states=True)
    oracle = direct_solve(system)
    rel = float(np.max(np.abs(u_method - oracle[: u_method.size]))
                / max(np.max(np.abs(oracle[: u_method.size])), 1e-300))
    out = cfg.out
    io.write_vector(os.path.join(out, "solution.vec"), u_method)
    io.write_solution_csv(
        os.path.join(out, "solution.csv"), u_method,
        np.arange(u_method.size, dtype=float),
    )
    if "trace" in artifacts:
        io.write_trace_csv(
            os.path.join(out, "trace.csv"),
            artifacts.pop("trace"),
            artifacts.pop("relative_trace", None),
        )
    if "report" in artifacts:
        io.write_json(os.path.join(out, "pipeline.json"), artifacts["report"])
    io.write_json(
        os.path.join(out, "solve.json"),
        {"method": cfg.method or "mag", "delta": delta,
         "residual_vs_oracle": rel, **artifacts},
    )
    print(f"solve[{cfg.method or 'mag'}] residual vs direct solve: {rel:.3e}")
    return 0


def _compare_branch(kind, a, b, params, gamma, t_end, samples):
    n = a.shape[0]
    if kind == "mag":
        tsys = mag.build_transformed(a, b, params)
        gen, drive = schrod.to_ode(tsys)
        flow = baselines.FlowSystem(generator=gen, drive=drive, kind="mag-ode", meta={})
    else:
        flow = baselines.build_damped(a, b, gamma)
    traj = baselines.integrate_flow(flow, np.zeros(flow.dim), t_end, samples)
    ratio = baselines.auxiliary_ratio_trace(traj, solved_index=0, aux_index=n)
    return traj, ratio


def cmd_compare(cfg: RunConfig) -> int:
    if cfg.preset == "fig2":
        return _compare_fig2(cfg)
    if cfg.preset is not None:
        cp = compare_preset(cfg.preset)
        a, b = cp.a, cp.b
        params = mag.derive_params(cp.l_hat, cp.mu_hat)
        gamma, t_end, samples = cp.gamma, cp.t_end, cp.samples
    else:
        a = io.read_matrix_coo(cfg.matrix)
        b = io.read_vector(cfg.rhs)
        params = mag.params_from_matrix(a)
        s = np.linalg.svd(a, compute_uv=False)
        gamma = cfg.gamma if cfg.gamma is not None else 1.9 * float(s[-1])
        t_end = baselines.evolution_time(
            "damped", (float(s[-1]), float(s[0])), cfg.delta or 1e-3
        )
        samples = 1200

    with ThreadPoolExecutor(max_workers=min(2, thread_cap())) as pool:
        fut_m = pool.submit(_compare_branch, "mag", a, b, params, gamma, t_end, samples)
        fut_d = pool.submit(_compare_branch, "damped", a, b, params, gamma, t_end, samples)
        traj_mag, ratio_mag = fut_m.result()
        traj_damp, ratio_damp = fut_d.result()

    n = a.shape[0]
    for tag, traj, ratio in (
        ("mag", traj_mag, ratio_mag),
        ("damped", traj_damp, ratio_damp),
    ):
        io.write_trajectory_csv(
            os.path.join(cfg.out, f"{tag}_trajectory.csv"),
            [t for t, _ in traj],
            [w[0] for _, w in traj],
            [w[n] for _, w in traj],
            ratio.ratios,
        )
    lines = ["time,mag_ratio,damped_ratio"]
    for k, t in enumerate(ratio_mag.times):
        rm, rd = ratio_mag.ratios[k], ratio_damp.ratios[k]
        cm = "" if math.isnan(rm) else repr(rm)
        cd = "" if math.isnan(rd) else repr(rd)
        lines.append(f"{t!r},{cm},{cd}")
    io.write_text(os.path.join(cfg.out, "ratio.csv"), "\n".join(lines) + "\n")
    io.write_json(
        os.path.join(cfg.out, "compare.json"),
        {
            "mag_sign_changes": ratio_mag.sign_changes,
            "damped_sign_changes": ratio_damp.sign_changes,
            "mag_ratio_band": [ratio_mag.ratio_min, ratio_mag.ratio_max],
            "damped_ratio_band": [ratio_damp.ratio_min, ratio_damp.ratio_max],
        },
    )
    print(
        f"compare: mag ratio sign changes {ratio_mag.sign_changes}, "
        f"damped {ratio_damp.sign_changes}"
    )
    return 0


def _compare_fig2(cfg: RunConfig) -> int:
    cp = compare_preset("fig2")
    oracle = direct_solve(LinearSystem(cp.a, cp.b))
    params = mag.derive_params(cp.l_hat, cp.mu_hat)
    sig = (math.sqrt(cp.mu_hat), math.sqrt(cp.l_hat))
    rows = ["delta,mag_error,damped_error"]
    for delta in cp.deltas:
        tsys = mag.build_transformed(cp.a, cp.b, params)
        delta_run = delta / mag.solution_error_factor(tsys)
        steps = mag.convergence_steps(params.kappa_hat, delta_run)
        trace = mag.mag_iterate(tsys, np.zeros(2 * tsys.n), delta_run,
                                max_steps=4 * steps, keep_states=False)
        u_mag = mag.solution_from_state(tsys, trace.w_final)
        flow = baselines.build_damped(cp.a, cp.b, cp.gamma)
        t_end = baselines.evolution_time("damped", sig, delta)
        traj = baselines.integrate_flow(flow, np.zeros(flow.dim), t_end, 64)
        u_damp = traj[-1][1][: cp.a.shape[0]]
        scale = float(np.linalg.norm(oracle))
        e_mag = float(np.linalg.norm(u_mag - oracle)) / scale
        e_damp = float(np.linalg.norm(u_damp - oracle)) / scale
        rows.append(f"{delta!r},{e_mag!r},{e_damp!r}")
        for tag, u in (("mag", u_mag), ("damped", u_damp)):
            io.write_solution_csv(
                os.path.join(cfg.out, f"fig2_{tag}_delta{delta:.6g}.csv"),
                u, np.arange(u.size, dtype=float),
            )
    io.write_text(os.path.join(cfg.out, "fig2_errors.csv"), "\n".join(rows) + "\n")
    print("compare[fig2]: wrote fig2_errors.csv")
    return 0


def cmd_pde(cfg: RunConfig) -> int:
    if cfg.preset is None:
        raise InputError("pde requires --preset")
    problem, solver = pde_preset(cfg.preset)
    delta = cfg.delta if cfg.delta is not None else solver.delta
    n_p = cfg.n_p if cfg.n_p is not None else solver.n_p
    system = problem.system
    out = cfg.out
    io.write_matrix_coo(os.path.join(out, "problem.coo"), system.a)
    io.write_vector(os.path.join(out, "problem.vec"), system.b)
    io.write_json(
        os.path.join(out, "problem.json"),
        {
            "family": problem.family,
            "n": problem.n,
            "k": problem.k,
            "boundary": repr(problem.boundary),
            "forcing": problem.forcing,
            "h": problem.h,
        },
    )
    u_method, artifacts = _solve_with_method(cfg, system, solver, delta, n_p)
    oracle = direct_solve(system)
    rel = float(np.max(np.abs(u_method - oracle)) / np.max(np.abs(oracle)))
    xs, ys = problem.nodes()
    u_sol = problem.solution_block(u_method)
    io.write_solution_csv(
        os.path.join(out, "solution.csv"), u_sol,
        xs[: u_sol.size], None if ys is None else ys[: u_sol.size],
    )
    payload = {
        "preset": cfg.preset,
        "method": cfg.method or "mag",
        "delta": delta,
        "residual_vs_oracle": rel,
    }
    if "report" in artifacts:
        payload["pipeline"] = artifacts["report"]
    io.write_json(os.path.join(out, "pde.json"), payload)
    print(f"pde[{cfg.preset}/{cfg.method or 'mag'}] residual vs direct solve: {rel:.3e}")
    return 0


def cmd_schro(cfg: RunConfig) -> int:
    system, problem, solver, delta, n_p = _load_system(cfg)
    params = _params_for(cfg, system, solver)
    u, report, state = schrod.pipeline(
        system.a, system.b, params, delta, n_p,
        recovery=solver.recovery, gamma_f=cfg.gammaf, keep_state=True,
    )
    io.write_json(os.path.join(cfg.out, "pipeline.json"), report.as_dict())
    io.write_vector(os.path.join(cfg.out, "solution.vec"), u)
    stride = max(1, state.grid.n_p // 1024)
    idx = np.arange(0, state.grid.n_p, stride)
    io.write_field_snapshot_csv(
        os.path.join(cfg.out, "warped_field.csv"),
        state.grid.points[idx],
        state.field_rows(idx),
    )
    print(f"schro residual vs direct solve: {report.residual_vs_oracle:.3e}")
    return 0


def cmd_blockenc_verify(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    results = []
    all_ok = True

    def record(name, be, reference=None):
        nonlocal all_ok
        try:
            measured = blockenc.verify(be, reference)
            ok = True
        except NumericsError as exc:
            measured = float(getattr(exc, "measured", math.nan))
            ok = False
        results.append(
            {
                "name": name,
                "alpha": be.alpha,
                "m": be.m,
                "eps_claimed": be.eps,
                "eps_measured": measured,
                "pass": ok,
            }
        )
        all_ok &= ok

    record(
        "u_zero_one",
        blockenc.BlockEncoding(
            u=blockenc.U_ZERO_ONE, alpha=1.0, m=1, eps=0.0, n=2,
            reference=np.array([[0, 1], [0, 0]], dtype=np.complex128),
        ),
    )
    for k in range(20):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        alpha = float(np.linalg.norm(a, 2) * (1.0 + rng.uniform(0.0, 1.0)))
        record(f"dilation_{k}", blockenc.dilate(a, alpha))
    for k in range(5):
        n = int(rng.integers(2, 5))
        a1 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a2 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        alpha = float(max(np.linalg.norm(a1, 2), np.linalg.norm(a2, 2)) * 1.5)
        b1, b2 = blockenc.dilate(a1, alpha), blockenc.dilate(a2, alpha)
        record(f"product_{k}", blockenc.compose("product", b1, b2))
        record(f"tensor_{k}", blockenc.compose("tensor", b1, b2))
        record(f"sum_{k}", blockenc.compose("sum", b1, b2, coefficients=[0.5, 0.5]))

    io.write_json(os.path.join(cfg.out, "blockenc.json"), results)
    print(f"blockenc-verify: {sum(r['pass'] for r in results)}/{len(results)} pass")
    return 0 if all_ok else 1


def cmd_complexity(cfg: RunConfig) -> int:
    system, problem, solver, delta, n_p = _load_system(cfg)
    a = system.a
    s_vals = np.linalg.svd(a, compute_uv=False)
    summary = complexity.SystemSummary(
        s=int(np.max(np.count_nonzero(a, axis=1))),
        sigma_min=float(s_vals[-1]),
        sigma_max=float(s_vals[0]),
        a_max_norm=float(np.max(np.abs(a))),
        ata_max_norm=float(np.max(np.abs(a.conj().T @ a))),
        delta=delta,
        n_p=n_p,
        n=a.shape[0],
    )
    rows = complexity.comparison_rows(summary)
    if cfg.fmt == "csv":
        complexity.write_comparison_csv(os.path.join(cfg.out, "complexity.csv"), rows)
    else:
        io.write_json(
            os.path.join(cfg.out, "complexity.json"),
            {"rows": rows, "literature": list(complexity.LITERATURE)},
        )
    print("complexity: " + ", ".join(f"{r['method']}={r['queries']:.4g}" for r in rows))
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "compare": cmd_compare,
    "pde": cmd_pde,
    "schro": cmd_schro,
    "blockenc-verify": cmd_blockenc_verify,
    "complexity": cmd_complexity,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schromag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--preset")
        p.add_argument("--matrix")
        p.add_argument("--rhs")
        p.add_argument("--method", choices=["mag", "gradient", "damped", "schro"])
        p.add_argument("--delta", type=float)
        p.add_argument("--np", dest="n_p", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--gammaf", type=float)
        p.add_argument("--lhat", dest="l_hat", type=float)
        p.add_argument("--muhat", dest="mu_hat", type=float)
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        p.add_argument("--format", dest="fmt", choices=["csv", "json"])
        p.add_argument("--config")
    return parser


def merge_config(args: argparse.Namespace) -> RunConfig:
    """Flags beat config-file values beat dataclass defaults."""
    file_values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise InputError("config file must hold a JSON object")
    cfg = RunConfig(command=args.command)
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        flag = getattr(args, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
        elif f.name in file_values:
            setattr(cfg, f.name, file_values[f.name])
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = merge_config(args)
        if cfg.command in ("solve", "compare", "pde", "schro"):
            cfg.validate()
        elif cfg.command == "complexity" and cfg.preset is None and cfg.matrix is None:
            raise InputError("complexity requires --preset or --matrix/--rhs")
        os.makedirs(cfg.out, exist_ok=True)
        return _COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
