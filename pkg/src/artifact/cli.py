"""Command-line harness: baselines, solves, tables, figures and simulations.

Every CSV starts with ``#`` comment lines carrying the params hash and the
scheme profile, and contains no timing data, so identical inputs give
byte-identical files. The JSON schema is described in ``docs/config.md``.
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import dataclasses
import hashlib
import json
import math
import multiprocessing
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import reference as ref
from .hjb import (CFLError, FixedPointError, NumericalError, PROFILES, SchemeConfig,
                  SolveResult, ValueSurface, fixed_point, scheme_for)
from .model import (ModelParams, ParameterError, hjb_constants, merton_single_asset,
                    merton_value, merton_weights, participates, solve_K0,
                    _kp_unconstrained)
from .policy import cost_of_illiquidity, observation_response, policy_field
from .sim import SimConfig, simulate

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


class ConfigError(ValueError):
    """Malformed experiment configuration."""


_TOP_KEYS = {"params", "profile", "scheme", "sweep", "figures", "simulation", "tolerances",
             "jobs"}
_SWEEP_KEYS = {"lambda", "gamma", "rho", "zhat_lambda"}
_FIG_KEYS = {"rho", "lambda", "gamma", "B1", "t", "X", "Y0", "curve_lambda", "obs_lambda"}
_SCHEME_KEYS = {f.name for f in dataclasses.fields(SchemeConfig)}
_SIM_KEYS = {f.name for f in dataclasses.fields(SimConfig)} - {"seed"}


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"'{where}' must be an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{where}': {', '.join(unknown)}")


@dataclass
class ExperimentSpec:
    """Validated experiment description."""

    params: ModelParams
    profile: str = "paper"
    scheme: dict[str, Any] = field(default_factory=dict)
    lambdas: list[float] = field(default_factory=lambda: list(ref.LAMBDAS))
    gammas: list[float] = field(default_factory=lambda: [0.0, 1.0])
    rhos: list[float] = field(default_factory=lambda: [0.0, 0.5, -0.5])
    zhat_lambdas: list[float] = field(default_factory=lambda: list(ref.ZHAT_LAMBDAS))
    figures: dict[str, Any] = field(default_factory=dict)
    simulation: dict[str, Any] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=lambda: dict(ref.TOLERANCES))
    seed: int = 20240101
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentSpec":
        _check_keys(data, _TOP_KEYS, "config")
        params = ModelParams.from_dict({**ref.BENCHMARK, **data.get("params", {})})
        profile = data.get("profile", "paper")
        if profile not in PROFILES:
            raise ConfigError(f"profile must be one of {sorted(PROFILES)}")
        scheme = dict(data.get("scheme", {}))
        _check_keys(scheme, _SCHEME_KEYS, "scheme")
        if "derivative_clamp" in scheme:
            scheme["derivative_clamp"] = tuple(scheme["derivative_clamp"])
        sweep = data.get("sweep", {})
        _check_keys(sweep, _SWEEP_KEYS, "sweep")
        figs = data.get("figures", {})
        _check_keys(figs, _FIG_KEYS, "figures")
        sim = data.get("simulation", {})
        _check_keys(sim, _SIM_KEYS, "simulation")
        tol = data.get("tolerances", {})
        _check_keys(tol, set(ref.TOLERANCES), "tolerances")
        spec = cls(params=params, profile=profile, scheme=scheme, figures=dict(figs),
                   simulation=dict(sim), tolerances={**ref.TOLERANCES, **tol},
                   jobs=int(data.get("jobs", 1)))
        for key, attr in (("lambda", "lambdas"), ("gamma", "gammas"), ("rho", "rhos"),
                          ("zhat_lambda", "zhat_lambdas")):
            if key in sweep:
                setattr(spec, attr, [float(v) for v in sweep[key]])
        spec.validate()
        return spec

    def cells(self) -> list[ModelParams]:
        """Every parameter combination any task may solve."""
        out = []
        for rho in self.rhos:
            for g in self.gammas:
                for lam in sorted(set(self.lambdas) | set(self.zhat_lambdas)):
                    out.append(self.params.replace(rho=rho, gamma=g, lam=lam))
        for lam in self.lambdas:
            out.append(self.params.replace(rho=0.0, gamma=0.0, lam=lam, no_liquid=True))
        for rho in self.figures.get("rho", []):
            for lam in self.figures.get("lambda", []):
                for g in self.figures.get("gamma", [0.0]):
                    out.append(self.params.replace(rho=rho, gamma=g, lam=lam))
        return out

    def validate(self) -> None:
        """Validate every swept combination before any solve starts."""
        for p in self.cells():
            self.scheme_config(p)

    def scheme_config(self, params: ModelParams) -> SchemeConfig:
        return scheme_for(params, self.profile, **self.scheme)

    def digest(self) -> str:
        """Hash of everything that determines the numerical outputs."""
        return params_hash(self.params, self.profile, self.scheme, self.lambdas, self.gammas,
                           self.rhos, self.zhat_lambdas, self.figures, self.simulation)

    def sim_config(self) -> SimConfig:
        return SimConfig(**{**self.simulation, "seed": self.seed})


def params_hash(*objs: Any) -> str:
    h = hashlib.sha256()
    for o in objs:
        if dataclasses.is_dataclass(o):
            o = dataclasses.asdict(o)
        h.update(json.dumps(o, sort_keys=True, default=str).encode())
    return h.hexdigest()[:16]


def _header(spec: ExperimentSpec, what: str) -> str:
    return f"{what}\nparams_hash={spec.digest()} profile={spec.profile}"


def _write_csv(path: Path, header: str, columns: Sequence[str], rows: list[Sequence[Any]]) -> None:
    def fmt(v: Any) -> str:
        if isinstance(v, (float, np.floating)):
            return "nan" if not math.isfinite(v) else f"{float(v):.10g}"
        return str(v)

    with open(path, "w", newline="\n") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(fmt(v) for v in r) + "\n")


def _quiet_numba() -> None:
    # an outdated TBB only disables one numba threading backend
    warnings.filterwarnings("ignore", message="The TBB threading layer")


def _solve_cell(args: tuple[ModelParams, SchemeConfig]) -> tuple[SolveResult | None, str]:
    params, cfg = args
    try:
        return fixed_point(cfg, hjb_constants(params)), ""
    except (NumericalError, FixedPointError, CFLError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _solve_many(spec: ExperimentSpec, cells: list[ModelParams]) -> dict[ModelParams, tuple]:
    """Solve distinct cells, possibly in parallel; results keyed in input order."""
    uniq = list(dict.fromkeys(cells))
    work = [(p, spec.scheme_config(p)) for p in uniq]
    if spec.jobs > 1 and len(work) > 1:
        # spawn: forking after numba's OpenMP layer has started is unsafe
        with cf.ProcessPoolExecutor(max_workers=min(spec.jobs, len(work)),
                                    mp_context=multiprocessing.get_context("spawn"),
                                    initializer=_quiet_numba) as ex:
            results = list(ex.map(_solve_cell, work))
    else:
        results = [_solve_cell(w) for w in work]
    return dict(zip(uniq, results))


# --- tasks -----------------------------------------------------------------

def run_baseline(spec: ExperimentSpec, out: Path) -> int:
    """Print and store derived constants and Merton baselines."""
    p = spec.params
    c = hjb_constants(p)
    rows = [(k, getattr(c, k)) for k in ("k_p", "b_Y", "b_J", "sigma_J", "k_LYp", "k_Jp",
                                         "K_lambda", "K1", "K2", "K3", "K4", "Khat1", "Khat3")]
    uL, uI = merton_weights(p, constrained=True)
    rows += [
        ("merton_constrained", merton_value(p, True)),
        ("merton_unconstrained", merton_value(p, False)),
        ("merton_illiquid_only", merton_single_asset(p.b_I, p.sigma_I, p.beta, p.p)),
        ("merton_liquid_only", merton_single_asset(p.b_L, p.sigma_L, p.beta, p.p)),
        ("merton_u_L", uL), ("merton_u_I", uI),
        ("K0_no_source", solve_K0(p, 0.0)),
        ("participates", int(participates(p))),
    ]
    for k, v in rows:
        print(f"{k}={v + 0.0:.10g}" if isinstance(v, float) else f"{k}={v}")
    _write_csv(out / "baseline.csv", _header(spec, "derived constants"), ["name", "value"], rows)
    return EXIT_OK


def run_solve(spec: ExperimentSpec, out: Path) -> int:
    """Solve the base parameter set and persist the surface and policy."""
    cfg = spec.scheme_config(spec.params)
    res = fixed_point(cfg, hjb_constants(spec.params))
    print(res.summary())
    e = cost_of_illiquidity(res.value, spec.params)
    pf = policy_field(res.surface)
    print(f"z_star={pf.z_star:.6g} zhat_star={pf.z_hat_star:.6g} e1={e:.6g}")
    hdr = _header(spec, "normalized value surface")
    res.surface.to_csv(out / "surface.csv", hdr)
    pf.to_csv(out / "policy.csv", _header(spec, "feedback maps per unit wealth"))
    np.savez(out / "surface.npz", t=res.surface.t, u=res.surface.u,
             phi_tilde=res.surface.phi_tilde, Phi0=res.Phi0,
             params=json.dumps(spec.params.to_dict(), sort_keys=True),
             scheme=json.dumps(dataclasses.asdict(cfg), sort_keys=True),
             params_hash=spec.digest())
    _write_csv(out / "solve_summary.csv", hdr,
               ["Phi0", "value", "z_star", "zhat_star", "e1", "iterations", "converged", "T"],
               [(res.Phi0, res.value, pf.z_star, pf.z_hat_star, e, len(res.outer_history),
                 int(res.converged), cfg.T)])
    return EXIT_OK if res.converged else EXIT_NUMERICAL


def load_surface(path: Path) -> tuple[ModelParams, ValueSurface]:
    """Rebuild a persisted surface written by ``solve``."""
    d = np.load(path, allow_pickle=False)
    params = ModelParams.from_dict(json.loads(str(d["params"])))
    sc = json.loads(str(d["scheme"]))
    sc["derivative_clamp"] = tuple(sc["derivative_clamp"])
    cfg = SchemeConfig(**sc)
    surf = ValueSurface(d["t"], d["u"], d["phi_tilde"], float(d["Phi0"]),
                        hjb_constants(params), cfg)
    return params, surf


def run_tables(spec: ExperimentSpec, out: Path) -> int:
    """Value, no-liquid, cost-of-illiquidity and allocation tables."""
    tol = spec.tolerances
    base = spec.params
    cells = [base.replace(rho=r, gamma=g, lam=l) for r in spec.rhos for g in spec.gammas
             for l in spec.lambdas]
    cells += [base.replace(rho=0.0, gamma=g, lam=l) for g in spec.gammas
              for l in spec.zhat_lambdas]
    cells += [base.replace(rho=0.0, gamma=0.0, lam=l, no_liquid=True) for l in spec.lambdas]
    solved = _solve_many(spec, cells)
    failed = 0
    vtol = tol["table_V"] if spec.profile == "paper" else tol["table_V_fast"]

    def cell(p):
        nonlocal failed
        res, err = solved[p]
        if res is None:
            failed += 1
            print(f"FAILED rho={p.rho} gamma={p.gamma} lambda={p.lam}: {err}", file=sys.stderr)
        return res, err

    rows = []
    for g in spec.gammas:
        for l in spec.lambdas:
            p = base.replace(rho=0.0, gamma=g, lam=l)
            res, err = cell(p)
            pub = ref.TABLE_V.get((g, l), math.nan)
            v = res.value if res else math.nan
            rows.append((g, l, v, merton_value(p, False), pub, v - pub,
                         _flag(v, pub, vtol), err or "ok"))
    _write_csv(out / "table_value.csv", _header(spec, "V(1) at rho=0"),
               ["gamma", "lambda", "value", "merton", "published", "diff", "within_tol", "status"],
               rows)

    rows = []
    for l in spec.lambdas:
        p = base.replace(rho=0.0, gamma=0.0, lam=l, no_liquid=True)
        res, err = cell(p)
        pub = ref.TABLE_NO_LIQUID.get(l, math.nan)
        v = res.value if res else math.nan
        rows.append((l, v, merton_value(p, False), pub, v - pub,
                     _flag(v, pub, tol["no_liquid"]), err or "ok"))
    _write_csv(out / "table_no_liquid.csv", _header(spec, "V(1) without a liquid risky asset"),
               ["lambda", "value", "merton", "published", "diff", "within_tol", "status"], rows)

    rows = []
    for r in spec.rhos:
        for g in spec.gammas:
            for l in spec.lambdas:
                p = base.replace(rho=r, gamma=g, lam=l)
                res, err = cell(p)
                e = cost_of_illiquidity(res.value, p) if res else math.nan
                pub = ref.TABLE_E.get((r, g, l), math.nan)
                rows.append((r, g, l, e, pub, e - pub, _flag(e, pub, tol["table_e"]),
                             err or "ok"))
    _write_csv(out / "table_cost.csv", _header(spec, "cost of illiquidity e(1)"),
               ["rho", "gamma", "lambda", "e1", "published", "diff", "within_tol", "status"],
               rows)

    rows = []
    for g in spec.gammas:
        for l in spec.zhat_lambdas:
            p = base.replace(rho=0.0, gamma=g, lam=l)
            res, err = cell(p)
            z = res.z_hat_star if res else math.nan
            pub = ref.TABLE_ZHAT.get((g, l), math.nan)
            rows.append((g, l, z, merton_weights(p, True)[1], pub, z - pub,
                         _flag(z, pub, tol["zhat"] + 1e-9), err or "ok"))
    _write_csv(out / "table_allocation.csv", _header(spec, "optimal illiquid share at rho=0"),
               ["gamma", "lambda", "zhat_star", "merton", "published", "diff", "within_tol",
                "status"], rows)
    print(f"tables written to {out} ({failed} failed cells)")
    return EXIT_NUMERICAL if failed else EXIT_OK


def _flag(v: float, pub: float, tol: float) -> str:
    if not (math.isfinite(v) and math.isfinite(pub)):
        return "n/a"
    return "yes" if abs(v - pub) <= tol else "no"


def _gnuplot(path: Path, csv: str, title: str, xlabel: str, ylabel: str,
             series: list[tuple[int, int, str]]) -> None:
    plots = ", \\\n     ".join(f"'{csv}' using {x}:{y} with lines title '{t}'"
                               for x, y, t in series)
    path.write_text(
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
        "set terminal pngcairo size 800,600\n"
        f"set output '{path.stem}.png'\n"
        f"plot {plots}\n")


def run_figures(spec: ExperimentSpec, out: Path) -> int:
    """CSV data and gnuplot scripts for the value, allocation and policy figures."""
    figs = spec.figures
    rhos = [float(r) for r in figs.get("rho", [-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8])]
    lams = [float(l) for l in figs.get("lambda", [1.0, 5.0, 10.0, 50.0])]
    gam = [float(g) for g in figs.get("gamma", [0.0])]
    curve_lams = [float(l) for l in figs.get("curve_lambda", [1.0, 5.0, 10.0, 50.0])]
    base = spec.params
    cells = [base.replace(rho=r, gamma=g, lam=l) for g in gam for r in rhos for l in lams]
    cells += [base.replace(rho=0.0, gamma=0.0, lam=l) for l in curve_lams]
    obs_gammas = [0.0, 0.5, 1.0]
    obs_lam = float(figs.get("obs_lambda", 5.0))
    cells += [base.replace(rho=0.0, gamma=g, lam=obs_lam) for g in obs_gammas]
    solved = _solve_many(spec, cells)
    hdr = lambda what: _header(spec, what)
    skipped = 0

    for g in gam:
        rows_v, rows_z = [], []
        for r in rhos:
            rv, rz = [r], [r]
            for l in lams:
                res, _ = solved[base.replace(rho=r, gamma=g, lam=l)]
                if res is None:
                    skipped += 1
                rv.append(res.value if res else math.nan)
                rz.append(res.z_hat_star if res else math.nan)
            p = base.replace(rho=r, gamma=g)
            rv.append(merton_value(p, False))
            rz.append(merton_weights(p, True)[1])
            rows_v.append(rv)
            rows_z.append(rz)
        cols = ["rho"] + [f"lambda_{l:g}" for l in lams] + ["merton"]
        tag = f"g{g:g}"
        _write_csv(out / f"value_vs_rho_{tag}.csv", hdr(f"V(1) vs rho, gamma={g:g}"), cols, rows_v)
        _write_csv(out / f"zhat_vs_rho_{tag}.csv", hdr(f"optimal illiquid share vs rho, gamma={g:g}"),
                   cols, rows_z)
        series = [(1, i + 2, c) for i, c in enumerate(cols[1:])]
        _gnuplot(out / f"value_vs_rho_{tag}.gp", f"value_vs_rho_{tag}.csv",
                 f"V(1) vs rho, gamma={g:g}", "rho", "V(1)", series)
        _gnuplot(out / f"zhat_vs_rho_{tag}.gp", f"zhat_vs_rho_{tag}.csv",
                 f"optimal illiquid share, gamma={g:g}", "rho", "zhat*", series)

    rows_c, rows_p = [], []
    w = None
    curves_c, curves_p = [], []
    for l in curve_lams:
        res, _ = solved[base.replace(rho=0.0, gamma=0.0, lam=l)]
        if res is None:
            skipped += 1
            continue
        pf = policy_field(res.surface)
        w = pf.w[::-1]
        curves_c.append(pf.C_hat[0, ::-1])
        curves_p.append(pf.Pi_hat[0, ::-1])
    if w is not None:
        p0 = base.replace(rho=0.0, gamma=0.0)
        uL, uI = merton_weights(p0, False)
        c_m = (base.beta - _kp_unconstrained(p0)) / (1 - base.p)  # Merton consumption rate
        cols = ["zhat"] + [f"lambda_{l:g}" for l in curve_lams] + ["merton"]
        rows_c = [[w[j]] + [c[j] for c in curves_c] + [c_m] for j in range(w.size)]
        rows_p = [[w[j]] + [c[j] for c in curves_p] + [uL] for j in range(w.size)]
        _write_csv(out / "consumption_t0.csv", hdr("C_hat*(0, zhat), rho=0, gamma=0"), cols, rows_c)
        _write_csv(out / "liquid_t0.csv", hdr("Pi_hat*(0, zhat), rho=0, gamma=0"), cols, rows_p)
        series = [(1, i + 2, c) for i, c in enumerate(cols[1:])]
        _gnuplot(out / "consumption_t0.gp", "consumption_t0.csv", "optimal consumption rate",
                 "zhat", "C_hat*", series)
        _gnuplot(out / "liquid_t0.gp", "liquid_t0.csv", "optimal liquid investment",
                 "zhat", "Pi_hat*", series)

    B1 = [float(b) for b in figs.get("B1", list(np.linspace(-2.0, 2.0, 41)))]
    t1 = float(figs.get("t", 1.0))
    X1 = float(figs.get("X", 0.5))
    Y0 = float(figs.get("Y0", 0.5))
    pfs = {}
    for g in obs_gammas:
        res, _ = solved[base.replace(rho=0.0, gamma=g, lam=obs_lam)]
        if res is None:
            skipped += 1
            continue
        pfs[g] = (res.surface.consts.params, policy_field(res.surface))
    if pfs:
        rows_c, rows_p = [], []
        for b in B1:
            rc, rp = [b], [b]
            for g in obs_gammas:
                if g not in pfs:
                    rc.append(math.nan)
                    rp.append(math.nan)
                    continue
                prm, pf = pfs[g]
                c, pi = observation_response(b, t1, prm, pf, Y0, X1)
                rc.append(c)
                rp.append(pi)
            rows_c.append(rc)
            rows_p.append(rp)
        cols = ["B1"] + [f"gamma_{g:g}" for g in obs_gammas]
        what = f"lambda={obs_lam:g}, t={t1:g}, X={X1:g}, Y0={Y0:g}"
        _write_csv(out / "observation_consumption.csv", hdr(f"consumption vs B1, {what}"),
                   cols, rows_c)
        _write_csv(out / "observation_liquid.csv", hdr(f"liquid investment vs B1, {what}"),
                   cols, rows_p)
        series = [(1, i + 2, c) for i, c in enumerate(cols[1:])]
        _gnuplot(out / "observation_consumption.gp", "observation_consumption.csv",
                 "consumption vs observed noise", "B1", "consumption", series)
        _gnuplot(out / "observation_liquid.gp", "observation_liquid.csv",
                 "liquid investment vs observed noise", "B1", "investment", series)
    if skipped:
        print(f"{skipped} figure cells skipped (solve failed)", file=sys.stderr)
    print(f"figures written to {out}")
    return EXIT_NUMERICAL if skipped else EXIT_OK


def run_simulate(spec: ExperimentSpec, out: Path) -> int:
    """Simulate the closed loop on the persisted surface (solving it if absent)."""
    npz = out / "surface.npz"
    if npz.exists():
        params, surf = load_surface(npz)
        if params != spec.params:
            raise ConfigError(f"{npz} was solved for different parameters; run 'solve' again")
    else:
        run_solve(spec, out)
        params, surf = load_surface(npz)
    cfg = spec.sim_config()
    res = simulate(params, None, surf, cfg)
    print(res.summary())
    print(f"Phi0={surf.Phi0:.8g} seed={cfg.seed}")
    hdr = _header(spec, f"simulation seed={cfg.seed}")
    res.samples_to_csv(out / "sim_paths.csv", hdr)
    _write_csv(out / "sim_summary.csv", hdr,
               ["paths", "mean_utility", "stderr", "mean_with_tail", "stderr_with_tail",
                "Phi0", "trades", "absorbed_paths", "ratio_violations"],
               [(res.utility.size, res.mean_utility, res.stderr, res.mean_total,
                 res.stderr_total, surf.Phi0, int(res.n_trades.sum()),
                 int(res.absorbed.sum()), res.ratio_violations)])
    return EXIT_OK


TASKS: dict[str, Callable[[ExperimentSpec, Path], int]] = {
    "baseline": run_baseline,
    "solve": run_solve,
    "tables": run_tables,
    "figures": run_figures,
    "simulate": run_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artifact",
        description="Optimal consumption and investment with an illiquid asset.")
    parser.add_argument("command", choices=sorted(TASKS), help="task to run")
    parser.add_argument("--config", type=Path, default=None, help="JSON experiment config")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--profile", choices=sorted(PROFILES), default=None,
                        help="scheme profile (overrides the config)")
    parser.add_argument("--seed", type=int, default=None, help="simulation seed")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _quiet_numba()
    args = build_parser().parse_args(argv)
    try:
        data: dict[str, Any] = {}
        if args.config is not None:
            with open(args.config) as fh:
                data = json.load(fh)
        if args.profile is not None:
            data["profile"] = args.profile
        if args.jobs is not None:
            data["jobs"] = args.jobs
        spec = ExperimentSpec.from_dict(data)
        if args.seed is not None:
            spec.seed = args.seed
        spec.sim_config()
        args.out.mkdir(parents=True, exist_ok=True)
    except (OSError, json.JSONDecodeError, ConfigError, ParameterError, CFLError,
            ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return TASKS[args.command](spec, args.out)
    except (ConfigError, ParameterError, CFLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FixedPointError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
