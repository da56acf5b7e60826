"""Command-line runner: ``superint <command> [--config PATH] [--seed N] [--out DIR] [--tol X]``.

Every run writes ``report.json`` (byte-stable for a given config), a
``manifest.json`` (config echo, versions, wall time) and command-specific
CSV/JSON files into ``--out``. On a failed check it also writes
``failure.json`` naming the violated quantity and the worst point.

Exit status: 0 all checks passed, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__
from .coalgebra import realize, verify_coalgebra_relations
from .config import COMMANDS, ConfigError, RunConfig, load_config
from .curvature import curvature_check
from .dynamics import IntegrationError, detect_closure, find_bounded_state, integrate, radial_period
from .invariants import ccm_invariant, commutation_scan, runge_lenz
from .phasespace import PhasePoint, SingularEvaluation
from .quantum import GridResolutionError, RadialProblem, eigensolve, reabsorbed_coupling, ttw_quantum_build
from .systems import SpecError, SystemSpec, build
from .transforms import angular_rescale_identity, ccm_identity, levi_civita_identity

__all__ = ["main", "run", "Check", "build_parser"]

USAGE_ERROR = 2
CHECK_FAILED = 1


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool | None = None
    worst_point: Any = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(math.isfinite(self.value) and self.value < self.tol)

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed,
                "worst_point": self.worst_point}


@dataclass
class Outcome:
    report: dict
    checks: list[Check]
    artifacts: dict[str, str]


def _point(pt) -> list[float] | None:
    if pt is None:
        return None
    arr = pt.as_array() if isinstance(pt, PhasePoint) else np.asarray(pt, dtype=float)
    return [float(v) for v in arr]


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


# --- shared pieces ------------------------------------------------------------------
def _trajectory_defaults(cfg: RunConfig) -> tuple[float, float]:
    o = cfg.options
    ttw = cfg.system.family == "TTWCurved"
    L = o.get("L") if o.get("L") is not None else (1.5 if ttw else 1.0)
    angle = o.get("angle") if o.get("angle") is not None else (math.pi / 5 if ttw else 0.0)
    return float(L), float(angle)


def _initial_state(cfg: RunConfig, system) -> PhasePoint:
    o = cfg.options
    init = o.get("init")
    if init is not None:
        try:
            return PhasePoint(init["x"], init["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"init must be {{'x': [...], 'p': [...]}}: {exc}") from exc
    L, angle = _trajectory_defaults(cfg)
    pt = find_bounded_state(system, L=L, eccentricity=float(o.get("eccentricity", 0.2)), angle=angle)
    if pt is None:
        raise ConfigError("no bounded initial state found for this system; pass options.init")
    return pt


def _integrate(cfg: RunConfig, system, init, t_final, invariants=None):
    try:
        return integrate(system, init, t_final, tol=float(cfg.options["rtol"]), invariants=invariants)
    except (ValueError, SingularEvaluation) as exc:
        raise ConfigError(str(exc)) from exc


def _drift_checks(traj, tol: float, energy_tol: float | None = None) -> list[Check]:
    checks = []
    for name, val in traj.drifts().items():
        lim = energy_tol if (name == "H" and energy_tol is not None) else tol
        checks.append(Check(f"drift:{name}", val, lim))
    if traj.event is not None:
        checks.append(Check("trajectory:singular_approach", math.inf, 0.0, False, _point(traj.states[-1])))
    return checks


# --- commands -----------------------------------------------------------------------
def cmd_verify_algebra(cfg: RunConfig) -> Outcome:
    o = cfg.options
    try:
        real = realize(int(o["dim"]), o["kind"], o["b"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    rep = verify_coalgebra_relations(real, int(o["num_points"]), cfg.rng_seed)
    checks = [Check(name, val, cfg.tol, worst_point=rep.worst_points.get(name))
              for name, val in sorted(rep.relations.items())]
    return Outcome(rep.to_json(), checks, {})


def cmd_verify_invariants(cfg: RunConfig) -> Outcome:
    o = cfg.options
    system = build(cfg.system)
    inv = runge_lenz(system, int(o["axis"]))
    observables = inv.registered()
    if inv.S is not None:
        observables["Re_S_quadratic"] = inv.S.real
        observables["Im_S_quadratic"] = inv.S.imag
    checks, brackets = [], {}
    for name, obs in observables.items():
        if name == "H":
            continue
        val, pt = commutation_scan(system, obs, int(o["num_points"]), cfg.rng_seed, relative=bool(o["relative"]))
        brackets[name] = val
        checks.append(Check(f"bracket:{name}", val, cfg.tol, worst_point=_point(pt)))
    init = _initial_state(cfg, system)
    traj = _integrate(cfg, system, init, float(o["t_final"]), inv.registered())
    drift = traj.drifts()
    checks += _drift_checks(traj, float(o["drift_tol"]))
    report = {
        "system": cfg.system.to_json(),
        "exponents": list(inv.exponents),
        "brackets": brackets,
        "relative_brackets": bool(o["relative"]),
        "drift": drift,
        "init": _point(init),
        "radial_period": radial_period(traj),
    }
    return Outcome(report, checks, {})


def cmd_simulate(cfg: RunConfig, out: Path) -> Outcome:
    o = cfg.options
    system = build(cfg.system)
    inv = runge_lenz(system)
    init = _initial_state(cfg, system)
    traj = _integrate(cfg, system, init, float(o["t_final"]), inv.registered())
    traj.to_csv(out / "trajectory.csv")
    drift = {"drift": traj.drifts(), "energy_drift": traj.energy_drift(), "steps": traj.stats.get("steps"),
             "event": traj.event, "radial_period": radial_period(traj)}
    report = {"system": cfg.system.to_json(), "init": _point(init), **drift}
    return Outcome(report, _drift_checks(traj, cfg.tol, float(o["energy_tol"])), {"drift.json": _dump(drift)})


def cmd_closure(cfg: RunConfig) -> Outcome:
    o = cfg.options
    system = build(cfg.system)
    init = _initial_state(cfg, system)
    probe = _integrate(cfg, system, init, 60.0)
    T_r = radial_period(probe)
    if T_r is None:
        return Outcome({"system": cfg.system.to_json(), "bounded": False}, [
            Check("closure:bounded", math.inf, cfg.tol, False, _point(init))], {})
    periods = int(o["periods"])
    traj = _integrate(cfg, system, init, (periods + 0.5) * T_r)
    res = detect_closure(traj, cfg.tol)
    expect = bool(o["expect_closed"])
    value = res.miss_distance if expect else (0.0 if not res.closed else math.inf)
    check = Check("closure:closed" if expect else "closure:not_closed", value, cfg.tol,
                  res.closed == expect, _point(init))
    report = {"system": cfg.system.to_json(), "init": _point(init), "periods_integrated": periods,
              "expect_closed": expect, **res.to_json()}
    return Outcome(report, [check], {})


def cmd_curvature(cfg: RunConfig) -> Outcome:
    o = cfg.options
    rep = curvature_check(cfg.system, o["radii"], float(o["h_rel"]))
    checks = []
    if rep.rows:
        worst = max(rep.rows, key=lambda row: max(row["err_3d"], row["err_2d"]))
        checks.append(Check("curvature:scalar", rep.max_error, cfg.tol, worst_point={"r": worst["r"]}))
    else:
        checks.append(Check("curvature:scalar", math.inf, cfg.tol, False))
    keys = ["r", "R_3d_numeric", "R_3d_closed", "err_3d", "R_2d_numeric", "R_2d_closed", "err_2d"]
    lines = [",".join(keys)] + [",".join(format(row[k], ".17g") for k in keys) for row in rep.rows]
    return Outcome(rep.to_json(), checks, {"curvature.csv": "\n".join(lines) + "\n"})


def cmd_spectrum(cfg: RunConfig) -> Outcome:
    o = cfg.options
    spec = cfg.system
    if spec.delta != 0:
        raise ConfigError("spectrum needs delta = 0 (the constant only shifts every level)")
    ls = o["l"] if isinstance(o["l"], list) else [o["l"]]
    tables, checks, csv_parts = [], [], []
    for l in ls:
        try:
            prob = RadialProblem(spec.k, spec.mu, spec.beta, float(o["hbar"]), spec.dim, Fraction(l))
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        try:
            table = eigensolve(prob, int(o["count"]), float(o["h"]))
        except GridResolutionError as exc:
            checks.append(Check(f"spectrum:l={l}:resolution", math.inf, cfg.tol, False, {"l": l, "error": str(exc)}))
            continue
        worst = max(table.rows, key=lambda row: row.residual) if table.rows else None
        checks.append(Check(f"spectrum:l={l}", table.max_residual, cfg.tol,
                            worst_point={"n": worst.n, "l": l} if worst else None))
        tables.append(table.to_json())
        csv = table.to_csv()
        csv_parts.append(csv if not csv_parts else csv.split("\n", 1)[1])
    report = {"system": spec.to_json(), "hbar": float(o["hbar"]), "tables": tables}
    return Outcome(report, checks, {"spectrum.csv": "".join(csv_parts), "spectrum.json": _dump(tables)})


def cmd_ccm_check(cfg: RunConfig) -> Outcome:
    o = cfg.options
    lam, delta, E, n = float(o["lam"]), float(o["delta"]), float(o["E"]), int(o["num_points"])
    seed = cfg.rng_seed
    reports = [
        levi_civita_identity(-4.0 * lam * lam, delta, 1.0, n, seed),
        ccm_identity(lam, delta, E, n, seed),
        angular_rescale_identity(o["beta"], float(o["k"]), 1.0, n, seed),
    ]
    checks = [Check(f"identity:{r.name}", r.max_rel, cfg.tol, worst_point=r.worst_point) for r in reports]
    Ht, St = ccm_invariant(lam, delta, E)
    spec = SystemSpec("DarbouxCCM", 2, lam=lam, delta=delta, E=E)
    system = build(spec)
    brackets = {}
    for name, obs in (("Re_S", St.real), ("Im_S", St.imag)):
        val, pt = commutation_scan(system, obs, n, seed, radius=(0.5, 1.5), relative=bool(o["relative"]))
        brackets[name] = val
        checks.append(Check(f"bracket:{name}", val, cfg.tol, worst_point=_point(pt)))
    report = {"system": spec.to_json(), "identities": [r.to_json() for r in reports], "brackets": brackets}
    return Outcome(report, checks, {})


def _bumps(t: np.ndarray, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c, s = rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.0)
        out.append(np.exp(-0.5 * ((t - c) / s) ** 2))
    return out


def cmd_ttw_check(cfg: RunConfig) -> Outcome:
    o = cfg.options
    spec = cfg.system
    system = build(spec)
    inv = runge_lenz(system)
    init = _initial_state(cfg, system)
    traj = _integrate(cfg, system, init, float(o["t_final"]), inv.registered())
    checks = _drift_checks(traj, cfg.tol)
    qtol = float(o["quantum_tol"])
    beta = float(spec.beta)
    k = max(spec.k, 0.0)
    periodic = ttw_quantum_build(k, spec.mu, beta, 0.0, 0.0, n_theta=int(o["n_theta"]), h=float(o["h"]))
    reduction = {}
    for l in o["l"]:
        worst = max(periodic.reduction_residual(int(l), rho) for rho in _bumps(periodic.grid.t, 3, cfg.rng_seed))
        reduction[str(l)] = worst
        checks.append(Check(f"quantum:reduction:l={l}", worst, qtol, worst_point={"l": int(l)}))
    wedge = ttw_quantum_build(k, spec.mu, beta, spec.b1, spec.b2, n_theta=int(o["n_theta"]), h=float(o["h"]))
    herm = wedge.hermiticity_defect()
    checks.append(Check("quantum:hermiticity", herm, qtol))
    report = {
        "system": spec.to_json(),
        "init": _point(init),
        "drift": traj.drifts(),
        "radial_period": radial_period(traj),
        "quantum": {"k": k, "reduction_residual": reduction, "hermiticity_defect": herm,
                    "reabsorbed_coupling_half": reabsorbed_coupling(0.5, beta)},
    }
    return Outcome(report, checks, {})


_HANDLERS: dict[str, Callable] = {
    "verify-algebra": cmd_verify_algebra,
    "verify-invariants": cmd_verify_invariants,
    "simulate": cmd_simulate,
    "closure": cmd_closure,
    "curvature": cmd_curvature,
    "spectrum": cmd_spectrum,
    "ccm-check": cmd_ccm_check,
    "ttw-check": cmd_ttw_check,
}


# --- driver -------------------------------------------------------------------------
def _versions() -> dict:
    return {"superint": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__}


def run(cfg: RunConfig) -> int:
    """Execute one configured run, write its files and return the exit status."""
    start = time.perf_counter()
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    handler = _HANDLERS[cfg.command]
    try:
        outcome = handler(cfg, out) if cfg.command == "simulate" else handler(cfg)
    except (ConfigError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except IntegrationError as exc:
        outcome = Outcome({"error": str(exc)}, [Check("integration", math.inf, 0.0, False, _point(exc.state))], {})
    passed = all(c.passed for c in outcome.checks)
    report = {"command": cfg.command, "seed": cfg.seed, "tol": cfg.tol, "passed": passed,
              "checks": [c.to_json() for c in outcome.checks], "result": outcome.report}
    for name, text in outcome.artifacts.items():
        (out / name).write_text(text, encoding="utf-8")
    (out / "report.json").write_text(_dump(report), encoding="utf-8")
    failure_path = out / "failure.json"
    if not passed:
        failed = [c for c in outcome.checks if not c.passed]
        worst = failed[0]
        failure_path.write_text(_dump({
            "command": cfg.command,
            "violated": worst.name,
            "value": worst.value,
            "tol": worst.tol,
            "worst_point": worst.worst_point,
            "failed_checks": [c.to_json() for c in failed],
        }), encoding="utf-8")
    elif failure_path.exists():
        failure_path.unlink()
    manifest = {"config": cfg.to_json(), "versions": _versions(), "wall_time_s": time.perf_counter() - start,
                "files": sorted(["report.json", "manifest.json", *outcome.artifacts]
                                + ([] if passed else ["failure.json"]))}
    (out / "manifest.json").write_text(_dump(manifest), encoding="utf-8")
    status = "PASS" if passed else "FAIL"
    print(f"{cfg.command}: {status} ({sum(c.passed for c in outcome.checks)}/{len(outcome.checks)} checks) -> {out}")
    return 0 if passed else CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superint", description="Superintegrable-system verification runner.")
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="what to run (or take it from --config)")
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration")
    parser.add_argument("--system", metavar="JSON", help="system spec as inline JSON (overrides the config)")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--tol", type=float, help="check tolerance")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=JSON",
                        help="override one option, e.g. --set count=3")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict[str, Any] = {}
    if args.config:
        data = load_config(args.config).to_json()
        if args.command and args.command != data["command"]:
            raise ConfigError(f"command {args.command!r} conflicts with config command {data['command']!r}")
    elif not args.command:
        raise ConfigError("give a command or --config")
    else:
        data["command"] = args.command
    if args.system:
        try:
            data["system"] = json.loads(args.system)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--system is not valid JSON: {exc}") from exc
    for name in ("seed", "out", "tol"):
        val = getattr(args, name)
        if val is not None:
            data[name] = val
    opts = dict(data.get("options") or {})
    for item in args.overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=JSON, got {item!r}")
        try:
            opts[key] = json.loads(raw)
        except json.JSONDecodeError:
            opts[key] = raw
    data["options"] = opts
    return RunConfig.from_json(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
