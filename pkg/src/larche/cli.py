"""Command line entry point: ``larche <subcommand> [config.json] [options]``.

Every subcommand writes its artifacts and a ``manifest.json`` (config echo,
package versions, thread count, wall time) into the output directory.
Exit status: 0 on success, 2 for unreadable or schema-invalid configs,
1 when a module rejects its inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np
import scipy.fft
from threadpoolctl import threadpool_limits

from . import __version__
from .approx import ApproxError
from .elasticity import ElasticityError
from .geometry import Circle, GeometryError, extract_zero_contour, sdf
from .grid import Grid2D
from .phasefield import (CahnLarche, ElasticSpec, PFConfig, PFState, PhaseFieldError, dump_state,
                         init_glued, read_grid)
from .potential import DoubleWell, validate
from .profile import ProfileError, Profiles, check_orthogonality
from .sharpref import gibbs_thomson_residual, stefan_residual
from .spectral import SpectralError, SpectralProblem, min_rayleigh
from .studies import convergence_run, fitted, residual_norms, sweep_grid


class SchemaError(Exception):
    """Config missing, unreadable or not matching the schema (exit 2)."""


MODULE_ERRORS = (ValueError, RuntimeError, ApproxError, ElasticityError, GeometryError,
                 PhaseFieldError, ProfileError, SpectralError, KeyError)

# -- schema --------------------------------------------------------------------

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_point = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

_POTENTIAL = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["quartic", "custom-polynomial"]},
        "coefficients": {"type": "array", "items": _num, "minItems": 3},
        "C0": {"type": "number", "minimum": 0},
        "range_hint": _point,
    },
    "additionalProperties": False,
}
_ELASTICITY = {
    "type": "object",
    "properties": {"lambda": _num, "mu": _pos, "estar": _num, "enabled": {"type": "boolean"}},
    "additionalProperties": False,
}
_SHAPE = {
    "type": "object",
    "properties": {"kind": {"enum": ["circle", "ellipse"]}, "center": _point, "R": _pos, "a": _pos, "b": _pos},
    "required": ["kind"],
    "additionalProperties": False,
}
_GRID = {
    "type": "object",
    "properties": {"n": {"type": "integer", "minimum": 3}, "L": _pos,
                   "nx": {"type": "integer", "minimum": 3}, "ny": {"type": "integer", "minimum": 3},
                   "Lx": _pos, "Ly": _pos},
    "additionalProperties": False,
}
_PATH = {
    "type": "object",
    "properties": {"L": _pos, "ratio": _pos, "eps_ref": _pos, "exponent": {"type": "number", "minimum": 0}},
    "additionalProperties": False,
}
_EPSILONS = {"type": "array", "items": _pos, "minItems": 1}

SCHEMA = {
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "thread_count": {"type": "integer", "minimum": 1},
        "potential": _POTENTIAL,
        "profile": {
            "type": "object",
            "properties": {"Z": _pos, "h": _pos},
            "additionalProperties": False,
        },
        "simulate": {
            "type": "object",
            "properties": {
                "grid": _GRID,
                "epsilon": _pos,
                "tau": _pos,
                "tau_factor": _pos,
                "s": {"type": "number", "minimum": 0},
                "cg_tol": _pos,
                "end_time": {"type": "number", "minimum": 0},
                "elasticity": _ELASTICITY,
                "init": {
                    "type": "object",
                    "properties": {
                        "kind": {"enum": ["glued", "random"]},
                        "shape": _SHAPE,
                        "delta": _pos,
                        "order": {"enum": [0, 1]},
                        "mean": _num,
                        "amplitude": {"type": "number", "minimum": 0},
                    },
                    "required": ["kind"],
                    "additionalProperties": False,
                },
                "record_every": {"type": "integer", "minimum": 1},
                "snapshot_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "polylines": {"type": "boolean"},
            },
            "required": ["grid", "epsilon", "end_time", "init"],
            "additionalProperties": False,
        },
        "residual": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["gibbs-thomson", "stefan"]},
                "run_dir": {"type": "string"},
                "frame": {"type": "integer"},
                "frame1": {"type": "integer"},
                "epsilon": _pos,
                "offset": _pos,
                "elasticity": _ELASTICITY,
            },
            "required": ["kind", "run_dir"],
            "additionalProperties": False,
        },
        "spectral": {
            "type": "object",
            "properties": {
                "epsilons": _EPSILONS,
                "grid": _GRID,
                "path": _PATH,
                "gamma1": {"type": "number", "minimum": 0},
                "method": {"enum": ["dense", "lobpcg"]},
                "max_ratio": _pos,
                "phi": {
                    "type": "object",
                    "properties": {"kind": {"enum": ["flat", "radial", "control"]},
                                   "x0": _num, "center": _point, "R": _pos, "amplitude": _pos},
                    "required": ["kind"],
                    "additionalProperties": False,
                },
            },
            "required": ["epsilons"],
            "additionalProperties": False,
        },
        "compare": {
            "type": "object",
            "properties": {
                "run_a": {"type": "string"},
                "run_b": {"type": "string"},
                "fields": {"type": "array", "items": {"enum": ["c", "mu", "u1", "u2"]}, "minItems": 1},
            },
            "required": ["run_a", "run_b"],
            "additionalProperties": False,
        },
        "rates": {
            "type": "object",
            "properties": {
                "epsilons": _EPSILONS,
                "shape": _SHAPE,
                "path": _PATH,
                "delta": _pos,
                "fd_order": {"enum": [2, 4]},
                "elasticity": _ELASTICITY,
                "end_time": {"type": "number", "minimum": 0},
                "tau_factor": _pos,
                "simulate": {"type": "boolean"},
            },
            "required": ["epsilons"],
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"config file not found: {p}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {p}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(k) for k in exc.absolute_path) or "<root>"
        raise SchemaError(f"config schema violation at {where}: {exc.message}") from exc


def _section(cfg: dict, name: str) -> dict:
    if name not in cfg:
        raise SchemaError(f"config has no '{name}' section")
    return cfg[name]


# -- helpers -------------------------------------------------------------------


def thread_count(cfg: dict) -> int:
    env = os.environ.get("LARCHE_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise SchemaError(f"LARCHE_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise SchemaError(f"LARCHE_THREADS must be a positive integer, got {env!r}")
        return n
    return int(cfg.get("thread_count", 1))


def make_grid(g: dict) -> Grid2D:
    if "n" in g:
        return Grid2D.square(int(g["n"]), float(g.get("L", 1.0)))
    try:
        return Grid2D(int(g["nx"]), int(g["ny"]), float(g.get("Lx", 1.0)), float(g.get("Ly", 1.0)))
    except KeyError:
        raise SchemaError("grid needs either n or nx and ny") from None


def make_path(d: dict | None, default_L: float = 2.0) -> dict:
    d = dict(d or {})
    return {"L": float(d.get("L", default_L)), "ratio": float(d.get("ratio", 4.0)),
            "eps_ref": float(d.get("eps_ref", 0.08)), "exponent": float(d.get("exponent", 0.5))}


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _versions() -> dict:
    out = {"larche": __version__, "python": platform.python_version()}
    for pkg in ("numpy", "scipy", "scikit-image", "jsonschema", "threadpoolctl"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def write_manifest(out: Path, command: str, cfg: dict, threads: int, wall: float, extra=None) -> Path:
    man = {"command": command, "config": cfg, "versions": _versions(), "thread_count": threads,
           "wall_time_s": wall, "finished": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if extra:
        man.update(extra)
    path = out / "manifest.json"
    path.write_text(json.dumps(_finite(man), indent=2, default=str))
    return path


# -- subcommands -----------------------------------------------------------------


def cmd_profile(cfg: dict, out: Path) -> dict:
    P = DoubleWell.from_config(cfg.get("potential"))
    pc = cfg.get("profile", {})
    prof = Profiles.compute(P, float(pc.get("Z", 10.0)), float(pc.get("h", 0.005)))
    t0, t1 = prof.theta0, prof.theta1
    write_csv(out / "profile.csv", ("z", "theta0", "dtheta0", "theta1"),
              zip(t0.z, t0.values, t0.derivative, t1.values))
    consts = [("sigma", prof.sigma), ("theta1_minus_inf", t1.limits[0]), ("theta1_plus_inf", t1.limits[1]),
              ("decay_alpha", t0.decay_alpha), ("orthogonality", check_orthogonality(t0, t1, P))]
    write_csv(out / "constants.csv", ("name", "value"), consts)
    print(f"sigma,{prof.sigma!r}")
    return {"sigma": prof.sigma}


def cmd_validate_potential(cfg: dict, out: Path) -> dict:
    P = DoubleWell.from_config(cfg.get("potential"))
    rep = validate(P)
    for line in rep.lines():
        print(line)
    (out / "validation.json").write_text(json.dumps(
        {"passed": rep.passed, "checks": [ch.__dict__ for ch in rep.checks]}, indent=2, default=float))
    return {"passed": rep.passed, "exit": 0 if rep.passed else 1}


def _initial_field(sim: dict, grid: Grid2D, prof: Profiles, eps: float, seed: int) -> np.ndarray:
    init = sim["init"]
    if init["kind"] == "random":
        rng = np.random.default_rng(seed)
        return float(init.get("mean", 0.0)) + float(init.get("amplitude", 0.05)) * rng.uniform(-1, 1, grid.shape)
    if "shape" not in init:
        raise SchemaError("glued initial data needs a shape")
    shape = sdf(init["shape"])
    delta = float(init.get("delta", 4 * eps))
    return init_glued(grid, shape, eps, delta, prof.theta0, prof.theta1, int(init.get("order", 1)) == 1)


def cmd_simulate(cfg: dict, out: Path) -> dict:
    sim = _section(cfg, "simulate")
    P = DoubleWell.from_config(cfg.get("potential"))
    prof = Profiles.compute(P)
    grid = make_grid(sim["grid"])
    eps = float(sim["epsilon"])
    pf = PFConfig(eps, tau=sim.get("tau"), tau_factor=float(sim.get("tau_factor", 1.0)),
                  s=float(sim.get("s", 14.0)), cg_tol=float(sim.get("cg_tol", 1e-10)),
                  elasticity=ElasticSpec.from_dict(sim.get("elasticity")),
                  end_time=float(sim["end_time"]))
    model = CahnLarche(grid, pf, P)
    state = model.initial_state(_initial_field(sim, grid, prof, eps, int(cfg.get("seed", 0))))
    snaps = sorted(set([0.0] + [float(t) for t in sim.get("snapshot_times", [])] + [pf.end_time]))
    traj = model.run(state, record_every=int(sim.get("record_every", 1)), snapshot_times=snaps,
                     polylines=bool(sim.get("polylines", False)))
    traj.write_timeseries(out / "timeseries.csv")
    frames = out / "frames"
    for i, s in enumerate(traj.snapshots):
        dump_state(frames, s, i)
    for i, poly in enumerate(traj.contours):
        if poly is not None:
            poly.to_csv(out / f"polyline_{i:05d}.csv")
    (out / "run.json").write_text(json.dumps({
        "grid": grid.to_dict(), "pf": pf.to_dict(), "frames": len(traj.snapshots),
        "times": [s.time for s in traj.snapshots], "sigma": prof.sigma,
        "potential": cfg.get("potential", {"kind": "quartic"})}, indent=2))
    return {"steps": len(traj.series) - 1, "frames": len(traj.snapshots)}


def _frame(run_dir: Path, index: int):
    meta = json.loads((run_dir / "run.json").read_text())
    n = meta["frames"]
    i = index if index >= 0 else n + index
    if not 0 <= i < n:
        raise ValueError(f"frame {index} out of range (run has {n} frames)")
    fields = {}
    for name in ("c", "mu", "u1", "u2"):
        arr, m = read_grid(run_dir / "frames" / f"{name}_{i:05d}")
        fields[name] = arr
    g = meta["grid"]
    grid = Grid2D(g["nx"], g["ny"], g["Lx"], g["Ly"])
    u = np.stack([fields["u1"], fields["u2"]])
    return PFState(grid, fields["c"], fields["mu"], u, m["time"]), meta


def cmd_residual(cfg: dict, out: Path) -> dict:
    rc = _section(cfg, "residual")
    run_dir = Path(rc["run_dir"])
    if not (run_dir / "run.json").is_file():
        raise SchemaError(f"{run_dir} is not a simulate output directory")
    state, meta = _frame(run_dir, int(rc.get("frame", -1)))
    eps = float(rc.get("epsilon", meta["pf"]["epsilon"]))
    sigma = float(meta["sigma"])
    poly = extract_zero_contour(state.c, state.grid)
    poly.to_csv(out / "polyline.csv")
    offset = rc.get("offset")
    if rc["kind"] == "gibbs-thomson":
        el = ElasticSpec.from_dict(rc.get("elasticity", meta["pf"]["elasticity"]))
        tab = gibbs_thomson_residual(state, poly, sigma, el.tensor if el else None,
                                     el.eigenstrain if el else None, offset=offset, epsilon=eps)
    else:
        s1, _ = _frame(run_dir, int(rc.get("frame1", -1)))
        if s1.time <= state.time:
            raise ValueError("the second frame must be later than the first")
        p1 = extract_zero_contour(s1.c, s1.grid)
        off = float(offset) if offset is not None else max(2 * eps, 2 * state.grid.h)
        tab = stefan_residual(state, s1, poly, p1, off, tau=meta["pf"]["tau"])
    tab.to_csv(out / "residual.csv")
    return {"points": len(tab), "max_abs_residual": tab.max_abs()}


def _phi_builder(spec: dict, prof: Profiles):
    kind = spec.get("kind", "flat")

    def build_phi(eps, grid):
        X, Y = grid.mesh
        if kind == "flat":
            return prof.theta0((X - float(spec.get("x0", grid.Lx / 2))) / eps)
        if kind == "radial":
            cx, cy = spec.get("center", (grid.Lx / 2, grid.Ly / 2))
            return prof.theta0((np.hypot(X - cx, Y - cy) - float(spec.get("R", 0.3))) / eps)
        a = float(spec.get("amplitude", 0.5))
        return a * np.tanh((X - float(spec.get("x0", grid.Lx / 2))) / (np.sqrt(2) * eps))
    return build_phi


def cmd_spectral(cfg: dict, out: Path) -> dict:
    sc = _section(cfg, "spectral")
    P = DoubleWell.from_config(cfg.get("potential"))
    prof = Profiles.compute(P)
    eps = [float(e) for e in sc["epsilons"]]
    if len(eps) < 3:
        raise ValueError("the spectral sweep needs at least three epsilons")
    gamma1 = float(sc.get("gamma1", 1.0))
    method = sc.get("method", "dense")
    builder = _phi_builder(sc.get("phi", {"kind": "flat"}), prof)
    rows = []
    for e in eps:
        if "path" in sc:
            p = make_path(sc["path"], 1.0)
            grid = sweep_grid(e, p["L"], p["ratio"], p["eps_ref"], p["exponent"])
        else:
            grid = make_grid(sc.get("grid", {"n": 64, "L": 1.0}))
        lam, _ = min_rayleigh(SpectralProblem(grid, builder(e, grid), e, gamma1), P, method)
        rows.append((e, lam, max(0.0, -lam)))
    write_csv(out / "spectral.csv", ("epsilon", "lambda_min", "C"), rows)
    C = np.array([r[2] for r in rows])
    if np.all(C == 0):
        ratio = 1.0
    elif np.any(C == 0):
        ratio = float("inf")
    else:
        ratio = float(C.max() / C.min())
    passed = bool(np.all(np.isfinite(C)) and ratio <= float(sc.get("max_ratio", 2.0)))
    rep = {"gamma1": gamma1, "ratio": ratio, "passed": passed,
           "rows": [{"epsilon": a, "lambda_min": b, "C": c} for a, b, c in rows]}
    (out / "spectral.json").write_text(json.dumps(_finite(rep), indent=2, allow_nan=False))
    return {"passed": passed, "ratio": ratio}


def norm_report(a: np.ndarray, b: np.ndarray, grid: Grid2D) -> dict:
    d = a - b
    return {"L2": grid.l2(d), "L3": grid.lp(d, 3.0), "max": float(np.max(np.abs(d)))}


def compare_runs(run_a: Path, run_b: Path, fields=("c", "mu")) -> list[dict]:
    ma = json.loads((run_a / "run.json").read_text())
    mb = json.loads((run_b / "run.json").read_text())
    if ma["grid"] != mb["grid"]:
        raise ValueError("runs use different grids")
    ta, tb = ma["times"], mb["times"]
    if len(ta) != len(tb) or not np.allclose(ta, tb, rtol=0, atol=1e-12):
        raise ValueError("runs have different sample times")
    g = ma["grid"]
    grid = Grid2D(g["nx"], g["ny"], g["Lx"], g["Ly"])
    rows = []
    for i, t in enumerate(ta):
        for name in fields:
            A, _ = read_grid(run_a / "frames" / f"{name}_{i:05d}")
            B, _ = read_grid(run_b / "frames" / f"{name}_{i:05d}")
            rows.append({"frame": i, "time": t, "field": name, **norm_report(A, B, grid)})
    return rows


def cmd_compare(cfg: dict, out: Path) -> dict:
    cc = _section(cfg, "compare")
    a, b = Path(cc["run_a"]), Path(cc["run_b"])
    for d in (a, b):
        if not (d / "run.json").is_file():
            raise SchemaError(f"{d} is not a simulate output directory")
    rows = compare_runs(a, b, tuple(cc.get("fields", ["c", "mu"])))
    write_csv(out / "compare.csv", ("frame", "time", "field", "L2", "L3", "max"),
              [(r["frame"], r["time"], r["field"], r["L2"], r["L3"], r["max"]) for r in rows])
    return {"max": max((r["max"] for r in rows), default=0.0)}


RATES_COLUMNS = ("epsilon", "norm_rA", "norm_sA", "norm_mass", "err_mu", "err_c")


def cmd_rates(cfg: dict, out: Path) -> dict:
    rc = _section(cfg, "rates")
    P = DoubleWell.from_config(cfg.get("potential"))
    prof = Profiles.compute(P)
    eps = sorted((float(e) for e in rc["epsilons"]), reverse=True)
    if len(eps) < 3:
        raise ValueError("a rate fit needs at least three epsilons")
    shape = sdf(rc.get("shape", {"kind": "circle", "center": [1.0, 1.0], "R": 0.35}))
    if not isinstance(shape, Circle):
        raise ValueError("rates sweeps use a circle (radial sharp reference)")
    path = make_path(rc.get("path"))
    delta = float(rc.get("delta", 4 * max(eps)))
    el = ElasticSpec.from_dict(rc.get("elasticity"))
    simulate = bool(rc.get("simulate", True))
    T = float(rc.get("end_time", 0.03))
    rows, extra = [], []
    for e in eps:
        grid = sweep_grid(e, path["L"], path["ratio"], path["eps_ref"], path["exponent"])
        n = residual_norms(e, grid, shape, prof, delta, int(rc.get("fd_order", 4)), el)
        em = ec = float("nan")
        if simulate:
            r = convergence_run(e, grid, shape, prof, T, tau_factor=float(rc.get("tau_factor", 1.0)))
            em, ec = r.err_mu, r.err_c
        rows.append((e, n["rA1"], n["sA"], n["mass"], em, ec))
        extra.append({"epsilon": e, "nodes": grid.nx, "rA_order0": n["rA0"], "rA_ratio": n["ratio"]})
    write_csv(out / "rates.csv", RATES_COLUMNS, rows)
    cols = {k: [r[i] for r in rows] for i, k in enumerate(RATES_COLUMNS)}
    orders = {}
    for k in RATES_COLUMNS[1:]:
        orders[k] = fitted(eps, cols[k])[0]
    ratio_order = fitted(eps, [x["rA_ratio"] for x in extra])[0]
    rep = {"order": orders["err_mu"] if simulate else ratio_order, "orders": orders,
           "rA_ratio_order": ratio_order, "per_epsilon": extra, "delta": delta, "path": path}
    rep = _finite(rep)
    (out / "rates.json").write_text(json.dumps(rep, indent=2, allow_nan=False))
    print(json.dumps({"order": rep["order"]}))
    return {"order": rep["order"]}


def _finite(obj):
    """JSON-safe copy: non-finite floats become None."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


COMMANDS = {
    "profile": cmd_profile,
    "validate-potential": cmd_validate_potential,
    "simulate": cmd_simulate,
    "residual": cmd_residual,
    "spectral": cmd_spectral,
    "compare": cmd_compare,
    "rates": cmd_rates,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="larche", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"larche {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", nargs="?", help="JSON run config")
        sp.add_argument("-o", "--output-dir", help="overrides output_dir from the config")
        if name in ("profile", "validate-potential"):
            sp.add_argument("--potential", choices=["quartic"], help="built-in potential")
            sp.add_argument("--coefficients", help="comma separated F coefficients, increasing degree")
    return ap


def _config_from_args(args) -> dict:
    needs_file = args.command not in ("profile", "validate-potential")
    if args.config is None:
        if needs_file:
            raise SchemaError(f"'{args.command}' needs a config file")
        cfg = {}
    else:
        cfg = load_config(args.config)
    if getattr(args, "coefficients", None):
        try:
            coeffs = [float(v) for v in args.coefficients.split(",")]
        except ValueError:
            raise SchemaError("--coefficients must be numbers separated by commas") from None
        cfg["potential"] = {"kind": "custom-polynomial", "coefficients": coeffs}
    elif getattr(args, "potential", None):
        cfg["potential"] = {"kind": args.potential}
    validate_config(cfg)
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        threads = thread_count(cfg)
    except SchemaError as exc:
        print(f"larche: {exc}", file=sys.stderr)
        return 2
    out = Path(args.output_dir or cfg.get("output_dir") or Path("larche-out") / args.command)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        with threadpool_limits(limits=threads), scipy.fft.set_workers(threads):
            result = COMMANDS[args.command](cfg, out)
    except SchemaError as exc:
        print(f"larche: {exc}", file=sys.stderr)
        return 2
    except MODULE_ERRORS as exc:
        print(f"larche {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    write_manifest(out, args.command, cfg, threads, time.perf_counter() - t0, {"result": result})
    return int(result.get("exit", 0)) if isinstance(result, dict) else 0


if __name__ == "__main__":
    sys.exit(main())
