"""Batch front end: config parsing, analysis runs, sweeps, file emission.

Config files are UTF-8 ``[section]`` / ``key = value`` text; unknown keys are
rejected with file:line positions.  Outputs per run: ``branch_<kind>.csv``
(nodal x, w, theta, sigma, u), ``summary.json``, ``convergence.log`` and a
``plot.gp`` gnuplot script using the red/green/blue branch color convention.
"""

import argparse
import json
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg
from .energy import recover_axial
from .model import (
    LoadCase,
    Mesh,
    ModelError,
    SolverSettings,
    SupportSpec,
    derive_constants,
)
from .oracle import multistart_newton
from .sdp import BranchKind, build_branch_sdp, write_sdpa
from .solver import ALL_BRANCHES, run_triality


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "beam": {"e": float, "mu": float, "l": float, "height": float},
    "load": {"type": str, "f": float, "lambda": float},
    "support": {"kind": str, "fixed": str},
    "mesh": {"elements": int},
    "solver": {
        "outer_tol": float,
        "outer_max_iter": int,
        "sdp_tol": float,
        "sdp_max_iter": int,
        "strictness_eps": float,
        "classify_tol": float,
        "polish": bool,
    },
    "output": {"branches": str},
    "sweep": {"lambda": str, "elements": str},
}

_REQUIRED = {
    "beam": ("e", "mu", "l", "height"),
    "load": ("type", "f", "lambda"),
    "support": ("kind",),
    "mesh": ("elements",),
}


@dataclass
class RunConfig:
    """Validated run description (one analysis point, optional sweep)."""

    E: float
    mu: float
    L: float
    height: float
    load_type: str
    f: float
    axial_lambda: float
    support_kind: str
    support_fixed: tuple
    elements: int
    branches: tuple
    solver: SolverSettings
    sweep_lambda: tuple | None = None  # (from, to, steps)
    sweep_elements: tuple | None = None

    def props(self):
        return derive_constants(self.E, self.mu, self.L, self.height / 2.0)

    def load(self):
        if self.load_type == "uniform":
            return LoadCase.uniform(self.f, self.axial_lambda)
        return LoadCase.center_point(self.f, self.axial_lambda)

    def support(self):
        if self.support_kind == "simply_supported":
            return SupportSpec.simply_supported()
        if self.support_kind == "clamped":
            return SupportSpec.clamped()
        return SupportSpec.custom(self.support_fixed)

    def mesh(self, elements=None):
        return Mesh(elements or self.elements, self.L)

    def branch_kinds(self):
        return tuple(BranchKind(b) for b in self.branches)


def _parse_bool(s):
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_branches(text):
    if text.strip() == "all":
        return tuple(b.value for b in ALL_BRANCHES)
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok not in ("global", "localmax", "localmin"):
            raise ConfigError(f"unknown branch name {tok!r} (use global, localmax, localmin)")
        out.append(tok)
    if not out:
        raise ConfigError("no branches requested")
    return tuple(dict.fromkeys(out))


def parse_config(path):
    """Read and validate a config file into a RunConfig."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    data = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
            data.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"{path}:{lineno}: key outside any [section]")
        key, val = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in section [{section}]")
        if key in data[section]:
            raise ConfigError(f"{path}:{lineno}: duplicate key {section}.{key}")
        typ = _SCHEMA[section][key]
        try:
            if typ is bool:
                parsed = _parse_bool(val)
            elif typ is str:
                parsed = val
            else:
                parsed = typ(val)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {section}.{key}: {exc}") from exc
        data[section][key] = parsed

    for sec, keys in _REQUIRED.items():
        if sec not in data:
            raise ConfigError(f"{path}: missing required section [{sec}]")
        for k in keys:
            if k not in data[sec]:
                raise ConfigError(f"{path}: missing required key {sec}.{k}")

    load_type = data["load"]["type"].lower()
    if load_type not in ("uniform", "center_point"):
        raise ConfigError(f"{path}: load.type must be 'uniform' or 'center_point'")
    support_kind = data["support"]["kind"].lower()
    if support_kind not in ("simply_supported", "clamped", "custom"):
        raise ConfigError(
            f"{path}: support.kind must be simply_supported, clamped or custom"
        )
    fixed = ()
    if support_kind == "custom":
        if "fixed" not in data["support"]:
            raise ConfigError(f"{path}: support.fixed is required for custom supports")
        fixed = tuple(int(tok) for tok in data["support"]["fixed"].split(",") if tok.strip())

    solver_kw = dict(data.get("solver", {}))
    try:
        settings = SolverSettings(**solver_kw)
    except (ModelError, TypeError) as exc:
        raise ConfigError(f"{path}: bad [solver] settings: {exc}") from exc

    branches = _parse_branches(data.get("output", {}).get("branches", "all"))

    sweep_lambda = None
    sweep_elements = None
    if "sweep" in data:
        if "lambda" in data["sweep"]:
            sweep_lambda = _parse_lambda_sweep(data["sweep"]["lambda"])
        if "elements" in data["sweep"]:
            sweep_elements = tuple(
                int(tok) for tok in data["sweep"]["elements"].split(",") if tok.strip()
            )

    cfg = RunConfig(
        E=data["beam"]["e"],
        mu=data["beam"]["mu"],
        L=data["beam"]["l"],
        height=data["beam"]["height"],
        load_type=load_type,
        f=data["load"]["f"],
        axial_lambda=data["load"]["lambda"],
        support_kind=support_kind,
        support_fixed=fixed,
        elements=data["mesh"]["elements"],
        branches=branches,
        solver=settings,
        sweep_lambda=sweep_lambda,
        sweep_elements=sweep_elements,
    )
    _validate_config(cfg, path)
    return cfg


def _parse_lambda_sweep(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("sweep.lambda must be 'from:to:steps'")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ConfigError("sweep.lambda needs at least one step")
    return (a, b, n)


def _validate_config(cfg, origin):
    try:
        props = cfg.props()
        load = cfg.load()
        mesh = cfg.mesh()
        cfg.support().fixed_dofs(mesh.m)
        from .model import validate_load_mesh

        validate_load_mesh(load, mesh)
    except ModelError as exc:
        raise ConfigError(f"{origin}: {exc}") from exc


def _fmt(x):
    return f"{x:.17g}"


def _branch_csv(path, sys, sol):
    x = sys.mesh.node_x
    wf = sys.inject(sol.w)
    w = wf[0::2]
    theta = wf[1::2]
    u = recover_axial(sol.w, sys)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,w,theta,sigma,u\n")
        for i in range(len(x)):
            fh.write(
                ",".join(_fmt(v) for v in (x[i], w[i], theta[i], sol.sigma[i], u[i])) + "\n"
            )


def _branch_summary(sys, sol):
    wf = sys.inject(sol.w)
    w = wf[0::2]
    e = sol.energy
    return {
        "present": True,
        "converged": sol.converged,
        "classification": sol.classification.value,
        "iterations": sol.iterations,
        "loop_iterations": sol.loop_iterations,
        "polish_iterations": sol.polish_iterations,
        "energies": {"pi_p": e.pi_p, "xi": e.xi, "pi_d": e.pi_d if e.pi_d_defined else None},
        "gap_quadratic": e.gap_quadratic,
        "duality_gap": e.duality_gap if e.pi_d_defined else None,
        "sdp_loop_gap": None if np.isnan(sol.sdp_gap) else sol.sdp_gap,
        "res_equilibrium": e.res_equilibrium,
        "res_constitutive": e.res_constitutive,
        "inertia_G": list(sol.inertia_G),
        "min_eig_hess": sol.min_eig_hess,
        "max_deflection": float(np.max(np.abs(w))),
        "midspan_deflection": float(w[len(w) // 2]) if sys.mesh.m % 2 == 0 else None,
    }


_PLOT_COLORS = {"global": "red", "localmax": "green", "localmin": "blue"}
_PLOT_TITLES = {
    "global": "global minimum",
    "localmax": "local maximum",
    "localmin": "local minimum",
}


def _write_plot(path, present):
    lines = [
        "set xlabel 'x [m]'",
        "set ylabel 'w [m]'",
        "set key outside",
        "set grid",
    ]
    plots = [
        f"'branch_{k}.csv' using 1:2 with lines lc rgb '{_PLOT_COLORS[k]}' title '{_PLOT_TITLES[k]}'"
        for k in present
    ]
    if plots:
        lines.append("set datafile separator ','")
        lines.append("plot \\\n  " + ", \\\n  ".join(plots))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_point(cfg: RunConfig, outdir, elements=None, axial_lambda=None, oracle=False, dump_sdp=False):
    """Run one analysis point and emit its files; returns the summary dict."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    props = cfg.props()
    lam = cfg.axial_lambda if axial_lambda is None else axial_lambda
    load = (
        LoadCase.uniform(cfg.f, lam)
        if cfg.load_type == "uniform"
        else LoadCase.center_point(cfg.f, lam)
    )
    support = cfg.support()
    mesh = cfg.mesh(elements)
    kinds = cfg.branch_kinds()

    report = run_triality(props, load, support, mesh, cfg.solver, branches=kinds)
    sys = report.system

    log_lines = [
        f"lambda_cr_rayleigh = {_fmt(report.lambda_cr_rayleigh)}",
        f"lambda_cr_scaled   = {_fmt(report.lambda_cr_scaled)}",
    ]
    summary = {
        "config": {
            "E": cfg.E,
            "mu": cfg.mu,
            "L": cfg.L,
            "height": cfg.height,
            "h": cfg.height / 2.0,
            "load_type": cfg.load_type,
            "f": cfg.f,
            "lambda": lam,
            "support": cfg.support_kind,
            "elements": mesh.m,
            "branches": [k.value for k in kinds],
        },
        "lambda_cr": {
            "rayleigh": report.lambda_cr_rayleigh,
            "scaled": report.lambda_cr_scaled,
        },
        "branches": {},
    }

    present = []
    for kind in kinds:
        sol = report.get(kind)
        if sol is None:
            reason = report.absent.get(kind, "not run")
            summary["branches"][kind.value] = {"present": False, "reason": reason}
            log_lines.append(f"[{kind.value}] absent: {reason}")
            continue
        summary["branches"][kind.value] = _branch_summary(sys, sol)
        present.append(kind.value)
        _branch_csv(outdir / f"branch_{kind.value}.csv", sys, sol)
        log_lines.append(
            f"[{kind.value}] converged={sol.converged} loop={sol.loop_iterations} "
            f"polish={sol.polish_iterations} res_eq={sol.energy.res_equilibrium:.3e} "
            f"res_con={sol.energy.res_constitutive:.3e} class={sol.classification.value}"
        )

    if oracle:
        pts = multistart_newton(sys, cfg.solver)
        matches = {}
        for kind in kinds:
            sol = report.get(kind)
            if sol is None:
                continue
            dists = [float(np.max(np.abs(sol.w - cp.w))) for cp in pts]
            matches[kind.value] = min(dists) if dists else None
        summary["oracle"] = {
            "n_critical_points": len(pts),
            "pi_p": [cp.pi_p for cp in pts],
            "kinds": [cp.kind.value for cp in pts],
            "branch_match_distance": matches,
        }
        log_lines.append(f"[oracle] {len(pts)} critical points")

    if dump_sdp:
        w0 = linalg.solve_sym(sys.G0, sys.f_vec)
        for kind in kinds:
            prob = build_branch_sdp(kind, w0, sys, cfg.solver)
            write_sdpa(prob, outdir / f"branch_{kind.value}.dat-s")

    (outdir / "summary.json").write_text(
        json.dumps(summary, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )
    (outdir / "convergence.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    _write_plot(outdir / "plot.gp", present)
    return summary


def _point_task(args):
    cfg, outdir, elements, lam, oracle, dump = args
    return run_point(cfg, outdir, elements=elements, axial_lambda=lam, oracle=oracle, dump_sdp=dump)


def run_and_emit(cfg: RunConfig, outdir, oracle=False, dump_sdp=False, allow_partial=False, jobs=1):
    """Run the configured analysis (single point or sweep); returns exit status."""
    outdir = Path(outdir)
    points = []
    if cfg.sweep_lambda is not None:
        a, b, n = cfg.sweep_lambda
        lams = np.linspace(a, b, n)
        for lam in lams:
            points.append((outdir / f"lambda_{lam:.6g}", None, float(lam)))
    elif cfg.sweep_elements is not None:
        for m in cfg.sweep_elements:
            points.append((outdir / f"elements_{m}", int(m), None))
    else:
        points.append((outdir, None, None))

    tasks = [(cfg, str(d), m, lam, oracle, dump_sdp) for d, m, lam in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_point_task, tasks))
    else:
        summaries = [_point_task(t) for t in tasks]

    if len(points) > 1:
        table = []
        for (d, m, lam), summ in zip(points, summaries):
            row = {
                "dir": d.name,
                "elements": summ["config"]["elements"],
                "lambda": summ["config"]["lambda"],
            }
            for bname, bsumm in summ["branches"].items():
                row[f"{bname}_gap_quadratic"] = bsumm.get("gap_quadratic")
                row[f"{bname}_duality_gap"] = bsumm.get("duality_gap")
                row[f"{bname}_classification"] = bsumm.get("classification")
            table.append(row)
        (outdir / "sweep_summary.json").write_text(
            json.dumps(table, indent=2) + "\n", encoding="utf-8"
        )

    status = 0
    for summ in summaries:
        for bname, bs in summ["branches"].items():
            if bs.get("present") and bs.get("converged"):
                continue
            if not bs.get("present") and "collapsed" in str(bs.get("reason", "")):
                continue  # pre-buckling single-solution regime, not a failure
            if not allow_partial:
                status = 1
    return status


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cdbeam",
        description="Post-buckling branch analysis of the extensible nonlinear beam",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an analysis described by a config file")
    run_p.add_argument("--config", required=True, help="path to the config file")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument(
        "--branches",
        default=None,
        help="all or a comma list of global,localmax,localmin (overrides config)",
    )
    run_p.add_argument("--elements", type=int, default=None, help="override element count")
    run_p.add_argument(
        "--sweep",
        default=None,
        help="sweep spec: lambda=a:b:n or elements=20,40,60 (overrides config)",
    )
    run_p.add_argument("--oracle", action="store_true", help="cross-check with the Newton oracle")
    run_p.add_argument("--allow-partial", action="store_true", help="exit 0 even if a branch fails")
    run_p.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    run_p.add_argument("--dump-sdp", action="store_true", help="dump branch SDPs in SDPA format")

    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.branches:
            cfg = RunConfig(**{**cfg.__dict__, "branches": _parse_branches(args.branches)})
        if args.elements:
            cfg = RunConfig(**{**cfg.__dict__, "elements": args.elements})
        if args.sweep:
            key, _, val = args.sweep.partition("=")
            key = key.strip().lower()
            if key == "lambda":
                cfg = RunConfig(**{**cfg.__dict__, "sweep_lambda": _parse_lambda_sweep(val)})
            elif key == "elements":
                cfg = RunConfig(
                    **{
                        **cfg.__dict__,
                        "sweep_elements": tuple(int(t) for t in val.split(",") if t.strip()),
                    }
                )
            else:
                raise ConfigError("sweep must be lambda=a:b:n or elements=list")
        _validate_config(cfg, "<cli>")
    except ConfigError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    return run_and_emit(
        cfg,
        args.out,
        oracle=args.oracle,
        dump_sdp=args.dump_sdp,
        allow_partial=args.allow_partial,
        jobs=args.jobs,
    )


if __name__ == "__main__":
    _sys.exit(main())
