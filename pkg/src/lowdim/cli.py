"""Command line front end.

Commands: validate, solve-elliptic, solve-parabolic, semigroup, poincare and
diagnose. Errors go to standard error as ``E_<CODE>: message``; the exit code
is 0 on success, 2 on parse/validation/compatibility errors and 1 otherwise.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import regularity
from .assembly import CoefficientMatrix, build_system, write_coo
from .discretize import Field, sample, write_mesh_text
from .elliptic import CompatibilityError, EllipticProblem, group_poincare_constants, solve_elliptic
from .expressions import ExpressionError, parse_component_expressions
from .parabolic import ParabolicProblem, asymptotic_check, constant_load, solve_parabolic
from .semigroup import TaylorDivergence, semigroup_apply, spectral_decompose, taylor_iterate
from .structure import BUILTINS, ConfigParseError, ValidationError, builtin, load_structure, parse_structure, validate

CHECKS = ("traces", "continuity", "h2", "cosserat")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    structure: str
    h: float = 0.05
    out: Path = Path(".")
    quiet: bool = False
    rhs: list = field(default_factory=list)
    u0: list = field(default_factory=list)
    g: list = field(default_factory=list)
    coeff: str | None = None
    T: float = 1.0
    dt: float = 0.01
    theta: float = 1.0
    times: list = field(default_factory=lambda: [0.0, 0.1, 1.0])
    tol: float = 1e-10
    modes: int | None = None
    taylor: bool = False
    stationary: bool = False
    center: bool = False
    dump_matrices: bool = False
    mesh_out: bool = False
    solution: str | None = None
    checks: tuple = CHECKS

    def __post_init__(self):
        for name in ("h", "T", "dt", "tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name} must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise UsageError("--theta must lie in [0, 1]")
        if any(t < 0 for t in self.times):
            raise UsageError("--t values must be nonnegative")
        if self.modes is not None and self.modes < 1:
            raise UsageError("--modes must be at least 1")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise UsageError(f"unknown checks {sorted(unknown)}; choose from {list(CHECKS)}")
        for p in (self.coeff, self.solution):
            if p is not None and not Path(p).is_file():
                raise UsageError(f"no such file: {p}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--structure", required=True, help="JSON config path or builtin name")
    common.add_argument("--h", type=float, default=0.05, help="mesh size")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--quiet", action="store_true")

    p = _Parser(prog="lowdim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="check a structure config")

    e = sub.add_parser("solve-elliptic", parents=[common], help="stationary problem")
    e.add_argument("--rhs", action="append", default=[], metavar="ID=EXPR")
    e.add_argument("--coeff", help="JSON file with a constant matrix B and its ellipticity constant")
    e.add_argument("--dump-matrices", action="store_true", help="write K.coo and M.coo")
    e.add_argument("--mesh-out", action="store_true", help="write mesh.txt")

    q = sub.add_parser("solve-parabolic", parents=[common], help="theta-scheme heat flow")
    q.add_argument("--u0", action="append", default=[], metavar="ID=EXPR")
    q.add_argument("--rhs", action="append", default=[], metavar="ID=EXPR")
    q.add_argument("--T", type=float, default=1.0)
    q.add_argument("--dt", type=float, default=0.01)
    q.add_argument("--theta", type=float, default=1.0)
    q.add_argument("--stationary", action="store_true", help="track the distance to the elliptic solution")
    q.add_argument("--center", action="store_true", help="subtract the group means of u0")

    s = sub.add_parser("semigroup", parents=[common], help="spectral heat semigroup")
    s.add_argument("--g", action="append", default=[], metavar="ID=EXPR")
    s.add_argument("--t", type=float, nargs="+", default=[0.0, 0.1, 1.0], dest="times")
    s.add_argument("--modes", type=int, default=None, help="number of eigenpairs (default all)")
    s.add_argument("--taylor", action="store_true", help="also run forward Taylor iterations")
    s.add_argument("--tol", type=float, default=1e-10)

    sub.add_parser("poincare", parents=[common], help="weak Poincare constants per kernel group")

    d = sub.add_parser("diagnose", parents=[common], help="regularity diagnostics for a solution.csv")
    d.add_argument("--solution", required=True)
    d.add_argument("--checks", default=",".join(CHECKS), help="comma separated subset of " + ",".join(CHECKS))
    return p


def parse_args(argv):
    ns = vars(build_parser().parse_args(argv))
    if isinstance(ns.get("checks"), str):
        ns["checks"] = tuple(c.strip() for c in ns["checks"].split(",") if c.strip())
    return RunConfig(**ns)


# --------------------------------------------------------------------------
# io helpers


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def _write_json(path, obj):
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_solution(path, u, system):
    rows = []
    for c in system.structure.components:
        amb = system.meshset[c.id].ambient
        vals = regularity._local(u, c.id)
        for k, (x, val) in enumerate(zip(amb, vals)):
            rows.append((c.id, k, float(x[0]), float(x[1]), float(x[2]), float(val)))
    _write_csv(path, ["component_id", "local_vertex", "x", "y", "z", "value"], rows)


def read_solution(path, system, tol=1e-9):
    """Read solution.csv back into ``{cid: local values}``, checking it matches the mesh."""
    data = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["component_id", "local_vertex", "x", "y", "z", "value"]
        if reader.fieldnames != expected:
            raise ConfigParseError(f"solution header must be {','.join(expected)}", str(path))
        for line, row in enumerate(reader, start=2):
            try:
                cid, k = int(row["component_id"]), int(row["local_vertex"])
                xyz = [float(row[a]) for a in "xyz"]
                val = float(row["value"])
            except (TypeError, ValueError):
                raise ConfigParseError("malformed row", f"{path}:{line}") from None
            data.setdefault(cid, {})[k] = (xyz, val)
    out = {}
    for c in system.structure.components:
        amb = system.meshset[c.id].ambient
        rows = data.get(c.id, {})
        if sorted(rows) != list(range(len(amb))):
            raise ValueError(f"solution does not match the mesh of component {c.id} at h={system.h}")
        xyz = np.array([rows[k][0] for k in range(len(amb))])
        if np.abs(xyz - amb).max() > tol:
            raise ValueError(f"solution coordinates differ from the mesh of component {c.id}")
        out[c.id] = np.array([rows[k][1] for k in range(len(amb))])
    return out


def _load_structure(spec):
    if spec in BUILTINS:
        return builtin(spec)
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"no such structure file or builtin: {spec}")
    return load_structure(path.read_text())


def _load_coefficients(path):
    if path is None:
        return None
    try:
        obj = json.loads(Path(path).read_text())
        return CoefficientMatrix(np.array(obj["B"], dtype=float), float(obj.get("lambda", 1.0)))
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    except (KeyError, TypeError) as exc:
        raise ConfigParseError(f"coefficient file needs a 3x3 'B' ({exc})", str(path)) from None


def _pair(jn):
    return f"{jn.pair[0]}-{jn.pair[1]}"


def _say(cfg, msg):
    if not cfg.quiet:
        print(msg)


# --------------------------------------------------------------------------
# commands


def cmd_validate(cfg):
    if cfg.structure in BUILTINS:
        s = builtin(cfg.structure)
    else:
        path = Path(cfg.structure)
        if not path.is_file():
            raise UsageError(f"no such structure file or builtin: {cfg.structure}")
        s = parse_structure(path.read_text())
    report = validate(s)
    if not report.ok:
        raise ValidationError(report)
    _say(cfg, str(report))


def cmd_solve_elliptic(cfg):
    s = _load_structure(cfg.structure)
    f = parse_component_expressions(cfg.rhs, s)
    system = build_system(s, cfg.h, _load_coefficients(cfg.coeff))
    sol = solve_elliptic(EllipticProblem(s, f, cfg.h, system.coefficients), system)
    write_solution(cfg.out / "solution.csv", sol.u, system)
    _write_json(cfg.out / "summary.json", {
        "command": "solve-elliptic",
        "h": cfg.h,
        "dofs": system.n_dofs,
        "groups": system.dofmap.kernel_groups,
        "residual": sol.residual,
        "group_means": sol.group_means,
        "energy": sol.energy,
        "multipliers": sol.multipliers,
    })
    if cfg.dump_matrices:
        for name, A in (("K", system.K), ("M", system.M)):
            with open(cfg.out / f"{name}.coo", "w") as fh:
                write_coo(A, fh)
    if cfg.mesh_out:
        with open(cfg.out / "mesh.txt", "w") as fh:
            write_mesh_text(system.meshset, fh)
    _say(cfg, f"dofs={system.n_dofs} residual={sol.residual:.3e} energy={sol.energy:.10g}")


def cmd_solve_parabolic(cfg):
    s = _load_structure(cfg.structure)
    system = build_system(s, cfg.h)
    u0 = sample(system.dofmap, parse_component_expressions(cfg.u0, s)).values
    if cfg.center:
        dm = system.dofmap
        means = (system.constraint_matrix() @ u0) / np.asarray(dm.group_measures)
        u0 = u0 - dm.indicators() @ means
    f = parse_component_expressions(cfg.rhs, s)
    timed = any(e.time_dependent for e in f.values())
    if not cfg.rhs:
        load = None
    elif timed:
        load = lambda t: system.load({cid: e.at_time(t) for cid, e in f.items()}).values  # noqa: E731
    else:
        load = constant_load(system, f)
    traj = solve_parabolic(ParabolicProblem(system, u0, cfg.T, cfg.dt, cfg.theta, load))
    norms = traj.m_norms(system.M)
    header = ["step", "t", "energy", "M_norm"]
    cols = [range(len(traj)), traj.times, traj.energies, norms]
    summary = {
        "command": "solve-parabolic",
        "h": cfg.h,
        "dofs": system.n_dofs,
        "steps": len(traj) - 1,
        "final_energy": traj.energies[-1],
        "final_M_norm": norms[-1],
    }
    if cfg.stationary:
        if timed:
            raise UsageError("--stationary needs a time-independent right-hand side")
        ustar = solve_elliptic(EllipticProblem(s, f, cfg.h), system).u
        rep = asymptotic_check(traj, ustar, system)
        header.append("dist_to_stationary")
        cols.append(rep.distances)
        summary["final_dist_to_stationary"] = rep.distances[-1]
        summary["monotone"] = rep.monotone
    _write_csv(cfg.out / "trajectory.csv", header,
               ([int(r[0])] + [float(v) for v in r[1:]] for r in zip(*cols)))
    write_solution(cfg.out / "solution.csv", Field(traj.states[-1], system.dofmap), system)
    _write_json(cfg.out / "summary.json", summary)
    _say(cfg, f"steps={len(traj) - 1} final M-norm={norms[-1]:.6e}")


def cmd_semigroup(cfg):
    s = _load_structure(cfg.structure)
    system = build_system(s, cfg.h)
    g = sample(system.dofmap, parse_component_expressions(cfg.g, s)).values
    basis = spectral_decompose(system.K, system.M, cfg.modes)
    _write_csv(cfg.out / "modes.csv", ["index", "lambda"], ((k, float(w)) for k, w in enumerate(basis.eigenvalues)))
    evo, gnorm = [], system.m_norm(g)
    for t in cfg.times:
        v = semigroup_apply(basis, t, g)
        evo.append((float(t), system.m_norm(v), float(v @ (system.K @ v))))
    _write_csv(cfg.out / "evolution.csv", ["t", "M_norm", "energy"], evo)
    summary = {
        "command": "semigroup",
        "h": cfg.h,
        "dofs": system.n_dofs,
        "modes": basis.k,
        "lambda_max": basis.eigenvalues[-1],
        "g_M_norm": gnorm,
        "contraction": all(row[1] <= gnorm * (1 + 1e-12) + 1e-14 for row in evo),
    }
    if cfg.taylor:
        rows = []
        for t in cfg.times:
            try:
                v, n = taylor_iterate(system.K, system.M, t, g, tol=cfg.tol)
            except TaylorDivergence:
                rows.append((float(t), -1, "diverged", "", ""))
                continue
            diff = system.m_norm(v - semigroup_apply(basis, t, g))
            rows.append((float(t), n, "ok", system.m_norm(v), diff))
        _write_csv(cfg.out / "taylor.csv", ["t", "terms", "status", "M_norm", "diff_to_spectral"], rows)
        summary["taylor_diverged"] = [r[0] for r in rows if r[2] == "diverged"]
    _write_json(cfg.out / "summary.json", summary)
    _say(cfg, f"modes={basis.k} lambda_max={basis.eigenvalues[-1]:.6e}")


def cmd_poincare(cfg):
    s = _load_structure(cfg.structure)
    system = build_system(s, cfg.h)
    consts = group_poincare_constants(system)
    _write_json(cfg.out / "summary.json", {
        "command": "poincare",
        "h": cfg.h,
        "dofs": system.n_dofs,
        "groups": system.dofmap.kernel_groups,
        "constants": consts,
    })
    for grp, c in zip(system.dofmap.kernel_groups, consts):
        _say(cfg, f"group {list(grp)}: C = {c:.10g}")


def cmd_diagnose(cfg):
    s = _load_structure(cfg.structure)
    system = build_system(s, cfg.h)
    u = read_solution(cfg.solution, system)
    out = {"h": cfg.h}
    if "traces" in cfg.checks:
        out["trace_mismatch"] = {}
        for jk, jn in enumerate(s.junctions):
            mx, l2 = regularity.trace_mismatch(u, system, jk)
            out["trace_mismatch"][_pair(jn)] = {"max": mx, "l2": l2}
    if "continuity" in cfg.checks:
        rep = regularity.continuity_check(u, system)
        out["continuity_jumps"] = {f"{i}-{j}": v for (i, j), v in rep.jumps.items()}
    if "h2" in cfg.checks:
        out["h2_seminorms"] = {str(c.id): regularity.h2_seminorm(u, system, c.id) for c in s.components}
    if "cosserat" in cfg.checks:
        try:
            b = regularity.cosserat_copy(u, system)
            rep = regularity.cosserat_compatibility(u, b, system)
            out["cosserat_pass"] = rep.passed
            out["cosserat_slot_mismatch"] = rep.slot_mismatch
        except regularity.GeometryError as exc:
            out["cosserat_pass"] = None
            out["cosserat_note"] = str(exc)
    _write_json(cfg.out / "diagnostics.json", out)
    _say(cfg, json.dumps(_clean(out), sort_keys=True))


COMMANDS = {
    "validate": cmd_validate,
    "solve-elliptic": cmd_solve_elliptic,
    "solve-parabolic": cmd_solve_parabolic,
    "semigroup": cmd_semigroup,
    "poincare": cmd_poincare,
    "diagnose": cmd_diagnose,
}


def _fail(code, msg):
    print(f"{code}: {msg}", file=sys.stderr)
    return 1 if code == "E_INTERNAL" else 2


def run(argv=None):
    """Execute one command; returns the process exit code."""
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else list(argv))
        if cfg.command != "validate":
            cfg.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[cfg.command](cfg)
    except (UsageError, ConfigParseError, ExpressionError) as exc:
        return _fail("E_PARSE", exc)
    except CompatibilityError as exc:
        return _fail("E_COMPAT", exc)
    except ValidationError as exc:
        return _fail("E_VALIDATION", exc)
    except ValueError as exc:
        return _fail("E_VALIDATION", exc)
    except Exception as exc:  # noqa: BLE001
        return _fail("E_INTERNAL", f"{type(exc).__name__}: {exc}")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
