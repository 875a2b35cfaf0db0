"""Command-line front end: ``ecsjack eval | verify | table``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical error.  Settings come from flags, then from an optional
``--config`` file of ``key = value`` lines, then from defaults.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import __version__
from .ecsolve import P_integral, Psi_prefactor, eigen_E
from .elliptic import EllipticParams, eta1_over_pi, potential_V, theta, vartheta
from .errors import (DegeneracyError, DimensionError, DomainError, EvaluationError,
                     ScheduleError, SingularityError, UndefinedConstantError)
from .quadrature import GridSpec, default_schedule, make_schedule
from .symfunc import SolutionSpec, jack_build, jack_eval, partitions
from . import verify as V

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

SUITES = ("pde", "euler", "kernel", "limit", "radius", "orth", "genfun", "recursion")

DEFAULTS = {
    "g": 1.5, "k": 1, "L": None, "r": "1,0", "s1": 1, "p": None, "tau_im": None,
    "grid_m": 32, "grid_mode": "doubling", "tol": 1e-10, "rho_last": None,
    "epsilon_geo": None, "points": None, "seed": 0, "output": "-", "format": "json",
    "threads": 1, "suite": "all", "negative_control": False, "what": None, "z": None,
    "x": None, "n": None, "m_max": 512,
}

_INT_KEYS = {"k", "L", "s1", "grid_m", "points", "seed", "threads", "n", "m_max"}
_FLOAT_KEYS = {"g", "p", "tau_im", "tol", "rho_last", "epsilon_geo"}
_BOOL_KEYS = {"negative_control"}


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)
    explicit: frozenset = frozenset()

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError as exc:
            raise AttributeError(key) from exc

    def hash(self) -> str:
        keep = {k: v for k, v in self.values.items() if k not in ("output", "threads")}
        blob = json.dumps({"command": self.command, **keep}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    # derived objects -------------------------------------------------

    def params(self) -> EllipticParams:
        p, t = self.values["p"], self.values["tau_im"]
        if p is not None and t is not None:
            params = EllipticParams.from_tau_im(t)
            if abs(params.p - p) > 1e-14 * max(abs(p), 1e-300):
                raise ConfigError("--p and --tau-im disagree")
            return params
        if t is not None:
            return EllipticParams.from_tau_im(t)
        if p is None:
            return EllipticParams.from_p(0.0)
        if not abs(p) < 1:
            raise ConfigError(f"|p| < 1 violated (p = {p})")
        return EllipticParams.from_p(p)

    def spec(self) -> SolutionSpec:
        r = tuple(int(v) for v in str(self.values["r"]).split(",") if v.strip())
        L = self.values["L"] if self.values["L"] is not None else len(r)
        if L != len(r):
            raise ConfigError(f"--L {L} does not match the {len(r)} entries of --r")
        k = self.values["k"]
        s1 = self.values["s1"] if k > 1 else 1
        return SolutionSpec(self.values["g"], k, L, r, s1)

    def grid(self) -> GridSpec:
        mode = self.values["grid_mode"]
        return GridSpec(M=self.values["grid_m"], mode=mode, tol=self.values["tol"],
                        M_max=self.values["m_max"])

    def schedule(self, L: int, p_abs: float, z=None):
        rho, eps = self.values["rho_last"], self.values["epsilon_geo"]
        if rho is None and eps is None:
            return default_schedule(L, p_abs, z)
        base = default_schedule(L, p_abs, z)
        rho = rho if rho is not None else (base.radii[-1] if base.radii else 1.0)
        if eps is None:
            eps = max(math.sqrt(p_abs), 1.0 / 3.0) if p_abs > 0 else 1.0 / 3.0
        s = make_schedule(L, p_abs, rho, eps)
        return s if z is None else s.with_z(z)


def _parse_complex_list(text: str) -> np.ndarray:
    try:
        return np.array([complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex list {text!r}") from exc


def _parse_points(text: str) -> np.ndarray:
    rows = [_parse_complex_list(chunk) for chunk in text.split(";") if chunk.strip()]
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    if len({r.size for r in rows}) != 1:
        raise ConfigError("all points must have the same length")
    return np.array(rows)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys are allowed."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val
    return out


def _coerce(key, val):
    if val is None:
        return None
    try:
        if key in _INT_KEYS:
            return int(val)
        if key in _FLOAT_KEYS:
            return float(val)
        if key in _BOOL_KEYS:
            return val if isinstance(val, bool) else str(val).lower() in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return val


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ecsjack", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="key = value file (flags take precedence)")
    a("--g", type=float)
    a("--k", type=int)
    a("--L", type=int)
    a("--r", help="comma list, e.g. 2,1,0")
    a("--s1", type=int)
    a("--p", type=float)
    a("--tau-im", dest="tau_im", type=float)
    a("--grid-m", dest="grid_m", type=int)
    a("--grid-mode", dest="grid_mode", choices=["fixed", "doubling"])
    a("--m-max", dest="m_max", type=int)
    a("--tol", type=float)
    a("--rho-last", dest="rho_last", type=float)
    a("--epsilon-geo", dest="epsilon_geo", type=float)
    a("--points", type=int, help="number of seeded random torus points")
    a("--seed", type=int)
    a("--output", help="output path, '-' for stdout")
    a("--format", choices=["json", "csv"])
    a("--threads", type=int)
    a("--z", help="point as comma list; several points separated by ';'")
    a("--x", help="additive coordinates as comma list")
    a("--n", type=int)
    a("--negative-control", dest="negative_control", action="store_const", const=True)
    sub.add_parser("eval", parents=[common], help="evaluate a function").add_argument(
        "--what", choices=["theta", "vartheta", "V", "eta1", "P", "psi", "jack", "E"])
    sub.add_parser("verify", parents=[common], help="run verification suites").add_argument(
        "--suite", choices=SUITES + ("all",))
    sub.add_parser("table", parents=[common], help="emit CSV tables").add_argument(
        "--what", choices=["pscan", "Escan", "points"])
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    vals = dict(DEFAULTS)
    file_vals = {}
    if args.config:
        try:
            file_vals = read_config_file(args.config)
            vals.update(file_vals)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            vals[key] = v
    explicit = set(file_vals)
    explicit.update(k for k in DEFAULTS if getattr(args, k, None) is not None)
    vals = {k: _coerce(k, v) for k, v in vals.items()}
    if vals["threads"] < 1:
        raise ConfigError("--threads must be at least 1")
    return RunConfig(args.command, vals, frozenset(explicit))


# ---------------------------------------------------------------------------
# output


class Sink:
    def __init__(self, cfg: RunConfig, columns: Optional[List[str]] = None):
        self.cfg = cfg
        self.fmt = cfg.format
        self.columns = columns
        self.rows = []

    def add(self, rec: dict):
        rec = dict(rec)
        rec["config_hash"] = self.cfg.hash()
        rec["version"] = __version__
        self.rows.append(V._jsonable(rec))

    def text(self) -> str:
        if self.fmt == "json":
            return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.rows)
        cols = list(self.columns or sorted({k for r in self.rows for k in r}))
        for extra in ("config_hash", "version"):
            if extra not in cols:
                cols.append(extra)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            w.writerow([json.dumps(r.get(c)) if isinstance(r.get(c), (list, dict)) else r.get(c)
                        for c in cols])
        return buf.getvalue()

    def flush(self):
        data = self.text()
        if self.cfg.output in (None, "-"):
            sys.stdout.write(data)
        else:
            with open(self.cfg.output, "w") as fh:
                fh.write(data)


def _points_z(cfg: RunConfig, n: int) -> np.ndarray:
    if cfg.z is not None:
        pts = _parse_points(str(cfg.z))
        if pts.size and pts.shape[1] != n:
            raise ConfigError(f"--z has {pts.shape[1]} coordinates, expected {n}")
        return pts.reshape(-1, n)
    if cfg.x is not None:
        x = np.array([float(v) for v in str(cfg.x).split(",")])
        if x.size != n:
            raise ConfigError(f"--x has {x.size} coordinates, expected {n}")
        return np.exp(1j * x)[None, :]
    count = 1 if cfg.points is None else cfg.points
    if count == 0:
        return np.zeros((0, n), dtype=complex)
    return np.exp(1j * V.random_torus_points(n, count, cfg.seed))


# ---------------------------------------------------------------------------
# commands


def cmd_eval(cfg: RunConfig) -> int:
    what = cfg.what or "P"
    params = cfg.params()
    sink = Sink(cfg)
    if what in ("theta", "vartheta", "V"):
        if cfg.z is None and cfg.x is None:
            raise ConfigError(f"--what {what} needs --z (theta) or --x")
        args = _parse_complex_list(str(cfg.z if what == "theta" else (cfg.x or cfg.z)))
        fn = {"theta": theta, "vartheta": vartheta, "V": potential_V}[what]
        for a in args:
            sink.add({"what": what, "arg": complex(a), "p": params.p, "value": complex(fn(a, params))})
    elif what == "eta1":
        sink.add({"what": what, "p": params.p, "value": eta1_over_pi(params)})
    elif what == "E":
        spec = cfg.spec()
        sink.add({"what": what, "spec": spec.to_dict(), "p": params.p,
                  "value": eigen_E(spec, params)})
    elif what == "jack":
        spec = cfg.spec()
        jp = jack_build(spec.lam, spec.n, spec.g)
        z = _points_z(cfg, spec.n)
        for pt, v in zip(z, np.atleast_1d(jack_eval(jp, z)) if z.size else []):
            sink.add({"what": what, "lambda": list(spec.lam.parts), "point": pt, "value": v})
    elif what in ("P", "psi"):
        spec = cfg.spec()
        z = _points_z(cfg, spec.n)
        if z.shape[0]:
            sched = cfg.schedule(spec.L, abs(params.p), z)
            res = P_integral(spec, z, params, sched, cfg.grid())
            vals = res.value
            if what == "psi":
                if not params.is_real:
                    raise ConfigError("psi needs a real nome")
                vals = vals * Psi_prefactor(np.angle(z), params, spec.g)
            for pt, v in zip(z, vals):
                sink.add({"what": what, "spec": spec.to_dict(), "p": params.p, "point": pt,
                          "value": v, "grid_M": res.M, "converged": res.converged,
                          "schedule": list(sched.radii)})
    sink.flush()
    return EXIT_OK


def _suite_reports(cfg: RunConfig, suite: str, negative: bool) -> list:
    """Checks of one suite as a list of zero-argument callables returning reports."""
    g_set = "g" in cfg.explicit
    g_list = [cfg.values["g"]] if g_set else [0.75, 1.5]
    p_list = [cfg.values["p"]] if cfg.values["p"] else [0.05, 0.1]
    seed = cfg.seed
    jobs = []
    if suite in ("pde", "euler"):
        specs = lambda g: [SolutionSpec(g, 1, 2, (1, 0)), SolutionSpec(g, 1, 2, (2, 0)),
                           SolutionSpec(g, 2, 2, (1, 0), 1)]
        for g in g_list:
            for p in p_list:
                for spec in specs(g):
                    if cfg.n is not None and spec.n != cfg.n:
                        continue
                    x = V.random_torus_points(spec.n, 1, seed)[0]
                    params = EllipticParams.from_p(p)
                    grid = GridSpec(M=32, mode="doubling", tol=cfg.tol, M_max=cfg.m_max)
                    if suite == "pde":
                        jobs.append(lambda s=spec, x=x, pr=params, gr=grid: V.pde_residual(
                            s, x, pr, grid=gr, E_shift=1.0 if negative else 0.0))
                    else:
                        jobs.append(lambda s=spec, x=x, pr=params, gr=grid: V.euler_residual(
                            s, x, pr, grid=gr, d_shift=1.0 if negative else 0.0))
    elif suite == "kernel":
        for g in g_list:
            for p in p_list:
                for (N, M) in [(1, 0), (2, 0), (2, 1), (3, 1), (3, 2)]:
                    pts = V.random_torus_points(N + M, 3, seed + 10 * N + M)
                    for pt in pts:
                        def job(N=N, M=M, pt=pt, g=g, p=p):
                            reps = V.kernel_check(N, M, pt[:N], pt[N:], EllipticParams.from_p(p),
                                                  g, c_shift=1.0 if negative else 0.0)
                            # the Euler identity does not involve c_NM
                            return reps[1:] if negative else reps
                        jobs.append(job)
    elif suite == "limit":
        gs = [cfg.values["g"]] if g_set else [0.6, 1.5, 2.7]
        for g in gs:
            for n in (2, 3):
                if cfg.n is not None and n != cfg.n:
                    continue
                rs = V.ordered_vectors(n, -2, 3) if not negative else [(0, 1), (1, 2, 0)]
                for r in rs:
                    if len(r) != n:
                        continue
                    spec = SolutionSpec(g, 1, n, r)
                    z = np.exp(1j * V.random_torus_points(n, 5, seed))
                    jobs.append(lambda s=spec, z=z: V.limit_p0_check(
                        s, z, claim_ordered=negative))
        if not negative:
            for r in [(0, 1), (1, 2, 0)]:
                spec = SolutionSpec(1.5, 1, len(r), r)
                z = np.exp(1j * V.random_torus_points(len(r), 5, seed))
                jobs.append(lambda s=spec, z=z: V.limit_p0_check(s, z))
    elif suite == "radius":
        p = cfg.values["p"] or 0.1
        base = 1.05 * math.sqrt(1 / p)
        for spec in [SolutionSpec(1.5, 1, 2, (1, 0)), SolutionSpec(1.5, 1, 3, (2, 1, 0))]:
            z = np.exp(1j * V.random_torus_points(spec.n, 3, seed))
            jobs.append(lambda s=spec, z=z: V.radius_invariance_check(
                s, z, EllipticParams.from_p(p), [0.8 * base, base, 1.2 * base]))
    elif suite == "orth":
        g = cfg.values["g"]
        parts = [q for w in range(4) for q in partitions(w, 2)]
        for a in parts:
            for b in parts:
                jobs.append(lambda a=a, b=b: V.orthogonality_check(a, b, 2, g, 512))
    elif suite == "genfun":
        rng = np.random.default_rng(seed)
        for _ in range(3):
            z = 0.2 * rng.uniform(0.2, 1.0, 2) * np.exp(1j * rng.uniform(0, 2 * math.pi, 2))
            xi = np.exp(1j * rng.uniform(0, 2 * math.pi, 2))
            jobs.append(lambda z=z, xi=xi: V.genfun_check(2, 2, cfg.values["g"], z, xi, 6))
        jobs.append(lambda: V.genfun_check(1, 1, cfg.values["g"], [0.2], [1.0], 12, tol=1e-6))
    elif suite == "recursion":
        params = cfg.params()
        for spec in V.random_specs(50, seed):
            jobs.append(lambda s=spec: V.recursion_check(s, params))
    return jobs


def cmd_verify(cfg: RunConfig) -> int:
    suites = SUITES if cfg.suite == "all" else (cfg.suite,)
    negative = bool(cfg.negative_control)
    jobs = []
    for s in suites:
        if negative and s in ("orth", "genfun", "radius", "recursion"):
            continue
        jobs.extend(_suite_reports(cfg, s, negative))
    run = lambda job: job()
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            out = list(ex.map(run, jobs))
    else:
        out = [run(j) for j in jobs]
    reports = []
    for item in out:
        reports.extend(item if isinstance(item, list) else [item])
    sink = Sink(cfg)
    for rep in reports:
        rec = rep.to_dict()
        rec["negative_control"] = negative
        sink.add(rec)
    passed = sum(r.passed for r in reports)
    failed = len(reports) - passed
    summary = {"summary": True, "checks": len(reports), "passed": passed, "failed": failed,
               "negative_control": negative}
    if negative:
        summary["controls_detected"] = failed == len(reports)
    sink.add(summary)
    sink.flush()
    print(f"{len(reports)} checks: {passed} passed, {failed} failed"
          + (" (negative controls: failures expected)" if negative else ""), file=sys.stderr)
    if negative:
        return EXIT_OK if failed == len(reports) else EXIT_FAIL
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_table(cfg: RunConfig) -> int:
    what = cfg.what or "pscan"
    if what == "pscan":
        spec = cfg.spec()
        z = _points_z(cfg, spec.n)
        cols = ["p", "point_index", "re", "im", "abs", "grid_M"]
        sink = Sink(cfg, cols)
        for p in [round(0.01 * i, 2) for i in range(31)]:
            params = EllipticParams.from_p(p)
            if not z.shape[0]:
                break
            sched = cfg.schedule(spec.L, p, z)
            res = P_integral(spec, z, params, sched, cfg.grid())
            for i, v in enumerate(res.value):
                sink.add({"p": p, "point_index": i, "re": v.real, "im": v.imag,
                          "abs": abs(v), "grid_M": res.M})
    elif what == "Escan":
        spec = cfg.spec()
        cols = ["tau_im", "p", "E_re", "E_im", "E_trig"]
        sink = Sink(cfg, cols)
        e_trig = eigen_E(spec, EllipticParams.from_p(0.0)).real
        for t in [0.1 * i for i in range(1, 31)]:
            params = EllipticParams.from_tau_im(t)
            E = eigen_E(spec, params)
            sink.add({"tau_im": round(t, 10), "p": params.p.real, "E_re": E.real,
                      "E_im": E.imag, "E_trig": e_trig})
    else:
        spec = cfg.spec()
        params = cfg.params()
        z = _points_z(cfg, spec.n)
        cols = ["point_index", "point", "re", "im", "grid_M"]
        sink = Sink(cfg, cols)
        if z.shape[0]:
            sched = cfg.schedule(spec.L, abs(params.p), z)
            res = P_integral(spec, z, params, sched, cfg.grid())
            for i, (pt, v) in enumerate(zip(z, res.value)):
                sink.add({"point_index": i, "point": pt, "re": v.real, "im": v.imag,
                          "grid_M": res.M})
    sink.cfg.values["format"] = "csv"
    sink.fmt = "csv"
    sink.flush()
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        cmd = {"eval": cmd_eval, "verify": cmd_verify, "table": cmd_table}[args.command]
        return cmd(cfg)
    except (ConfigError, DomainError, ScheduleError, UndefinedConstantError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularityError, EvaluationError, DimensionError, DegeneracyError,
            FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
