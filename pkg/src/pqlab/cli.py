"""Command-line front end.

Every subcommand resolves a :class:`RunConfig` in three layers: built-in
defaults, then an optional JSON file given by ``--config``, then explicit
flags. The resolved config is embedded in the output. JSON output is a
single object ``{"config": ..., "result": ...}``. CSV output starts with one
``# config: <json>`` comment line, followed by a header and the rows.

Exit codes: 0 success, 1 domain error, 2 convergence failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .bifurcation import region_map, sweep_beta
from .critical_values import alpha_star, beta_star, beta_star_curve
from .discrete import random_bump
from .fiber import Params, fiber_report
from .grid import DEFAULT_NODES, ConvergenceError, DomainError, Grid, GridFunction
from .shooting import DEFAULT_RTOL, Solution, find_solutions, shooting_eigenvalue
from .special import eigenpair, lambda1, pi_p
from .variational import global_minimize, minimize_truncated, mountain_pass

EXIT_OK, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_USAGE = 0, 1, 2, 64

COMMANDS = ("eig", "fiber", "critical-curve", "shoot", "solve", "mpass",
            "bifurcate", "region-map", "repro-fig3")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: float | None = None
    q: float | None = None
    alpha: float | None = None
    beta: float | None = None
    nodes: int = DEFAULT_NODES
    rtol: float = DEFAULT_RTOL
    s_min: float = 1e-3
    s_max: float = 1e3
    n_scan: int = 400
    seed: int = 0
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    output: str = "-"
    format: str = "json"
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise UsageError(f"format must be json or csv, got {self.format!r}")
        if not self.rtol > 0.0:
            raise UsageError("rtol must be positive")
        if not 0.0 < self.s_min < self.s_max:
            raise UsageError("need 0 < s_min < s_max")
        if self.n_scan < 2 or self.nodes < 17 or self.threads < 1:
            raise UsageError("n_scan >= 2, nodes >= 17 and threads >= 1 required")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must fit in 64 unsigned bits")
        if self.options.get("profiles") and self.format == "csv":
            raise UsageError("--profiles needs --format json")
        for lo, hi in (("alpha_min", "alpha_max"), ("beta_min", "beta_max")):
            a, b = self.options.get(lo), self.options.get(hi)
            if a is not None and b is not None and not a < b:
                raise UsageError(f"need {lo} < {hi}")

    def params(self) -> Params:
        missing = [k for k in ("p", "q", "alpha", "beta") if getattr(self, k) is None]
        if missing:
            raise UsageError(f"{self.command} needs --{' --'.join(missing)}")
        return Params(self.p, self.q, self.alpha, self.beta)

    def pq(self) -> tuple[float, float]:
        if self.p is None or self.q is None:
            raise UsageError(f"{self.command} needs --p and --q")
        if not 1.0 < self.q < self.p:
            raise DomainError(f"need 1 < q < p, got p={self.p}, q={self.q}")
        return self.p, self.q

    def grid(self) -> Grid:
        return Grid(self.nodes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["options"] = {k: d["options"][k] for k in sorted(d["options"])}
        return d


# ---------------------------------------------------------------------------
# argument parsing

_COMMON = {f.name for f in fields(RunConfig)} - {"command", "options"}

_OPTION_DEFAULTS = {
    "eig": {"r": None},
    "fiber": {"u": "phi_p", "scale": 1.0},
    "critical-curve": {"alpha_min": None, "alpha_max": None, "n_alpha": 11},
    "shoot": {"profiles": False},
    "solve": {"method": "global", "beta_prime": None, "profiles": False},
    "mpass": {"u1_index": 0, "v1_index": None, "profiles": False},
    "bifurcate": {"beta_min": None, "beta_max": None, "n_beta": 40},
    "region-map": {"alpha_min": None, "alpha_max": None, "beta_min": None, "beta_max": None,
                   "n_alpha": 8, "n_beta": 8, "tol": 1e-3, "with_curves": False},
    "repro-fig3": {"profiles": False},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common options")
    for name, typ in (("p", float), ("q", float), ("alpha", float), ("beta", float),
                      ("nodes", int), ("rtol", float), ("s-min", float), ("s-max", float),
                      ("n-scan", int), ("seed", int), ("threads", int)):
        g.add_argument(f"--{name}", type=typ, default=None)
    g.add_argument("--output", "-o", default=None, help="output path, '-' for stdout")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    g.add_argument("--config", default=None, help="JSON file with defaults; flags win")
    g.add_argument("--log-level", default="WARNING")

    parser = _Parser(prog="pqlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    add("eig", "first eigenvalue of the r-Laplacian").add_argument("--r", type=float)
    sp = add("fiber", "fiber quantities of a test function")
    sp.add_argument("--u", choices=("phi_p", "phi_q", "bump"))
    sp.add_argument("--scale", type=float)
    sp = add("critical-curve", "sample beta_*(alpha)")
    sp.add_argument("--alpha-min", type=float)
    sp.add_argument("--alpha-max", type=float)
    sp.add_argument("--n-alpha", type=int)
    sp = add("shoot", "all positive solutions by shooting")
    sp.add_argument("--profiles", action="store_const", const=True)
    sp = add("solve", "variational solution")
    sp.add_argument("--method", choices=("global", "truncated"))
    sp.add_argument("--beta-prime", type=float,
                    help="truncated: supersolution is the largest solution at this beta")
    sp.add_argument("--profiles", action="store_const", const=True)
    sp = add("mpass", "mountain-pass solution from a shooting solution")
    sp.add_argument("--u1-index", type=int, help="index of u1 among solutions sorted by L-inf")
    sp.add_argument("--v1-index", type=int, help="index of the other endpoint (default: automatic)")
    sp.add_argument("--profiles", action="store_const", const=True)
    sp = add("bifurcate", "solution branches over a beta range")
    sp.add_argument("--beta-min", type=float)
    sp.add_argument("--beta-max", type=float)
    sp.add_argument("--n-beta", type=int)
    sp = add("region-map", "label the (alpha, beta) plane")
    for name, typ in (("alpha-min", float), ("alpha-max", float), ("beta-min", float),
                      ("beta-max", float), ("n-alpha", int), ("n-beta", int), ("tol", float)):
        sp.add_argument(f"--{name}", type=typ)
    sp.add_argument("--with-curves", action="store_const", const=True)
    sp = add("repro-fig3", "three solutions at p=6, q=2 left of lambda_1(p)")
    sp.add_argument("--profiles", action="store_const", const=True)
    return parser


def resolve_config(argv: list[str]) -> tuple[RunConfig, str]:
    """Parse ``argv`` into a validated RunConfig and a log level."""
    ns = vars(_build_parser().parse_args(argv))
    command = ns.pop("command")
    log_level = ns.pop("log_level")
    merged: dict = {}
    opts = dict(_OPTION_DEFAULTS[command])
    path = ns.pop("config")
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        file_opts = file_cfg.pop("options", {}) or {}
        file_cfg.pop("command", None)
        for k, v in {**file_cfg, **file_opts}.items():
            if k in _COMMON:
                merged[k] = v
            elif k in opts:
                opts[k] = v
            else:
                raise UsageError(f"unknown config key {k!r} for {command}")
    for k, v in ns.items():
        if v is None:
            continue
        if k in _COMMON:
            merged[k] = v
        else:
            opts[k] = v
    if command == "repro-fig3":
        merged.update(_fig3_params())
    try:
        cfg = RunConfig(command=command, options=opts, **merged)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    cfg.validate()
    return cfg, log_level


def _fig3_params() -> dict:
    p, q = 6.0, 2.0
    return {"p": p, "q": q, "alpha": lambda1(p) - 0.1, "beta": beta_star(p, q) + 0.1}


# ---------------------------------------------------------------------------
# serialization


def _clean(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def render(cfg: RunConfig, summary: dict, rows: list[dict]) -> str:
    if cfg.format == "json":
        payload = {"config": cfg.to_dict(), "result": {**summary, "rows": rows}}
        return json.dumps(_clean(payload), indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(_clean(cfg.to_dict()), ensure_ascii=False) + "\r\n")
    writer = csv.writer(buf)
    columns = list(rows[0].keys()) if rows else []
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _solution_row(i: int, s: Solution, profiles: bool) -> dict:
    row = {"index": i, "slope": s.slope, "linf": s.linf, "energy": s.energy,
           "residual": s.residual, "symmetry_defect": s.symmetry_defect, "valid": s.is_valid()}
    if profiles:
        row["x"] = s.u.x
        row["u"] = s.u.values
        row["du"] = s.u.dvalues
    return row


def _node_rows(sols: list[Solution]) -> list[dict]:
    """Long-format profile table: one row per solution and node."""
    rows = []
    for i, s in enumerate(sols):
        for x, u, du in zip(s.u.x, s.u.values, s.u.dvalues):
            rows.append({"solution": i, "x": x, "u": u, "du": du})
    return rows


# ---------------------------------------------------------------------------
# commands


def _shoot(cfg: RunConfig, params: Params) -> list[Solution]:
    return find_solutions(params, s_range=(cfg.s_min, cfg.s_max), n_scan=cfg.n_scan,
                          grid=cfg.grid(), rtol=cfg.rtol)


def cmd_eig(cfg):
    r = cfg.options["r"]
    if r is None:
        raise UsageError("eig needs --r")
    if not r > 1.0:
        raise DomainError(f"need r > 1, got {r}")
    lam = lambda1(r)
    return {"r": r, "pi_r": pi_p(r), "lambda1": lam,
            "lambda1_shooting": shooting_eigenvalue(r)}, [{"r": r, "lambda1": lam}]


def cmd_fiber(cfg):
    params = cfg.params()
    grid = cfg.grid()
    kind = cfg.options["u"]
    if kind == "bump":
        rng = np.random.default_rng(cfg.seed)
        x = grid.nodes
        u = GridFunction(grid, random_bump(rng, x))
    else:
        u = eigenpair(params.p if kind == "phi_p" else params.q, grid).phi
    u = u.scaled(cfg.options["scale"])
    rep = asdict(fiber_report(u, params))
    return rep, [rep]


def cmd_critical_curve(cfg):
    p, q = cfg.pq()
    lam, ast = lambda1(p), alpha_star(p, q)
    lo = cfg.options["alpha_min"] if cfg.options["alpha_min"] is not None else lam
    hi = cfg.options["alpha_max"] if cfg.options["alpha_max"] is not None else ast
    n = cfg.options["n_alpha"]
    if n < 1:
        raise UsageError("n_alpha must be positive")
    rows = []
    for a in np.linspace(lo, hi, n):
        c = beta_star_curve(float(a), p, q, cfg.grid(), seed=cfg.seed)
        rows.append({"alpha": c.alpha, "beta_star_alpha": c.beta_star_alpha,
                     "converged": c.converged, "iterations": c.iterations})
    return {"beta_star": beta_star(p, q), "alpha_star": ast, "lambda1_p": lam,
            "lambda1_q": lambda1(q)}, rows


def cmd_shoot(cfg):
    sols = _shoot(cfg, cfg.params())
    if cfg.format == "csv":
        return {"count": len(sols)}, _node_rows(sols)
    rows = [_solution_row(i, s, cfg.options["profiles"]) for i, s in enumerate(sols)]
    return {"count": len(sols)}, rows


def cmd_solve(cfg):
    params = cfg.params()
    method = cfg.options["method"]
    if method == "global":
        sol = global_minimize(params, cfg.grid(), seed=cfg.seed)
    else:
        bp = cfg.options["beta_prime"]
        if bp is None:
            raise UsageError("solve --method truncated needs --beta-prime")
        sup = _shoot(cfg, params.with_(beta=bp))
        if not sup:
            raise DomainError(f"no solution at beta'={bp} to serve as supersolution")
        sol = minimize_truncated(sup[-1].u, params)
    return {"method": method}, [_solution_row(0, sol, cfg.options["profiles"])]


def cmd_mpass(cfg):
    params = cfg.params()
    sols = _shoot(cfg, params)
    i1, iv = cfg.options["u1_index"], cfg.options["v1_index"]
    for i in (i1, iv):
        if i is not None and not 0 <= i < len(sols):
            raise DomainError(f"solution index {i} out of range: {len(sols)} shooting solutions")
    v1 = sols[iv].u if iv is not None else None
    sol = mountain_pass(sols[i1], params, v1=v1, seed=cfg.seed)
    nearest = min(range(len(sols)), key=lambda k: abs(sols[k].linf - sol.linf))
    return {"u1_index": i1, "v1_index": iv, "nearest_shooting_index": nearest,
            "relative_linf_gap": abs(sols[nearest].linf / sol.linf - 1.0)}, \
        [_solution_row(0, sol, cfg.options["profiles"])]


def cmd_bifurcate(cfg):
    p, q = cfg.pq()
    if cfg.alpha is None:
        raise UsageError("bifurcate needs --alpha")
    o = cfg.options
    lo = o["beta_min"] if o["beta_min"] is not None else lambda1(q) + 0.05
    hi = o["beta_max"] if o["beta_max"] is not None else beta_star(p, q) + 0.5
    res = sweep_beta(cfg.alpha, (lo, hi), o["n_beta"], p, q, grid=cfg.grid(), rtol=cfg.rtol,
                     n_scan=cfg.n_scan, threads=cfg.threads)
    rows = [{"beta": s.beta, "branch_id": s.branch_id, "slope": s.slope, "linf": s.linf,
             "energy": s.energy} for s in res.rows()]
    summary = {"alpha": res.alpha, "betas": res.betas, "counts": res.counts,
               "changes": [asdict(c) for c in res.changes], "n_folds": len(res.folds),
               "failures": [list(f) for f in res.failures]}
    return summary, rows


def cmd_region_map(cfg):
    p, q = cfg.pq()
    o = cfg.options
    for k in ("alpha_min", "alpha_max", "beta_min", "beta_max"):
        if o[k] is None:
            raise UsageError(f"region-map needs --{k.replace('_', '-')}")
    cells = region_map((o["alpha_min"], o["alpha_max"]), (o["beta_min"], o["beta_max"]),
                       o["n_alpha"], o["n_beta"], p, q, tol=o["tol"], grid=cfg.grid(),
                       with_curves=bool(o["with_curves"]), rtol=cfg.rtol, n_scan=cfg.n_scan,
                       threads=cfg.threads)
    rows = [{"alpha": c.alpha, "beta": c.beta, "label": c.label.value} for c in cells]
    counts: dict[str, int] = {}
    for c in cells:
        counts[c.label.value] = counts.get(c.label.value, 0) + 1
    errors = [{"alpha": c.alpha, "beta": c.beta, "detail": c.detail} for c in cells if c.detail]
    return {"label_counts": dict(sorted(counts.items())), "errors": errors}, rows


def cmd_repro_fig3(cfg):
    params = cfg.params()
    sols = _shoot(cfg, params)
    rows = [_solution_row(i, s, cfg.options["profiles"]) for i, s in enumerate(sols)]
    return {"count": len(sols), "all_negative_energy": all(s.energy < 0 for s in sols),
            "all_valid": all(s.is_valid() for s in sols)}, rows


_HANDLERS = {"eig": cmd_eig, "fiber": cmd_fiber, "critical-curve": cmd_critical_curve,
             "shoot": cmd_shoot, "solve": cmd_solve, "mpass": cmd_mpass,
             "bifurcate": cmd_bifurcate, "region-map": cmd_region_map,
             "repro-fig3": cmd_repro_fig3}


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg, log_level = resolve_config(argv)
    except UsageError as exc:
        print(f"pqlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except DomainError as exc:
        print(f"pqlab: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    logging.basicConfig(level=getattr(logging, str(log_level).upper(), logging.WARNING),
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        summary, rows = _HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"pqlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"pqlab: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"pqlab: convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    text = render(cfg, summary, rows)
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return EXIT_OK


def main() -> int:
    return run()
