"""Batch experiment runner: ``pluripot run`` and ``pluripot refine``."""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from .domains import domain_from_config
from .envelope import dirichlet_psh_extension, psh_envelope, relative_extremal
from .exceptions import (
    ConfigError,
    LpInfeasible,
    LpUnbounded,
    NoFeasibleC,
    NonConvergence,
    PluripotError,
    PreconditionError,
)
from .glue import cutoff_extension, max_glue
from .hyperconvex import NOT_P, build_exhaustion, classify_domain, default_probes, disk_probe
from .jensen import edwards_gap, jensen_lp, support_profile
from .lattice import build_cone, build_lattice, classify_nodes, lattice_for_domain
from .library import named_function, random_obstacle
from .pshcore import GridFunction, cone_violation

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_WITNESS = 0, 2, 3, 4

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POINTS = {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 4}}
_FUNC = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "properties": {"name": {"type": "string"}, "value": _NUM, "seed": {"type": "integer"}, "radius": _POS},
            "required": ["name"],
            "additionalProperties": False,
        },
    ]
}


def _experiment(kind: str, props: dict, required=()):
    return {
        "type": "object",
        "properties": {"kind": {"const": kind}, "label": {"type": "string"}, **props},
        "required": ["kind", *required],
        "additionalProperties": False,
    }


_EXPERIMENTS = [
    _experiment("envelope", {"obstacle": _FUNC, "points": _POINTS, "duality": {"type": "boolean"}}, ["obstacle"]),
    _experiment("dirichlet", {"boundary_data": _FUNC, "points": _POINTS}, ["boundary_data"]),
    _experiment(
        "jensen",
        {
            "phi": _FUNC,
            "points": _POINTS,
            "rows": {"enum": ["all", "interior"]},
            "support": {"enum": ["any", "boundary"]},
            "window": {"type": "integer", "minimum": 1},
        },
        ["phi", "points"],
    ),
    _experiment(
        "probe",
        {"n_random": {"type": "integer", "minimum": 0}, "max_coordinate": {"type": "integer", "minimum": 1}},
    ),
    _experiment(
        "classify",
        {
            "expected": {"enum": ["PHyperconvex", "NotPHyperconvex", "any"]},
            "n_random": {"type": "integer", "minimum": 0},
            "support_samples": {"type": "integer", "minimum": 1},
            "tol": _POS,
        },
    ),
    _experiment(
        "glue",
        {"u": _FUNC, "E_radius": _POS, "cutoff_data": _FUNC, "delta": _POS},
        ["u", "E_radius"],
    ),
    _experiment(
        "refine",
        {
            "h": {"type": "array", "items": _POS, "minItems": 2},
            "obstacle": _FUNC,
            "boundary_data": _FUNC,
            "points": _POINTS,
            "duality": {"type": "boolean"},
        },
        ["h"],
    ),
]

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "domain": {
            "type": "object",
            "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
            "required": ["name"],
            "additionalProperties": False,
        },
        "lattice": {
            "type": "object",
            "properties": {
                "h": _POS,
                "bbox": {
                    "oneOf": [
                        {"const": "auto"},
                        {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}},
                    ]
                },
                "margin_cells": {"type": "integer", "minimum": 0},
                "node_cap": {"type": "integer", "minimum": 1},
            },
            "required": ["h"],
            "additionalProperties": False,
        },
        "cone": {
            "type": "object",
            "properties": {
                "radii": {"type": "array", "items": _POS, "minItems": 1},
                "m": {"type": "integer", "minimum": 4},
                "max_halvings": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "tol": _POS,
                "max_iter": {"type": "integer", "minimum": 1},
                "sweep": {"enum": ["jacobi", "gauss-seidel"]},
                "boundary": {"enum": ["fixed", "closure"]},
                "lp_solver": {"enum": ["auto", "dense", "highs"]},
            },
            "additionalProperties": False,
        },
        "experiments": {"type": "array", "items": {"oneOf": _EXPERIMENTS}, "minItems": 1},
        "output": {"type": "string"},
    },
    "required": ["schema_version", "domain", "lattice", "experiments"],
    "additionalProperties": False,
}

_RANDOMIZED = {"probe", "classify"}


def _uses_random(fn) -> bool:
    return isinstance(fn, dict) and fn.get("name") == "random" and "seed" not in fn


def validate_config(cfg: dict) -> dict:
    """Schema validation plus the semantic checks the schema cannot express."""
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from None
    for i, exp in enumerate(cfg["experiments"]):
        random = exp["kind"] in _RANDOMIZED or any(_uses_random(v) for v in exp.values())
        if random and "seed" not in cfg:
            raise ConfigError(f"experiments/{i}: randomized experiment needs a top-level seed")
        if exp["kind"] == "refine":
            hs = exp["h"]
            if any(b >= a for a, b in zip(hs, hs[1:])):
                raise ConfigError(f"experiments/{i}: grid spacings must decrease")
            if ("obstacle" in exp) == ("boundary_data" in exp):
                raise ConfigError(f"experiments/{i}: refine needs exactly one of obstacle or boundary_data")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return validate_config(cfg)


class Setup:
    """Domain, lattice, mask and cone resolved from a config."""

    def __init__(self, cfg: dict, h: float | None = None):
        self.cfg = cfg
        self.domain = domain_from_config(cfg["domain"])
        lat_cfg = cfg["lattice"]
        self.h = float(lat_cfg["h"] if h is None else h)
        bbox = lat_cfg.get("bbox", "auto")
        cap = lat_cfg.get("node_cap")
        if bbox == "auto":
            self.lattice = lattice_for_domain(self.domain, self.h, lat_cfg.get("margin_cells", 2), node_cap=cap)
        else:
            self.lattice = build_lattice(bbox, self.h, self.domain.n, node_cap=cap)
        self.mask = classify_nodes(self.lattice, self.domain)
        self._cone = None
        solver = cfg.get("solver", {})
        self.tol = solver.get("tol", 1e-8)
        self.max_iter = solver.get("max_iter", 10**6)
        self.sweep = solver.get("sweep", "jacobi")
        self.boundary = solver.get("boundary", "fixed")
        self.lp_solver = solver.get("lp_solver", "auto")
        self.seed = cfg.get("seed", 0)

    @property
    def cone(self):
        if self._cone is None:
            cc = self.cfg.get("cone", {})
            self._cone = build_cone(
                self.lattice,
                self.mask,
                radii=cc.get("radii"),
                m=cc.get("m", 16),
                max_halvings=cc.get("max_halvings", 3),
            )
        return self._cone

    def envelope_kwargs(self, **over):
        kw = {"tol": self.tol, "max_iter": self.max_iter, "sweep": self.sweep, "boundary": self.boundary}
        kw.update(over)
        return kw

    def function(self, fn, role: str = "") -> GridFunction:
        """Evaluate a named function description on the closure nodes."""
        if isinstance(fn, str):
            fn = {"name": fn}
        name = fn["name"]
        pts = self.mask.closure_points()
        if name == "random":
            vals = random_obstacle(pts, fn.get("seed", self.seed))
        elif name == "extremal":
            if "radius" not in fn:
                raise ConfigError("the extremal obstacle needs a radius")
            K = self.disk_nodes(fn["radius"])
            vals = np.zeros(self.mask.n_closure)
            vals[K] = -1.0
        elif name == "exhaustion":
            return build_exhaustion(self.mask, self.cone, **self.envelope_kwargs(boundary="fixed"))
        else:
            vals = named_function(name, fn.get("value", 0.0))(pts)
        return GridFunction(self.mask, np.asarray(vals, dtype=float), role or name)

    def disk_nodes(self, radius: float) -> np.ndarray:
        pts = self.mask.closure_points()
        inside = (np.sqrt(np.sum(pts**2, axis=1)) <= radius + 1e-12) & self.mask.is_interior
        K = np.flatnonzero(inside)
        if K.size == 0:
            raise PreconditionError(f"no interior node within radius {radius}")
        return K

    def positions(self, points) -> list:
        if points is None:
            points = [[0.0] * (2 * self.domain.n)]
        out = []
        for p in points:
            if len(p) != 2 * self.domain.n:
                raise ConfigError(f"point {p} has the wrong dimension")
            out.append(self.mask.position_of_point(p))
        return out

    def node_record(self, pos: int) -> dict:
        return {"position": int(pos), "coords": self.mask.closure_points()[pos].tolist()}


def _envelope_of(setup: Setup, fn, **over):
    if isinstance(fn, dict) and fn.get("name") == "extremal" and "radius" in fn:
        K = setup.disk_nodes(fn["radius"])
        obs = setup.function(fn, "obstacle")
        env = relative_extremal(K, setup.mask, setup.cone, **setup.envelope_kwargs(**over))
        return obs, env
    obs = setup.function(fn, "obstacle")
    res = psh_envelope(obs, setup.cone, **setup.envelope_kwargs(**over))
    return obs, res.envelope


def run_envelope(setup: Setup, exp: dict, sink) -> dict:
    obs = setup.function(exp["obstacle"], "obstacle")
    res = psh_envelope(obs, setup.cone, **setup.envelope_kwargs())
    sink.grid("envelope", res.envelope)
    out = {"envelope": res.to_dict(), "points": []}
    for pos in setup.positions(exp.get("points")):
        rec = setup.node_record(pos) | {"value": float(res.envelope.values[pos])}
        if exp.get("duality", True):
            cert = edwards_gap(pos, obs, setup.cone, boundary=setup.boundary, envelope=res, solver=setup.lp_solver)
            rec |= {"lp_value": cert.dual, "gap": cert.gap, "reconstruction_error": cert.reconstruction_error}
        out["points"].append(rec)
    out["violation"] = cone_violation(res.envelope, setup.cone).to_dict()
    return out


def run_dirichlet(setup: Setup, exp: dict, sink) -> dict:
    f = setup.function(exp["boundary_data"], "f")
    kw = setup.envelope_kwargs(boundary="closure")
    res = dirichlet_psh_extension(f, setup.mask, setup.cone, **kw)
    sink.grid("dirichlet", res.envelope)
    pts = [setup.node_record(p) | {"value": float(res.envelope.values[p])} for p in setup.positions(exp.get("points"))]
    return {"dirichlet": res.to_dict(), "points": pts}


def run_jensen(setup: Setup, exp: dict, sink) -> dict:
    phi = setup.function(exp["phi"], "phi")
    support = "boundary" if exp.get("support") == "boundary" else None
    out = []
    for pos in setup.positions(exp["points"]):
        sol = jensen_lp(
            pos,
            phi,
            setup.cone,
            rows=exp.get("rows", "all"),
            support=support,
            solver=setup.lp_solver,
            window=exp.get("window"),
        )
        inner, outer = support_profile(sol.measure, setup.mask)
        out.append(
            setup.node_record(pos)
            | {
                "value": sol.value,
                "solver": sol.solver,
                "windowed": sol.windowed,
                "interior_mass": inner,
                "boundary_mass": outer,
                "measure": sol.measure.to_dict(),
            }
        )
    return {"points": out}


def run_probe(setup: Setup, exp: dict, sink) -> dict:
    probes = default_probes(
        setup.domain,
        setup.mask,
        seed=setup.seed,
        n_random=exp.get("n_random", 100),
        max_coordinate=exp.get("max_coordinate", 400),
    )
    return disk_probe(setup.domain, probes).to_dict()


def run_classify(setup: Setup, exp: dict, sink) -> dict:
    verdict = classify_domain(
        setup.domain,
        setup.lattice,
        cone_config=setup.cfg.get("cone"),
        seed=setup.seed,
        n_random=exp.get("n_random", 100),
        support_samples=exp.get("support_samples", 32),
        tol=exp.get("tol", setup.tol),
    )
    out = verdict.to_dict()
    expected = exp.get("expected", "any")
    out["expected"] = expected
    if expected == "PHyperconvex" and verdict.verdict == NOT_P:
        sink.witnessed = True
    return out


def run_glue(setup: Setup, exp: dict, sink) -> dict:
    cone = setup.cone
    # tight convergence keeps the exhaustion's own residual out of the glued violation
    psi = build_exhaustion(setup.mask, cone, **setup.envelope_kwargs(boundary="fixed", tol=min(setup.tol, 1e-12)))
    u = setup.function(exp["u"], "u")
    E = setup.disk_nodes(exp["E_radius"])
    ut, params = max_glue(u, psi, E, cone)
    sink.grid("glue", ut)
    rep = cone_violation(ut, cone)
    b = setup.mask.boundary_positions
    out = {
        "params": params.to_dict(),
        "violation": rep.to_dict(),
        "E_error": float(np.max(np.abs(ut.values[E] - (u.values[E] - params.M)))),
        "boundary_spread": float(np.ptp(ut.values[b])) if b.size else 0.0,
    }
    if "cutoff_data" in exp:
        f = setup.function(exp["cutoff_data"], "f")
        res = cutoff_extension(f, psi, cone, delta=exp.get("delta"))
        sink.grid("cutoff", res.F)
        out["cutoff"] = res.to_dict()
    return out


def _order_estimate(hs, values):
    """Observed order from successive differences of a scalar sequence."""
    diffs = [abs(a - b) for a, b in zip(values, values[1:])]
    orders = []
    for i in range(len(diffs) - 1):
        if diffs[i] > 0 and diffs[i + 1] > 0:
            orders.append(math.log(diffs[i] / diffs[i + 1]) / math.log(hs[i] / hs[i + 1]))
    return orders


def refine_study(cfg: dict, hs, exp: dict | None = None) -> dict:
    """Convergence table of an envelope or Dirichlet experiment over decreasing ``hs``.

    Each row holds ``h``, the values at the probe points, the duality gap at
    the first point (envelopes) or the boundary mismatch (Dirichlet data).
    """
    hs = [float(h) for h in hs]
    if len(hs) < 2:
        raise PreconditionError("a refinement study needs at least two grid spacings")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise PreconditionError("grid spacings must decrease")
    if exp is None:
        exp = next((e for e in cfg["experiments"] if e["kind"] in ("refine", "envelope", "dirichlet")), None)
        if exp is None:
            raise PreconditionError("no envelope or Dirichlet experiment to refine")
    rows = []
    for h in hs:
        setup = Setup(cfg, h)
        positions = setup.positions(exp.get("points"))
        row = {"h": h, "nodes": setup.mask.n_closure, "points": [setup.node_record(p)["coords"] for p in positions]}
        if "boundary_data" in exp:
            f = setup.function(exp["boundary_data"], "f")
            res = dirichlet_psh_extension(f, setup.mask, setup.cone, **setup.envelope_kwargs(boundary="closure"))
            row |= {"values": [float(res.envelope.values[p]) for p in positions]}
            row |= {"boundary_mismatch": res.boundary_mismatch, "gap": None}
        else:
            obs, env = _envelope_of(setup, exp["obstacle"])
            row |= {"values": [float(env.values[p]) for p in positions], "boundary_mismatch": None, "gap": None}
            if exp.get("duality", False):
                cert = edwards_gap(positions[0], obs, setup.cone, boundary=setup.boundary, solver=setup.lp_solver)
                row["gap"] = cert.gap
        rows.append(row)
    first = [r["values"][0] for r in rows]
    return {"table": rows, "observed_order": _order_estimate(hs, first)}


def run_refine(setup: Setup, exp: dict, sink) -> dict:
    return refine_study(setup.cfg, exp["h"], exp)


RUNNERS = {
    "envelope": run_envelope,
    "dirichlet": run_dirichlet,
    "jensen": run_jensen,
    "probe": run_probe,
    "classify": run_classify,
    "glue": run_glue,
    "refine": run_refine,
}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def results_hash(results) -> str:
    blob = json.dumps(_clean(results), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_grid_csv(path, u: GridFunction):
    """CSV with columns ``index, x1..x2n, class, value`` over closure nodes."""
    mask = u.mask
    pts = mask.closure_points()
    dim = pts.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", *[f"x{i + 1}" for i in range(dim)], "class", "value"])
        for node, p, c, v in zip(mask.closure_nodes, pts, mask.closure_classes, u.values):
            w.writerow([int(node), *[repr(float(x)) for x in p], int(c), repr(float(v))])


def write_plot_dat(path, u: GridFunction):
    """Gnuplot ``x y value`` blocks over the first complex coordinate.

    In two variables the slice is the lattice plane nearest ``z2 = 0``.
    """
    mask = u.mask
    pts = mask.closure_points()
    keep = np.ones(len(pts), dtype=bool)
    if pts.shape[1] == 4:
        lat = mask.lattice
        for axis in (2, 3):
            k = round((0.0 - lat.corner[axis]) / lat.h)
            level = lat.corner[axis] + min(max(k, 0), lat.shape[axis] - 1) * lat.h
            keep &= np.abs(pts[:, axis] - level) < 1e-9 * max(1.0, lat.h)
    sel = np.flatnonzero(keep)
    order = sel[np.lexsort((pts[sel, 1], pts[sel, 0]))]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# x y value\n")
        last = None
        for i in order:
            x, y = float(pts[i, 0]), float(pts[i, 1])
            if last is not None and x != last:
                fh.write("\n")
            fh.write(f"{x!r} {y!r} {float(u.values[i])!r}\n")
            last = x


class _Sink:
    """Collects output files for the current experiment."""

    def __init__(self, out: Path):
        self.out = out
        self.files: list[Path] = []
        self.prefix = ""
        self.witnessed = False

    def grid(self, name: str, u: GridFunction):
        stem = f"{self.prefix}{name}"
        csv_path = self.out / f"{stem}.csv"
        dat_path = self.out / f"{stem}.dat"
        write_grid_csv(csv_path, u)
        write_plot_dat(dat_path, u)
        self.files += [csv_path, dat_path]


def _write_report(out: Path, report: dict, files) -> Path:
    report["manifest"] = [
        {"path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size} for p in files if p.exists()
    ]
    path = out / "report.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def execute(cfg: dict, out_dir=None, jobs: int = 1) -> tuple[int, dict]:
    """Run every experiment of a validated config; returns ``(exit_code, report)``."""
    try:
        setup = Setup(cfg)
    except PluripotError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(out_dir or cfg.get("output", "pluripot_out"))
    out.mkdir(parents=True, exist_ok=True)
    sink = _Sink(out)
    report = {"schema_version": SCHEMA_VERSION, "config": copy.deepcopy(cfg), "jobs": jobs, "partial": False}
    results, timings = [], []
    code = EXIT_OK
    for i, exp in enumerate(cfg["experiments"]):
        sink.prefix = f"{i:02d}_{exp['kind']}_"
        start = time.perf_counter()
        try:
            res = RUNNERS[exp["kind"]](setup, exp, sink)
        except (NonConvergence, LpInfeasible, LpUnbounded, NoFeasibleC) as exc:
            log.error("experiment %d (%s) failed: %s", i, exp["kind"], exc)
            results.append({"kind": exp["kind"], "error": f"{type(exc).__name__}: {exc}"})
            report["partial"] = True
            code = EXIT_SOLVER
            break
        except PluripotError as exc:
            log.error("experiment %d (%s) failed: %s", i, exp["kind"], exc)
            results.append({"kind": exp["kind"], "error": f"{type(exc).__name__}: {exc}"})
            report["partial"] = True
            code = EXIT_CONFIG
            break
        timings.append({"kind": exp["kind"], "seconds": time.perf_counter() - start})
        results.append({"kind": exp["kind"], "label": exp.get("label", ""), "result": res})
    if code == EXIT_OK and sink.witnessed:
        code = EXIT_WITNESS
    report["results"] = _clean(results)
    report["results_sha256"] = results_hash(results)
    report["timings"] = timings
    report["exit_code"] = code
    _write_report(out, report, sink.files)
    return code, report


def _parse_h_list(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid spacing list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pluripot", description="Discrete pluripotential theory experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run every experiment in a config")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (overrides the config)")
    run.add_argument("--jobs", type=int, default=1, help="worker count; results do not depend on it")
    ref = sub.add_parser("refine", help="grid refinement study of the config's first envelope experiment")
    ref.add_argument("config")
    ref.add_argument("--h", type=_parse_h_list, required=True, help="comma-separated decreasing spacings")
    ref.add_argument("--out", default=None)
    ref.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        if args.command == "refine":
            if len(args.h) < 2 or any(b >= a for a, b in zip(args.h, args.h[1:])):
                raise ConfigError("--h needs at least two decreasing spacings")
            exp = next((e for e in cfg["experiments"] if e["kind"] in ("refine", "envelope", "dirichlet")), None)
            if exp is None:
                raise ConfigError("config has no envelope or Dirichlet experiment to refine")
            exp = {k: v for k, v in exp.items() if k not in ("h", "label")} | {"kind": "refine", "h": args.h}
            cfg = dict(cfg, experiments=[exp])
        code, report = execute(cfg, args.out, args.jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps({"exit_code": code, "results_sha256": report["results_sha256"], "partial": report["partial"]}))
    return code


if __name__ == "__main__":
    sys.exit(main())
