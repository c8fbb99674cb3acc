"""Command-line driver: ``cylspec <heat|poisson|ns|bench|transform> [options]``.

Every run writes its artifacts into ``--out`` (default ``cylspec_out``):
FieldFile snapshots, a ``manifest.json`` with parameters, residuals and
timings, and for ``bench`` a ``bench.csv``.  Exit status is 0 on success, 2
for configuration errors and 3 for numerical failures.  A diagnostic
manifest is still written on a numerical failure.

The ``CYLSPEC_THREADS`` environment variable caps BLAS and FFT worker
threads.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from threadpoolctl import threadpool_limits

from .baseline import FDGrid, collocation_heat_run, fd_heat_run
from .errors import AdiConvergenceError, ConfigError, NumericalError
from .fieldio import FieldFormatError, read_field, write_field
from .grid import CoeffTensor, GridField, GridSpec, grid_mesh
from .manufactured import CartesianPolynomial, heat_exact, heat_forcing, heat_problem, poisson_exact, poisson_rhs
from .ptns import NSState, PTScalars, ns_diagnostics, ns_step
from .solvers import solve_poisson_3d
from .timestep import HeatConfig, heat_run
from .transform import analyze, synthesize

__all__ = ["RunConfig", "load_config", "run", "main", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

PROBLEMS = ("heat", "poisson", "ns", "bench", "transform")
BENCH_METHODS = ("spectral", "collocation", "finite_difference")


@dataclass
class RunConfig:
    problem: str
    m: int = 16
    n: int = 16
    p: int = 16
    alpha: float = 1.0
    reynolds: float = 100.0
    h: float = 0.01
    steps: int = 10
    bdf_order: int = 4
    adi_tol: float = 1e-12
    output_every: int = 1
    bc: str = "dirichlet_homogeneous"
    output_path: str = "cylspec_out"
    seed: int = 0
    input_path: str | None = None
    bench_sizes: tuple = (7, 11, 15, 19)
    bench_methods: tuple = BENCH_METHODS
    fd_sizes: tuple = (61, 81, 101, 121)
    fd_steps: int = 6

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        for name in ("m", "n", "p", "bdf_order", "output_every", "fd_steps"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not isinstance(self.steps, int) or self.steps < 0:
            raise ConfigError("steps must be a non-negative integer")
        if not self.h > 0 or not math.isfinite(self.h):
            raise ConfigError("h must be positive")
        if not 0 < self.adi_tol <= 1e-2:
            raise ConfigError("adi_tol must lie in (0, 1e-2]")
        if self.bdf_order > 4:
            raise ConfigError("bdf_order must be 1..4")
        if self.alpha < 0 or self.reynolds <= 0:
            raise ConfigError("alpha must be non-negative and reynolds positive")
        if self.bc != "dirichlet_homogeneous":
            raise ConfigError("only bc = 'dirichlet_homogeneous' is available from the command line")
        unknown = set(self.bench_methods) - set(BENCH_METHODS)
        if unknown:
            raise ConfigError(f"unknown bench methods {sorted(unknown)}")
        if self.problem != "bench":
            try:
                GridSpec(self.m, self.n, self.p)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if self.problem == "transform" and not self.input_path:
            raise ConfigError("transform needs --input")
        if self.problem == "ns" and self.p % 2:
            raise ConfigError("ns needs an even p")

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.m, self.n, self.p)


_TUPLE_KEYS = ("bench_sizes", "bench_methods", "fd_sizes")


def load_config(mapping: dict) -> RunConfig:
    """Build a :class:`RunConfig` from a flat mapping (a parsed JSON file plus overrides)."""
    names = {f.name for f in fields(RunConfig)}
    unknown = set(mapping) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "problem" not in mapping:
        raise ConfigError("config needs a 'problem'")
    data = dict(mapping)
    for key in _TUPLE_KEYS:
        if key in data:
            data[key] = tuple(data[key])
    try:
        cfg = RunConfig(**data)
        for f in fields(RunConfig):
            v = getattr(cfg, f.name)
            if f.type in ("float",) and isinstance(v, int) and not isinstance(v, bool):
                setattr(cfg, f.name, float(v))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# manifest output


def _format_json(obj) -> str:
    """JSON text with floats at 17 significant digits (non-finite floats become null)."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_format_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_format_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        if not any(ch in text for ch in ".en"):
            text += ".0"
        return text
    return json.dumps(str(obj))


def write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(_format_json(manifest) + "\n")


def _relative_max(err: np.ndarray, ref: np.ndarray) -> float:
    return float(np.max(np.abs(err)) / max(np.max(np.abs(ref)), 1e-300))


# --------------------------------------------------------------------------
# pipelines


def _run_heat(cfg: RunConfig, out: Path, manifest: dict) -> None:
    spec = cfg.spec
    initial, forcing, exact = heat_problem(spec, cfg.alpha)
    hc = HeatConfig(alpha=cfg.alpha, h=cfg.h, order=cfg.bdf_order, forcing_mode="exact", tol=cfg.adi_tol)
    t0 = time.perf_counter()
    traj = heat_run(hc, initial, forcing, steps=cfg.steps, output_every=cfg.output_every)
    manifest["timings"]["solve_seconds"] = time.perf_counter() - t0
    snaps = []
    for i, (t, f) in enumerate(zip(traj.times, traj.fields)):
        name = f"heat_{i:05d}.ccf"
        write_field(out / name, f)
        snaps.append({"file": name, "time": t, "max_rel_error": _relative_max(f.values - exact(t), exact(t))})
    manifest["snapshots"] = snaps
    manifest["results"] = {"final_time": traj.times[-1], "max_rel_error": snaps[-1]["max_rel_error"]}


def _run_poisson(cfg: RunConfig, out: Path, manifest: dict) -> None:
    spec = cfg.spec
    R, Z, T = grid_mesh(spec)
    rhs = analyze(GridField(spec, poisson_rhs(R, Z, T)))
    t0 = time.perf_counter()
    u = solve_poisson_3d(rhs, tol=cfg.adi_tol)
    manifest["timings"]["solve_seconds"] = time.perf_counter() - t0
    values = synthesize(u, real=True)
    write_field(out / "poisson_solution.ccf", values)
    exact = poisson_exact(R, Z, T)
    manifest["snapshots"] = [{"file": "poisson_solution.ccf"}]
    manifest["results"] = {"max_abs_error": float(np.max(np.abs(values.values - exact))),
                           "max_rel_error": _relative_max(values.values - exact, exact)}


def _ns_initial(spec: GridSpec, seed: int) -> PTScalars:
    """Seeded smooth vorticity scalars that vanish to second order on the wall."""
    rng = np.random.default_rng(seed)
    lam = CartesianPolynomial.random(2, rng, "rrzz").coeffs_on(spec)
    gam = CartesianPolynomial.random(2, rng, "rrzz").coeffs_on(spec)
    return PTScalars(lam, gam)


def _run_ns(cfg: RunConfig, out: Path, manifest: dict) -> None:
    spec = cfg.spec
    state = NSState.initial(_ns_initial(spec, cfg.seed), cfg.reynolds, cfg.h, order=cfg.bdf_order,
                            tol=cfg.adi_tol)
    snaps, diags = [], []

    def record(s: NSState):
        i = s.steps
        names = (f"ns_lambda_{i:05d}.ccf", f"ns_gamma_{i:05d}.ccf")
        write_field(out / names[0], s.current.lam)
        write_field(out / names[1], s.current.gam)
        snaps.append({"files": list(names), "time": s.time})
        diags.append(ns_diagnostics(s))

    t0 = time.perf_counter()
    record(state)
    try:
        for i in range(1, cfg.steps + 1):
            state = ns_step(state)
            if i % cfg.output_every == 0 or i == cfg.steps:
                record(state)
    finally:
        manifest["snapshots"] = snaps
        manifest["diagnostics"] = diags
        manifest["timings"]["solve_seconds"] = time.perf_counter() - t0
    manifest["results"] = {"final_time": state.time, **{k: v for k, v in diags[-1].items() if k != "time"}}


def _heat_callables(alpha: float):
    def initial(R, Z, T):
        return heat_exact(R, Z, T, 0.0)

    def forcing(R, Z, T, t):
        return heat_forcing(R, Z, T, t, alpha)

    return initial, forcing


def bench_rows(cfg: RunConfig) -> list[dict]:
    """One row per requested method and size; failures carry ``max_error = None``."""
    rows = []
    t_end = cfg.steps * cfg.h
    initial, forcing = _heat_callables(cfg.alpha)
    for method in cfg.bench_methods:
        sizes = cfg.fd_sizes if method == "finite_difference" else cfg.bench_sizes
        for size in sizes:
            row = {"method": method, "N": int(size) ** 3, "max_error": None, "seconds": None, "note": ""}
            try:
                t0 = time.perf_counter()
                if method == "spectral":
                    spec = GridSpec(size, size, size)
                    init, g, exact = heat_problem(spec, cfg.alpha)
                    hc = HeatConfig(alpha=cfg.alpha, h=cfg.h, order=cfg.bdf_order, forcing_mode="exact",
                                    tol=cfg.adi_tol)
                    traj = heat_run(hc, init, g, steps=cfg.steps, output_every=max(cfg.steps, 1))
                    final, ref = traj.fields[-1].values, exact(traj.times[-1])
                elif method == "collocation":
                    spec = GridSpec(size, size, size)
                    traj = collocation_heat_run(spec, cfg.alpha, cfg.h, initial, forcing, steps=cfg.steps,
                                                order=cfg.bdf_order, output_every=max(cfg.steps, 1))
                    R, Z, T = grid_mesh(spec)
                    final, ref = traj.fields[-1], heat_exact(R, Z, T, traj.times[-1])
                else:
                    grid = FDGrid(size, size, size)
                    h_fd = t_end / cfg.fd_steps if t_end > 0 else cfg.h
                    traj = fd_heat_run(grid, cfg.alpha, h_fd, initial, forcing, steps=cfg.fd_steps,
                                       output_every=cfg.fd_steps)
                    R, Z, T = grid.mesh()
                    final, ref = traj.fields[-1], heat_exact(R, Z, T, traj.times[-1])
                row["seconds"] = time.perf_counter() - t0
                row["max_error"] = _relative_max(final - ref, ref)
            except (NumericalError, MemoryError, ValueError) as exc:
                row["note"] = f"FAILED: {exc}"
            rows.append(row)
    return rows


def write_bench_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "N", "max_error", "seconds"])
        for row in rows:
            if row["max_error"] is None:
                writer.writerow([row["method"], row["N"], "FAILED", "FAILED"])
            else:
                writer.writerow([row["method"], row["N"], format(row["max_error"], ".17g"),
                                 format(row["seconds"], ".17g")])


def _run_bench(cfg: RunConfig, out: Path, manifest: dict) -> None:
    rows = bench_rows(cfg)
    write_bench_csv(out / "bench.csv", rows)
    manifest["results"] = {"rows": [{k: v for k, v in r.items() if k != "seconds"} for r in rows]}
    manifest["timings"]["bench_seconds"] = {f"{r['method']}:{r['N']}": r["seconds"] for r in rows}


def _run_transform(cfg: RunConfig, out: Path, manifest: dict) -> None:
    try:
        data = read_field(cfg.input_path)
    except FileNotFoundError as exc:
        raise ConfigError(f"input file not found: {cfg.input_path}") from exc
    t0 = time.perf_counter()
    if isinstance(data, CoeffTensor):
        result = synthesize(data, real=True)
        direction = "synthesize"
    else:
        result = analyze(data)
        direction = "analyze"
    manifest["timings"]["transform_seconds"] = time.perf_counter() - t0
    write_field(out / "transformed.ccf", result)
    spec = data.spec
    manifest["parameters"].update({"m": spec.m, "n": spec.n, "p": spec.p})
    manifest["snapshots"] = [{"file": "transformed.ccf"}]
    manifest["results"] = {"direction": direction}


_PIPELINES = {
    "heat": _run_heat,
    "poisson": _run_poisson,
    "ns": _run_ns,
    "bench": _run_bench,
    "transform": _run_transform,
}


@contextlib.contextmanager
def _thread_cap():
    raw = os.environ.get("CYLSPEC_THREADS")
    if not raw:
        yield None
        return
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError as exc:
        raise ConfigError(f"CYLSPEC_THREADS must be a positive integer, got {raw!r}") from exc
    with threadpool_limits(limits=n), sfft.set_workers(n):
        yield n


def run(cfg: RunConfig) -> int:
    """Execute one configured run and return its exit status."""
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"status": "running", "problem": cfg.problem, "parameters": asdict(cfg), "timings": {}}
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        with _thread_cap() as threads:
            manifest["parameters"]["threads"] = threads
            _PIPELINES[cfg.problem](cfg, out, manifest)
        manifest["status"] = "ok"
    except (ConfigError, FieldFormatError) as exc:
        manifest["status"] = "config_error"
        manifest["error"] = str(exc)
        code = EXIT_CONFIG
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        manifest["status"] = "numerical_failure"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        if isinstance(exc, AdiConvergenceError):
            manifest["adi_history"] = list(exc.history)
        code = EXIT_NUMERICAL
    manifest["timings"]["total_seconds"] = time.perf_counter() - t0
    write_manifest(out / "manifest.json", manifest)
    return code


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cylspec", description="Spectral heat, Poisson and Navier-Stokes "
                                 "solvers in a closed cylinder.")
    ap.add_argument("problem", choices=PROBLEMS)
    ap.add_argument("--config", help="JSON file with a flat set of RunConfig keys")
    ap.add_argument("--m", type=int)
    ap.add_argument("--n", type=int)
    ap.add_argument("--p", type=int)
    ap.add_argument("--steps", type=int)
    ap.add_argument("--h", type=float)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--re", dest="reynolds", type=float)
    ap.add_argument("--bdf", dest="bdf_order", type=int)
    ap.add_argument("--tol", dest="adi_tol", type=float)
    ap.add_argument("--output-every", dest="output_every", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--input", dest="input_path", help="FieldFile for the transform problem")
    ap.add_argument("--sizes", dest="bench_sizes", type=int, nargs="+", help="spectral/collocation sizes")
    ap.add_argument("--fd-sizes", dest="fd_sizes", type=int, nargs="+")
    ap.add_argument("--methods", dest="bench_methods", nargs="+", choices=BENCH_METHODS)
    ap.add_argument("--out", dest="output_path")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    mapping: dict = {}
    if args.config:
        try:
            mapping = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cylspec: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if not isinstance(mapping, dict):
            print("cylspec: config must be a JSON object", file=sys.stderr)
            return EXIT_CONFIG
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            mapping[key] = value
    try:
        cfg = load_config(mapping)
    except ConfigError as exc:
        print(f"cylspec: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = run(cfg)
    if code != EXIT_OK:
        print(f"cylspec: run failed (exit {code}); see {Path(cfg.output_path) / 'manifest.json'}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
