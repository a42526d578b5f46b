"""Command-line front end: TOML-configured spectrum and wavefunction runs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure or
unsatisfiable request, 4 unusable output directory.  Set SMX_LOG to a
logging level name for progress output on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__
from .errors import ParameterError, SolverError
from .potential import make_builtin
from .smatrix import sweep_halfline
from .spectrum import ScanConfig, solve_spectrum
from .wavefunction import expectation, normalize, reconstruct, sample, std_dev_r

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_OUTPUT = 4

log = logging.getLogger("smx")


class ConfigError(Exception):
    """Configuration problem with a human-readable location."""


@dataclass
class RunConfig:
    model: object
    scan: ScanConfig
    states: list
    sample_points: int
    sample_min: float
    sample_max: float
    output_dir: str
    fmt: str
    echo: dict


def _fmt17(x):
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


class _Locator:
    """Best-effort line numbers for keys in the raw TOML text."""

    def __init__(self, text, origin):
        self.lines = text.splitlines()
        self.origin = origin

    def where(self, key):
        bare = key.split(".")[-1]
        for i, line in enumerate(self.lines, start=1):
            stripped = line.split("#", 1)[0].strip()
            if stripped.startswith(bare) and "=" in stripped:
                lhs = stripped.split("=", 1)[0].strip()
                if lhs == bare:
                    return f"{self.origin}:{i}"
        return self.origin

    def fail(self, key, message):
        raise ConfigError(f"{self.where(key)}: [{key}] {message}")


def _take(table, key, loc, section, default=None, required=False, kind=None):
    if key not in table:
        if required:
            raise ConfigError(f"{loc.origin}: missing required key '{key}' in [{section}]")
        return default
    value = table.pop(key)
    if kind is not None and not isinstance(value, kind):
        loc.fail(f"{section}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _reject_unknown(table, loc, section):
    if table:
        key = sorted(table)[0]
        loc.fail(f"{section}.{key}", "unknown key")


def load_config(path):
    """Parse and validate a run configuration file."""
    try:
        with open(path, "rb") as fh:
            raw_bytes = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    loc = _Locator(raw_bytes.decode("utf-8", errors="replace"), str(path))
    try:
        data = tomllib.loads(raw_bytes.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML syntax error: {exc}") from exc
    return load_config_dict(data, origin=str(path), locator=loc)


def load_config_dict(data, origin="<config>", locator=None):
    """Validate an already-parsed configuration mapping."""
    echo = json.loads(json.dumps(data))
    loc = locator or _Locator("", origin)
    for section in ("potential", "solver", "scan"):
        if section not in data:
            raise ConfigError(f"{origin}: missing required section [{section}]")
        if not isinstance(data[section], dict):
            raise ConfigError(f"{origin}: [{section}] must be a table")

    pot = dict(data["potential"])
    name = _take(pot, "name", loc, "potential", required=True, kind=str)
    try:
        model = make_builtin(name, **pot)
    except ParameterError as exc:
        raise ConfigError(f"{loc.where('potential.name')}: {exc}") from exc

    scan_tbl = dict(data["scan"])
    unit = _take(scan_tbl, "energy_unit", loc, "scan", default="natural", kind=str)
    if unit not in ("natural", "raw"):
        loc.fail("scan.energy_unit", "must be 'natural' or 'raw'")
    scale = model.unit_scale if unit == "natural" else 1.0

    solver = dict(data["solver"])
    num = (int, float)
    kwargs = dict(
        e_min=float(_take(scan_tbl, "e_min", loc, "scan", required=True, kind=num)) * scale,
        e_max=float(_take(scan_tbl, "e_max", loc, "scan", required=True, kind=num)) * scale,
        n_grid=_take(scan_tbl, "n_grid", loc, "scan", required=True, kind=int),
        refine_tol=float(_take(scan_tbl, "refine_tol", loc, "scan", default=1e-14, kind=num)),
        max_iter=_take(scan_tbl, "max_iter", loc, "scan", default=60, kind=int),
        symmetric=_take(scan_tbl, "symmetric", loc, "scan", default=None, kind=bool),
        threads=_take(scan_tbl, "threads", loc, "scan", default=1, kind=int),
        order_m=_take(solver, "m", loc, "solver", required=True, kind=int),
        lambda_order=_take(solver, "lambda", loc, "solver", default=None, kind=int),
        eps_trunc=float(_take(solver, "eps_trunc", loc, "solver", default=1e-40, kind=num)),
        eps_tilde=float(_take(solver, "eps_tilde", loc, "solver", default=1e-12, kind=num)),
        max_slices=_take(solver, "max_slices", loc, "solver", default=10**6, kind=int),
    )
    x0 = _take(solver, "x0", loc, "solver", default=None, kind=num)
    v0 = _take(solver, "v0", loc, "solver", required=True, kind=num)
    delta = _take(solver, "delta", loc, "solver", default=None, kind=num)
    ratio = _take(solver, "a", loc, "solver", default=None, kind=num)
    kwargs["x0"] = None if x0 is None else float(x0)
    kwargs["v0"] = float(v0) * scale
    kwargs["delta"] = None if delta is None else float(delta)
    kwargs["ratio"] = None if ratio is None else float(ratio)
    _reject_unknown(solver, loc, "solver")
    _reject_unknown(scan_tbl, loc, "scan")

    out = dict(data.get("output", {}))
    states = _take(out, "states", loc, "output", default=None, kind=list)
    if states is not None:
        for s in states:
            if not isinstance(s, int) or s < 0:
                loc.fail("output.states", "state indices must be non-negative integers")
    run = RunConfig(
        model=model,
        scan=ScanConfig(**kwargs),
        states=states,
        sample_points=_take(out, "sample_points", loc, "output", default=1201, kind=int),
        sample_min=_take(out, "sample_min", loc, "output", default=None, kind=num),
        sample_max=_take(out, "sample_max", loc, "output", default=None, kind=num),
        output_dir=_take(out, "dir", loc, "output", default=".", kind=str),
        fmt=_take(out, "format", loc, "output", default="both", kind=str),
        echo=echo,
    )
    if run.fmt not in ("csv", "json", "both"):
        loc.fail("output.format", "must be 'csv', 'json' or 'both'")
    if run.sample_points < 2:
        loc.fail("output.sample_points", "need at least 2 sample points")
    _reject_unknown(out, loc, "output")
    try:
        run.scan.resolve(model)
    except ParameterError as exc:
        raise ConfigError(f"{origin}: {exc}") from exc
    return run


def _prepare_output_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".smx-write-probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.unlink(probe)
    except OSError as exc:
        raise PermissionError(f"output directory {path!r} is not writable: {exc}") from exc


def _root_rows(model, roots):
    rows = []
    for i, r in enumerate(roots):
        rows.append(
            {
                "n": i,
                f"energy_{model.unit_name}": r.energy / model.unit_scale,
                "energy_raw": r.energy,
                "re_f": r.re_f,
                "parity": r.parity,
                "iterations": r.iterations,
                "residual": r.residual,
            }
        )
    return rows


def _write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    _fmt17(row[c]) if isinstance(row[c], float) else row[c]
                    for c in columns
                ]
            )


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_spectrum(config_path, output_dir=None, fmt=None, threads=None):
    """Solve the configured spectrum and write spectrum.csv / spectrum.json."""
    try:
        run = _load_with_overrides(config_path, output_dir, fmt, threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _prepare_output_dir(run.output_dir)
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT

    failures = []
    t0 = time.perf_counter()
    try:
        roots = solve_spectrum(run.model, run.scan, collect_failures=failures)
    except SolverError as exc:
        print(f"error: spectrum solve failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - t0

    rows = _root_rows(run.model, roots)
    columns = [
        "n", f"energy_{run.model.unit_name}", "energy_raw",
        "re_f", "parity", "iterations", "residual",
    ]
    if run.fmt in ("csv", "both"):
        _write_csv(os.path.join(run.output_dir, "spectrum.csv"), rows, columns)
    if run.fmt in ("json", "both"):
        payload = {
            "config": run.echo,
            "energy_unit": run.model.unit_name,
            "energy_unit_scale": run.model.unit_scale,
            "roots": rows,
            "failures": [str(f) for f in failures],
            "timings": {"solve_seconds": elapsed},
            "version": __version__,
        }
        _write_json(os.path.join(run.output_dir, "spectrum.json"), payload)
    log.info("spectrum: %d roots in %.2f s", len(roots), elapsed)
    if failures:
        for f in failures:
            print(f"warning: {f}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def run_wavefunctions(config_path, output_dir=None, fmt=None, threads=None):
    """Reconstruct configured states; write psi_<n>.csv and moments.csv."""
    try:
        run = _load_with_overrides(config_path, output_dir, fmt, threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _prepare_output_dir(run.output_dir)
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT

    failures = []
    try:
        roots = solve_spectrum(run.model, run.scan, collect_failures=failures)
    except SolverError as exc:
        print(f"error: spectrum solve failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    wanted = run.states if run.states is not None else list(range(len(roots)))
    missing = [s for s in wanted if s >= len(roots)]

    cfg = run.scan.resolve(run.model)
    moment_rows = []
    status = EXIT_OK
    for i, root in enumerate(roots):
        try:
            phase_r, trace = sweep_halfline(
                run.model, root.energy, cfg.x0, "R", cfg.slicing(), cfg.eps_trunc,
                v0=cfg.v0, order_m=cfg.order_m, lambda_order=cfg.lambda_order,
                keep_trace=True, max_slices=cfg.max_slices,
            )
            raw_psi = reconstruct(run.model, cfg, root, trace, phase_r)
            psi = normalize(raw_psi)
        except SolverError as exc:
            print(f"warning: state {i}: reconstruction failed: {exc}", file=sys.stderr)
            status = EXIT_NUMERIC
            continue
        moment_rows.append(
            {
                "n": i,
                "norm": raw_psi.norm,
                "r_mean": expectation(psi, 1),
                "r2_mean": expectation(psi, 2),
                "r_std": std_dev_r(psi),
            }
        )
        if i in wanted:
            lo, hi = psi.span
            lo = run.sample_min if run.sample_min is not None else lo
            hi = run.sample_max if run.sample_max is not None else hi
            xs = np.linspace(lo, hi, run.sample_points)
            vals = sample(psi, xs)
            _write_csv(
                os.path.join(run.output_dir, f"psi_{i}.csv"),
                [{"x": float(x), "psi": float(v)} for x, v in zip(xs, vals)],
                ["x", "psi"],
            )
    _write_csv(
        os.path.join(run.output_dir, "moments.csv"),
        moment_rows,
        ["n", "norm", "r_mean", "r2_mean", "r_std"],
    )
    for f in failures:
        print(f"warning: {f}", file=sys.stderr)
        status = EXIT_NUMERIC
    if missing:
        print(
            f"error: requested state(s) {missing} but only {len(roots)} found",
            file=sys.stderr,
        )
        status = EXIT_NUMERIC
    return status


def _load_with_overrides(config_path, output_dir, fmt, threads):
    run = load_config(config_path)
    if output_dir is not None:
        run.output_dir = output_dir
    if fmt is not None:
        run.fmt = fmt
    if threads is not None and threads != run.scan.threads:
        from dataclasses import replace

        run.scan = replace(run.scan, threads=threads)
    return run


def run_selfcheck(output_dir=None):
    """Fast invariant suite; returns 0 iff every check passes."""
    from . import selfcheck

    if output_dir is not None:
        try:
            _prepare_output_dir(output_dir)
        except PermissionError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_OUTPUT
    ok = selfcheck.run(print)
    return EXIT_OK if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="smx",
        description="Bound states of 1D potential wells via scattering-matrix composition",
    )
    parser.add_argument("--version", action="version", version=f"smx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for the energy scan (default: config, then 1)")
    common.add_argument("--output-dir", default=None, help="directory for result files")
    common.add_argument("--format", choices=("csv", "json", "both"), default=None)

    p_spec = sub.add_parser("spectrum", parents=[common],
                            help="solve bound-state energies")
    p_spec.add_argument("config")
    p_wave = sub.add_parser("wavefn", parents=[common],
                            help="solve and reconstruct wavefunctions")
    p_wave.add_argument("config")
    p_check = sub.add_parser("selfcheck", help="run the fast invariant suite")
    p_check.add_argument("--output-dir", default=None)

    args = parser.parse_args(argv)
    level = os.environ.get("SMX_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        stream=sys.stderr, format="%(name)s %(levelname)s %(message)s")

    if args.command == "spectrum":
        return run_spectrum(args.config, args.output_dir, args.format, args.threads)
    if args.command == "wavefn":
        return run_wavefunctions(args.config, args.output_dir, args.format, args.threads)
    if args.command == "selfcheck":
        return run_selfcheck(args.output_dir)
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
