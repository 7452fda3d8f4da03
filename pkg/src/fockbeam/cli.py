"""Command-line front end: distributions, comparisons, ensemble statistics, checks."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotic import arcsine_envelope, branch_tag, envelope_sign_changes, BranchTag
from .errors import DomainError, EdgeError, NumericalError, RegimeError, ResourceLimitError
from .exact import BALANCED_XI, FockInput
from .series import Engine, distribution
from .statistics import (
    AveragingWindow,
    averaged_distribution_closed,
    averaged_distribution_direct,
    correlation_grid,
    direct_covariance,
)

log = logging.getLogger("fockbeam")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

THREADS_ENV = "FOCKBEAM_THREADS"

DIST_COLUMNS = ["m_a", "m_b", "x", "amplitude_sign", "amplitude_log_mag", "density", "engine"]

CAPTION_NOTE = (
    "Balanced input obeys the integer condition m_a/2 = N(1+x)/4: amplitudes vanish exactly on odd m_a. "
    "For N = 600 (N = 0 mod 4) that puts the zeros at Nx = +-2, +-6, +-10, ... and the non-zero points at "
    "Nx = 0, +-4, +-8, .... A zero set at Nx = 0, +-4, ... belongs to N = 2 mod 4, not to N = 600."
)


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    """Carries the verify report so it is still written before exiting non-zero."""


@dataclass
class RunConfig:
    """Everything a command needs; validated before any computation starts."""

    command: str
    n_total: int | None = None
    ny: int = 0
    xi: float = BALANCED_XI
    engine: str = "exact"
    engine_b: str = "eq17"
    n_bound: int | None = None
    weighting: str = "uniform"
    normalization: str = "eq8"
    format: str = "csv"
    output: str = "-"
    grid: str = "all"
    x_max: float = 0.8
    stride: int = 1
    method: str = "closed"
    n_max: int = 20
    random_xi: int = 0
    seed: int = 0
    tolerance: float = 1e-8
    output_dir: str | None = None
    ny_values: tuple = (0, 12, 24)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in vars(args).items() if k in names})

    def validate(self) -> "RunConfig":
        cmd = self.command
        if cmd in ("dist", "compare"):
            if self.n_total is None or self.n_total <= 0:
                raise UsageError("--n-total must be positive")
            if abs(self.ny) > self.n_total or (self.n_total + self.ny) % 2:
                raise UsageError(f"--ny must have the parity of N and |Ny| <= N "
                                 f"(N={self.n_total}, Ny={self.ny})")
            if not math.isfinite(self.xi):
                raise UsageError("--xi must be finite")
        if cmd in ("average", "correlate"):
            if self.n_total is None or self.n_total <= 0 or self.n_total % 2:
                raise UsageError("ensemble commands need an even positive --n-total")
            if self.n_bound is None or self.n_bound < 0 or self.n_bound % 2 or self.n_bound >= self.n_total:
                raise UsageError("--n-bound must be even, non-negative and smaller than N")
            if self.stride < 1:
                raise UsageError("--stride must be positive")
        if cmd == "compare" and not 0 < self.x_max <= 1:
            raise UsageError("--x-max must lie in (0, 1]")
        if cmd == "verify":
            if not 0 <= self.n_max <= 2000:
                raise UsageError("--n-max must lie in [0, 2000]")
            if self.random_xi < 0 or self.tolerance <= 0:
                raise UsageError("--random-xi must be >= 0 and --tolerance > 0")
        if cmd == "figure2":
            if self.n_total is None or self.n_total <= 0 or self.n_total % 2:
                raise UsageError("figure2 needs an even positive --n-total")
            for ny in self.ny_values:
                if ny < 0 or ny % 2 or (self.n_total + ny) % 2 or ny >= self.n_total:
                    raise UsageError(f"--ny-values entries must be even and in [0, N), got {ny}")
        return self


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def fmt(value) -> str:
    """Fixed, round-trippable text for one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def base_meta(command: str, n_total=None, ny=None, xi=None, engine=None, **extra) -> dict:
    meta = {"artifact_version": __version__, "command": command, "n_total": n_total,
            "ny": ny, "xi": xi, "engine": engine}
    meta.update(extra)
    return meta


def render(meta: dict, columns: list, rows: list, fmt_name: str, summary: dict | None = None) -> str:
    if fmt_name == "json":
        doc = {
            "meta": {k: _json_value(v) for k, v in meta.items()},
            "columns": columns,
            "rows": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows],
        }
        if summary is not None:
            doc["summary"] = {k: _json_value(v) for k, v in summary.items()}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}={fmt(value) if value is not None else ''}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if summary:
        for key, value in summary.items():
            buf.write(f"# summary.{key}={fmt(value)}\n")
    return buf.getvalue()


def emit(text: str, output: str) -> None:
    if output in ("-", ""):
        sys.stdout.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _input(cfg: RunConfig) -> FockInput:
    return FockInput.from_imbalance(cfg.n_total, cfg.ny, cfg.xi)


def _window(cfg: RunConfig) -> AveragingWindow:
    return AveragingWindow(cfg.n_bound, cfg.weighting)


def series_rows(series, grid: str = "all") -> list:
    rows = []
    for p in series.points:
        if grid == "nonzero" and p.amplitude.is_zero:
            continue
        rows.append([p.m_a, p.m_b, p.x, p.amplitude.sign, p.amplitude.log_mag, p.density, series.engine.value])
    return rows


def cmd_dist(cfg) -> str:
    inp = _input(cfg)
    engine = Engine.parse(cfg.engine)
    series = distribution(inp, engine)
    meta = base_meta("dist", inp.n_total, inp.ny, inp.xi, engine.value,
                     in_validity=series.in_validity, notes="; ".join(series.notes))
    summary = {"total_probability": series.total_probability()}
    if engine in (Engine.EXACT, Engine.IMBALANCED_EQ17) and inp.n_total % 2 == 0 and inp.is_balanced_splitter:
        summary["envelope_sign_changes"] = envelope_sign_changes(
            inp.n_total, [p.amplitude for p in series.points], BranchTag.INTEGER)
    return render(meta, DIST_COLUMNS, series_rows(series, cfg.grid), cfg.format, summary)


def compare_rows(a, b, x_max: float):
    rows = []
    inner_rel = inner_env = all_rel = all_env = 0.0
    for pa, pb in zip(a.points, b.points):
        da, db = pa.density, pb.density
        diff = abs(da - db) if math.isfinite(da) and math.isfinite(db) else math.inf
        if db != 0:
            rel = diff / abs(db)
        else:
            rel = 0.0 if da == 0 else math.inf
        env = diff / (2.0 * arcsine_envelope(pa.x)) if abs(pa.x) < 1 else math.nan
        rows.append([pa.m_a, pa.m_b, pa.x, da, db, diff, rel, env])
        if db != 0:
            all_rel = max(all_rel, rel)
            if abs(pa.x) <= x_max:
                inner_rel = max(inner_rel, rel)
        if not math.isnan(env):
            all_env = max(all_env, env)
            if abs(pa.x) <= x_max:
                inner_env = max(inner_env, env)
    summary = {
        "x_max": x_max,
        "max_rel_error_inner": inner_rel,
        "max_rel_error_all": all_rel,
        "max_envelope_rel_error_inner": inner_env,
        "max_envelope_rel_error_all": all_env,
    }
    return rows, summary


def cmd_compare(cfg) -> str:
    inp = _input(cfg)
    ea, eb = Engine.parse(cfg.engine), Engine.parse(cfg.engine_b)
    a, b = distribution(inp, ea), distribution(inp, eb)
    rows, summary = compare_rows(b, a, cfg.x_max)
    columns = ["m_a", "m_b", "x", f"density_{eb.value}", f"density_{ea.value}",
               "abs_error", "rel_error", "envelope_rel_error"]
    meta = base_meta("compare", inp.n_total, inp.ny, inp.xi, f"{eb.value} vs {ea.value}",
                     reference_engine=ea.value, in_validity=a.in_validity and b.in_validity)
    return render(meta, columns, rows, cfg.format, summary)


def cmd_average(cfg) -> str:
    window = _window(cfg)
    n_total = cfg.n_total
    avg = averaged_distribution_direct(n_total, window, cfg.normalization, workers=worker_count())
    rows = []
    for m, x, d in zip(avg.m_a, avg.x, avg.density):
        tag = branch_tag(n_total, int(m)).value
        if abs(x) < 1:
            closed = (averaged_distribution_closed(n_total, window.n_bound, int(m), cfg.normalization,
                                                   enforce_regime=False)
                      if window.weighting == "uniform" else math.nan)
            scale = 1.0 if cfg.normalization == "eq8" else 0.5
            arc = scale * arcsine_envelope(x)
        else:
            closed = arc = math.nan
        rows.append([int(m), float(x), tag, float(d), closed, arc,
                     float(d) - closed, float(d) - arc])
    columns = ["m_a", "x", "branch", "direct", "closed", "arcsine", "deviation_closed", "deviation_arcsine"]
    meta = base_meta("average", n_total, None, BALANCED_XI, "exact",
                     n_bound=window.n_bound, weighting=window.weighting,
                     normalization=cfg.normalization,
                     sub_poissonian=window.n_bound <= math.isqrt(n_total))
    return render(meta, columns, rows, cfg.format, {"total_mass": avg.total_mass()})


def cmd_correlate(cfg) -> str:
    window = _window(cfg)
    n_total = cfg.n_total
    ms = np.arange(1, n_total, cfg.stride)
    grid = correlation_grid(n_total, window.n_bound, ms, cfg.normalization, enforce_regime=False)
    direct = None
    if cfg.method == "both":
        direct = direct_covariance(n_total, window, cfg.normalization, ms, workers=worker_count())
    rows = []
    for i, m in enumerate(grid.m_a):
        for j, mp in enumerate(grid.m_a):
            row = [int(m), int(mp), grid.xs[i], grid.xs[j], int(grid.epsilon_mask[i, j]), grid.values[i, j]]
            if direct is not None:
                row.append(direct[i, j])
            rows.append(row)
    columns = ["m_a", "m_a_prime", "x", "x_prime", "epsilon", "closed"] + (["direct"] if direct is not None else [])
    meta = base_meta("correlate", n_total, None, BALANCED_XI, "closed" if direct is None else "closed+exact",
                     n_bound=window.n_bound, normalization=cfg.normalization, stride=cfg.stride)
    return render(meta, columns, rows, cfg.format)


def cmd_verify(cfg) -> str:
    from .oracle import oracle_check

    report = oracle_check(cfg.n_max, tolerance=cfg.tolerance)
    reports = [report]
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.random_xi):
        xi = float(rng.uniform(0.0, math.pi))
        n_total = int(rng.integers(1, cfg.n_max + 1)) if cfg.n_max else 0
        reports.append(oracle_check(n_total, xis=(xi,), tolerance=cfg.tolerance, n_values=[n_total]))
    worst = max(reports, key=lambda r: r.max_deviation)
    doc = {
        "meta": base_meta("verify", cfg.n_max, None, None, "oracle vs exact", seed=cfg.seed),
        "passed": all(r.passed for r in reports),
        "max_deviation": worst.max_deviation,
        "reports": [r.as_dict() for r in reports],
    }
    if not doc["passed"]:
        raise VerificationFailed(json.dumps(doc, indent=1) + "\n")
    return json.dumps(doc, indent=1) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_figure2(cfg) -> str:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_total = cfg.n_total
    files = {}
    checks = {}
    for ny in cfg.ny_values:
        inp = FockInput.from_imbalance(n_total, ny)
        for engine in (Engine.EXACT, Engine.IMBALANCED_EQ17):
            series = distribution(inp, engine)
            meta = base_meta("figure2", n_total, ny, inp.xi, engine.value)
            name = f"{engine.value}_ny{ny}.csv"
            (out / name).write_text(render(meta, DIST_COLUMNS, series_rows(series), "csv"))
            files[name] = _sha256(out / name)
            if engine is Engine.EXACT:
                amps = [p.amplitude for p in series.points]
                checks[f"ny{ny}"] = {
                    "envelope_sign_changes": envelope_sign_changes(n_total, amps, BranchTag.INTEGER),
                    "zero_points": sum(1 for a in amps if a.is_zero),
                    "total_probability": series.total_probability(),
                }
    interior = [m for m in range(1, n_total)]
    xs = [(2 * m - n_total) / n_total for m in interior]
    curves = {
        "upper_envelope.csv": [[m, x, 2.0 * arcsine_envelope(x)] for m, x in zip(interior, xs)],
        "arcsine.csv": [[m, x, arcsine_envelope(x)] for m, x in zip(interior, xs)],
    }
    for name, rows in curves.items():
        meta = base_meta("figure2", n_total, None, BALANCED_XI, name[:-4])
        (out / name).write_text(render(meta, ["m_a", "x", "density"], rows, "csv"))
        files[name] = _sha256(out / name)
    manifest = {
        "artifact_version": __version__,
        "command": "figure2",
        "n_total": n_total,
        "ny_values": list(cfg.ny_values),
        "xi": BALANCED_XI,
        "engines": [Engine.EXACT.value, Engine.IMBALANCED_EQ17.value],
        "reference_curves": {"upper_envelope.csv": "(N/2) x square of the balanced large-N amplitude = 2/(pi sqrt(1-x^2))",
                             "arcsine.csv": "1/(pi sqrt(1-x^2))"},
        "files": files,
        "checks": checks,
        "caption_parity_note": CAPTION_NOTE,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return json.dumps({"output_dir": str(out), "files": sorted(files) + ["manifest.json"]}) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockbeam", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_opts(p):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--output", "-o", default="-", help="output file, '-' for stdout")

    def input_opts(p):
        p.add_argument("--n-total", "-N", type=int, required=True)
        p.add_argument("--ny", type=int, default=0, help="signed input imbalance n_a - n_b")
        p.add_argument("--xi", type=float, default=BALANCED_XI, help="mixing angle (default pi/4)")

    def window_opts(p):
        p.add_argument("--n-total", "-N", type=int, required=True)
        p.add_argument("--n-bound", type=int, required=True)
        p.add_argument("--weighting", choices=["uniform", "gaussian_poissonian"], default="uniform")
        p.add_argument("--normalization", choices=["eq8", "eq20"], default="eq8")

    engines = [e.value for e in Engine] + ["balanced", "eq6", "eq7", "eq17", "eq18"]

    p = sub.add_parser("dist", help="output distribution of one engine")
    input_opts(p)
    p.add_argument("--engine", choices=engines, default="exact")
    p.add_argument("--grid", choices=["all", "nonzero"], default="all")
    output_opts(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("compare", help="two engines side by side")
    input_opts(p)
    p.add_argument("--engine-a", dest="engine", choices=engines, default="exact", help="reference engine")
    p.add_argument("--engine-b", choices=engines, default="eq17")
    p.add_argument("--x-max", type=float, default=0.8)
    output_opts(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("average", help="ensemble-averaged distribution")
    window_opts(p)
    output_opts(p)
    p.set_defaults(func=cmd_average)

    p = sub.add_parser("correlate", help="two-point correlation of the distribution")
    window_opts(p)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--method", choices=["closed", "both"], default="closed")
    output_opts(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("verify", help="exact engine vs matrix-exponential oracle")
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--random-xi", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-8)
    output_opts(p)
    p.set_defaults(func=cmd_verify, format="json")

    p = sub.add_parser("figure2", help="write the N=600 comparison data set")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--n-total", type=int, default=600)
    p.add_argument("--ny-values", type=int, nargs="+", default=[0, 12, 24])
    p.set_defaults(func=cmd_figure2, output="-")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_args(args).validate()
        workers = worker_count()
        log.info("running %s with %d worker(s)", cfg.command, workers)
        try:
            text = args.func(cfg)
        except VerificationFailed as failed:
            emit(str(failed), cfg.output)
            print("fockbeam: oracle check failed", file=sys.stderr)
            return EXIT_NUMERICAL
        emit(text, cfg.output)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fockbeam: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, RegimeError, ResourceLimitError) as exc:
        print(f"fockbeam: rejected: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (NumericalError, EdgeError) as exc:
        print(f"fockbeam: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"fockbeam: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
