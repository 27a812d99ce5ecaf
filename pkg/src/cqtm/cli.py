"""Command line entry point: ``cqtm <subcommand> [options]``.

Settings resolve as built-in defaults < ``--config`` JSON file < flags.
Exit codes: 0 success, 1 verification failure, 2 usage error, 3 resource error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from cqtm import output
from cqtm.barrier import ModelParams, dispersion, single_barrier_coeffs
from cqtm.errors import DomainError, NonterminationError, ResourceError
from cqtm.qtm_sim import counter_values, read1_trace, read1_trace_matches, run_counting
from cqtm.seqgen import barrier_census, expand_sequence, potential_profile
from cqtm.spectra import band_intervals, momentum_grid, sweep
from cqtm.svg import EmptyDocumentError, render_svg
from cqtm.verify import oracle_equivalence
from cqtm.xmatrix import get_backend

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

# reference momentum windows, used when --kmin/--kmax are omitted
DEFAULT_WINDOWS = {0.999: (0.0223, 0.10), 0.99: (0.069, 0.22), 0.9: (0.18, 0.52)}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    n: int | None = None
    m: int | None = None
    gamma: float | None = None
    kmin: float | None = None
    kmax: float | None = None
    points: int | None = None
    refine_tol: float | None = None
    backend: str = "fast"
    digits: int = 50
    format: str | None = None
    emit: str | None = None
    max_steps: int | None = None
    samples: int | None = None
    seed: int | None = None
    input: str | None = None
    intervals: str | None = None
    title: str | None = None
    out: str | None = None
    plot: bool = False
    no_timestamp: bool = False

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.gamma, self.n or 0)


DEFAULTS = {
    "sequence": {"n": 3, "format": "terms"},
    "simulate": {"n": 3, "emit": "summary"},
    "barrier": {"m": 10, "gamma": 0.999, "kmin": 0.001, "kmax": 0.5, "points": 1000},
    "sweep": {"n": 10, "gamma": 0.999, "points": 4000, "format": "csv"},
    "bands": {"n": 10, "gamma": 0.999, "points": 4000, "refine_tol": 1e-9, "format": "json"},
    "verify": {"n": 10, "samples": 200, "seed": 0},
    "plot": {},
}


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="cqtm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", default=S, help="JSON file of option values")
        p.add_argument("--out", default=S, help="output path (default stdout)")
        p.add_argument("--no-timestamp", action="store_true", default=S)

    def model(p, n=True):
        if n:
            p.add_argument("--n", type=int, default=S, help="sequence level N")
        p.add_argument("--gamma", type=float, default=S)

    def grid(p):
        p.add_argument("--kmin", type=float, default=S)
        p.add_argument("--kmax", type=float, default=S)
        p.add_argument("--points", type=int, default=S)

    def precision(p):
        p.add_argument("--backend", choices=["fast", "precise"], default=S)
        p.add_argument("--digits", type=int, default=S)

    p = sub.add_parser("sequence", help="hierarchical sequence R_N")
    common(p)
    model(p)
    p.add_argument("--format", choices=["terms", "bits", "census", "profile"], default=S)

    p = sub.add_parser("simulate", help="run the counting machine")
    common(p)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--max-steps", type=int, default=S)
    p.add_argument("--emit", choices=["trace", "tapes", "summary"], default=S)

    p = sub.add_parser("barrier", help="single-barrier F and B")
    common(p)
    p.add_argument("--m", type=int, default=S)
    model(p, n=False)
    grid(p)

    p = sub.add_parser("sweep", help="log10 LR and band flags over a k grid")
    common(p)
    model(p)
    grid(p)
    precision(p)
    p.add_argument("--format", choices=["csv", "json"], default=S)
    p.add_argument("--plot", action="store_true", default=S, help="also write an SVG next to --out")

    p = sub.add_parser("bands", help="band/gap intervals with bisected edges")
    common(p)
    model(p)
    grid(p)
    precision(p)
    p.add_argument("--refine-tol", type=float, default=S)
    p.add_argument("--format", choices=["csv", "json"], default=S)
    p.add_argument("--plot", action="store_true", default=S)

    p = sub.add_parser("verify", help="recursion vs brute-force oracle suite")
    common(p)
    p.add_argument("--n", type=int, default=S, help="largest level checked")
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)

    p = sub.add_parser("plot", help="render a sweep CSV and/or bands JSON as SVG")
    common(p)
    p.add_argument("--input", default=S, help="sweep CSV")
    p.add_argument("--intervals", default=S, help="bands JSON")
    p.add_argument("--title", default=S)
    return parser


def parse_config(argv: list[str] | None = None, config_file: str | None = None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    config_file = ns.pop("config", config_file)
    merged = {"subcommand": sub, **DEFAULTS[sub]}
    allowed = {f.name for f in fields(RunConfig)} - {"subcommand"}
    if config_file:
        try:
            data = json.loads(Path(config_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_file}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(data) - allowed
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(data)
    merged.update(ns)
    cfg = RunConfig(**merged)
    if cfg.gamma is not None and not 0.0 < cfg.gamma <= 1.0:
        raise UsageError(f"--gamma must lie in (0, 1], got {cfg.gamma}")
    _fill_window(cfg)
    _validate(cfg)
    return cfg


def _fill_window(cfg: RunConfig) -> None:
    if cfg.subcommand not in ("sweep", "bands"):
        return
    window = next((w for g, w in DEFAULT_WINDOWS.items() if cfg.gamma is not None and abs(g - cfg.gamma) < 1e-12), None)
    if window:
        cfg.kmin = window[0] if cfg.kmin is None else cfg.kmin
        cfg.kmax = window[1] if cfg.kmax is None else cfg.kmax
    if cfg.kmin is None or cfg.kmax is None:
        raise UsageError("--kmin and --kmax are required for this gamma")


def _validate(cfg: RunConfig) -> None:
    if cfg.n is not None and cfg.n < 0:
        raise UsageError("--n must be non-negative")
    if cfg.subcommand in ("simulate", "sweep", "bands", "verify") and cfg.n < 1:
        raise UsageError("--n must be at least 1")
    if cfg.m is not None and cfg.m < 0:
        raise UsageError("--m must be non-negative")
    if cfg.points is not None and cfg.points < 2:
        raise UsageError("--points must be at least 2")
    if cfg.kmin is not None and cfg.kmax is not None:
        if not 0 < cfg.kmin < cfg.kmax < math.pi:
            raise UsageError("need 0 < kmin < kmax < pi")
    if cfg.refine_tol is not None and cfg.refine_tol <= 0:
        raise UsageError("--refine-tol must be positive")
    if cfg.backend not in ("fast", "precise"):
        raise UsageError(f"unknown backend {cfg.backend!r}")
    if cfg.backend == "precise" and cfg.digits < 16:
        raise UsageError("--digits must be at least 16")
    if cfg.subcommand == "sequence" and cfg.format == "profile" and cfg.gamma is None:
        raise UsageError("--format profile needs --gamma")
    if cfg.subcommand == "plot" and not (cfg.input or cfg.intervals):
        raise UsageError("plot needs --input and/or --intervals")
    if cfg.plot and not cfg.out:
        raise UsageError("--plot needs --out")


def _header(cfg: RunConfig) -> dict:
    skip = {"no_timestamp", "plot"}
    if cfg.subcommand not in ("sweep", "bands"):
        skip |= {"backend", "digits"}
    params = {k: v for k, v in asdict(cfg).items() if k not in skip}
    return output.header_fields(params, timestamp=not cfg.no_timestamp)


def _header_text(cfg: RunConfig) -> str:
    return output.header_lines(f"cqtm {cfg.subcommand}", _header(cfg))


def cmd_sequence(cfg: RunConfig) -> int:
    seq = expand_sequence(cfg.n)
    head = _header_text(cfg)
    if cfg.format == "terms":
        text = output.csv_text(["index", "m"], enumerate(seq.terms.tolist()), head)
    elif cfg.format == "bits":
        text = head + seq.bit_string() + "\n"
    elif cfg.format == "census":
        text = output.csv_text(["m", "count"], sorted(barrier_census(seq).items()), head)
    else:
        prof = potential_profile(seq, cfg.gamma)
        links = np.concatenate((prof.link_value, [0.0]))
        rows = zip(prof.sites.tolist(), links.tolist(), prof.site_height.tolist())
        text = output.csv_text(["site", "link_value", "site_height"], rows, head)
    output.write_text(text, cfg.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    records, final = run_counting(cfg.n, cfg.max_steps)
    head = _header_text(cfg)
    if cfg.emit == "trace":
        rows = ((r.step_index, r.term_fired, r.is_read1, r.head_state, r.head_pos) for r in records)
        text = output.csv_text(["step", "term", "is_read1", "head_state", "head_pos"], rows, head)
    elif cfg.emit == "tapes":
        text = output.csv_text(["index", "tape"], enumerate(counter_values(cfg.n, records)), head)
    else:
        summary = {
            "steps": len(records),
            "read1_steps": int(read1_trace(records).sum()),
            "matches_sequence": read1_trace_matches(expand_sequence(cfg.n), records),
            "final_head_state": final.head_state,
            "final_head_pos": final.head_pos,
        }
        text = head + "".join(f"{k}={output.fmt(v)}\n" for k, v in summary.items())
    output.write_text(text, cfg.out)
    return EXIT_OK


def cmd_barrier(cfg: RunConfig) -> int:
    params = ModelParams(cfg.gamma)
    k = momentum_grid(cfg.kmin, cfg.kmax, cfg.points)
    c = single_barrier_coeffs(cfg.m, k, params)
    branch = [dispersion(float(kk), params).branch for kk in k]
    rows = zip(k.tolist(), branch, c.abs_F.tolist(), c.phase_F.tolist(), c.abs_B.tolist(), c.phase_B.tolist())
    text = output.csv_text(["k", "branch", "absF", "phaseF", "absB", "phaseB"], rows, _header_text(cfg))
    output.write_text(text, cfg.out)
    return EXIT_OK


def _svg_path(out: str) -> str:
    return str(Path(out).with_suffix(".svg"))


def cmd_sweep(cfg: RunConfig) -> int:
    backend = get_backend(cfg.backend, cfg.digits)
    records = sweep(cfg.n, cfg.params, cfg.kmin, cfg.kmax, cfg.points, backend)
    if cfg.format == "json":
        text = output.records_json(records, _header(cfg))
    else:
        text = output.sweep_csv(records, _header_text(cfg))
    output.write_text(text, cfg.out)
    if cfg.plot:
        title = f"N={cfg.n} gamma={cfg.gamma}"
        output.write_text(render_svg(records, title=title), _svg_path(cfg.out))
    return EXIT_OK


def cmd_bands(cfg: RunConfig) -> int:
    backend = get_backend(cfg.backend, cfg.digits)
    ivs = band_intervals(cfg.n, cfg.params, cfg.kmin, cfg.kmax, cfg.points, cfg.refine_tol, backend)
    if cfg.format == "json":
        text = output.intervals_json(ivs, _header(cfg))
    else:
        rows = ((iv.k_lo, iv.k_hi, iv.kind, iv.edge_tolerance) for iv in ivs)
        text = output.csv_text(["k_lo", "k_hi", "kind", "tol"], rows, _header_text(cfg))
    output.write_text(text, cfg.out)
    if cfg.plot:
        output.write_text(render_svg(intervals=ivs), _svg_path(cfg.out))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    checks = oracle_equivalence(cfg.n, samples=cfg.samples, seed=cfg.seed)
    rows = ((c.n, c.gamma, c.branch, c.samples, c.max_lr_diff, c.flag_mismatches, c.ok) for c in checks)
    cols = ["n", "gamma", "branch", "samples", "max_lr_diff", "flag_mismatches", "ok"]
    output.write_text(output.csv_text(cols, rows, _header_text(cfg)), cfg.out)
    bad = [c for c in checks if not c.ok]
    print(f"verify: {len(checks) - len(bad)}/{len(checks)} checks passed", file=sys.stderr)
    return EXIT_OK if not bad else EXIT_VERIFY


def cmd_plot(cfg: RunConfig) -> int:
    records = None
    intervals = None
    if cfg.input:
        _, records = output.read_sweep_csv(Path(cfg.input).read_text())
    if cfg.intervals:
        intervals = output.read_intervals_json(Path(cfg.intervals).read_text())
    output.write_text(render_svg(records, intervals, title=cfg.title or ""), cfg.out)
    return EXIT_OK


COMMANDS = {
    "sequence": cmd_sequence,
    "simulate": cmd_simulate,
    "barrier": cmd_barrier,
    "sweep": cmd_sweep,
    "bands": cmd_bands,
    "verify": cmd_verify,
    "plot": cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        return COMMANDS[cfg.subcommand](cfg)
    except SystemExit as exc:  # argparse
        return EXIT_USAGE if exc.code else EXIT_OK
    except (UsageError, DomainError, EmptyDocumentError, OSError) as exc:
        print(f"cqtm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, NonterminationError, MemoryError) as exc:
        print(f"cqtm: resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
