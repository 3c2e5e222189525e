"""Command-line front end: ``ellcover {geometry,distance,outage,selftest}``.

Angles are degrees and SNRs dB on the command line.  Every table starts with
``#`` metadata lines echoing the resolved configuration; such a file can be
passed back through ``--config`` to regenerate it.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import geometry as geo
from . import selftest as st
from .distance_stats import DistanceModel
from .montecarlo import SimConfig, ks_distance, sample_distance
from .snr_outage import (
    DEFAULTS,
    SWEEP_AXES,
    FadingChannel,
    OutageQuery,
    SweepRow,
    outage_probability,
    outage_sweep,
    query_at,
)

OUTPUT_DIR_ENV = "ELLCOVER_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

DEFAULT_GRIDS = {
    "psi": "5:60:1",
    "theta": "10:59:1",
    "H": "100:1000:20",
    "m": "1,4/3,2,3,4",
    "gamma_th": "0:30:1",
    "gamma_bar": "80:110:1",
}


@dataclasses.dataclass
class RunConfig:
    command: str = ""
    scenario: str = "tilted"
    H: float = DEFAULTS.H
    theta: float = 30.0
    psi: float = 20.0
    a: float = 205.2
    b: float = 188.5
    m: float = 4.0
    nu: float = DEFAULTS.nu
    gamma_bar: float = DEFAULTS.gamma_bar_db
    gamma_th: float = 10.0
    sweep: str = ""
    grid: str = ""
    series: str = ""
    points: int = 400
    mc: int = 0
    bins: int = 100
    seed: int = 12345
    compare_vertical: bool = False
    quick: bool = False
    format: str = "csv"

    def echo(self) -> list[str]:
        lines = ["[run]"]
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_fmt_value(getattr(self, f.name))}")
        return lines


def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(field: dataclasses.Field, raw: str):
    if field.type in ("bool", bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if field.type in ("int", int):
        return int(float(raw))
    if field.type in ("float", float):
        return float(Fraction(raw.strip()))
    return raw.strip()


def load_config(path: str) -> dict:
    """Read ``key = value`` pairs from an INI ``[run]`` section.

    Lines may carry a leading ``# `` so that the header of an output table is
    itself a valid config file; JSON outputs are read from their ``config`` key.
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return {k: str(v) for k, v in json.loads(text)["config"].items()}
    body = []
    started = False
    for raw in text.splitlines():
        line = (raw[2:] if raw.startswith("# ") else raw).strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            started = True
        elif "=" not in line:
            if started:
                break
            continue
        body.append(line)
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string("\n".join(body))
    if not cp.has_section("run"):
        raise ValueError(f"{path}: no [run] section")
    return dict(cp.items("run"))


def resolve(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    if getattr(args, "config", None):
        for k, v in load_config(args.config).items():
            if k in fields and k != "command":
                setattr(cfg, k, _coerce(fields[k], v))
    for k, f in fields.items():
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    cfg.command = args.command
    return cfg


# ------------------------------------------------------------------ output --

def _cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


def _json_cell(v):
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    return v


def render(cfg: RunConfig, columns, rows, notes=()) -> str:
    if cfg.format == "json":
        doc = {
            "meta": {"tool": "ellcover", "version": __version__, "notes": list(notes)},
            "config": dataclasses.asdict(cfg),
            "columns": list(columns),
            "rows": [[_json_cell(v) for v in r] for r in rows],
        }
        return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# ellcover {__version__}\n")
    for line in cfg.echo():
        buf.write(f"# {line}\n")
    for n in notes:
        buf.write(f"#! {n}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_cell(v) for v in r) + "\n")
    return buf.getvalue()


def emit(text: str, output: str | None):
    if not output:
        sys.stdout.write(text)
        return
    path = Path(output)
    if not path.is_absolute() and os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list; fractions like ``4/3`` allowed."""
    spec = spec.strip()
    if ":" in spec:
        start, stop, step = (float(Fraction(p)) for p in spec.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        k = int(math.floor((stop - start) / step + 1e-9))
        return [start + i * step for i in range(k + 1)]
    out = [float(Fraction(p)) for p in spec.split(",") if p.strip()]
    if not out:
        raise ValueError("empty grid")
    return out


def _model(cfg: RunConfig) -> DistanceModel:
    if cfg.scenario == "vertical":
        return DistanceModel.vertical(cfg.a, cfg.b, cfg.H)
    if cfg.scenario == "tilted":
        return DistanceModel.tilted_deg(cfg.H, cfg.theta, cfg.psi)
    raise geo.GeometryError(f"unknown scenario {cfg.scenario!r}")


# --------------------------------------------------------------- commands --

GEOMETRY_COLUMNS = ["psi_deg", "theta_deg", "a", "b", "x0", "ecc", "area", "area_ratio",
                    "d_min", "d_break", "d_max", "H_v", "valid"]


def _geometry_row(H, theta, psi):
    try:
        s = geo.TiltedScenario.from_degrees(H, theta, psi)
    except geo.GeometryError:
        return [psi, theta] + [math.nan] * 10 + [False]
    fp = geo.footprint_from_tilt(s)
    bounds = geo.support_bounds(fp, H)
    return [psi, theta, fp.a, fp.b, fp.x0, fp.ecc, fp.area, geo.area_ratio_vs_circle(s),
            *bounds, geo.equivalent_vertical_altitude(s), True]


def parse_series(spec: str) -> tuple[str, list[float]]:
    """``axis=v1,v2,...`` -> ``(axis, values)``; empty spec gives ``("", [None])``."""
    if not spec:
        return "", [None]
    axis, _, values = spec.partition("=")
    if not values:
        raise ValueError(f"series must look like axis=v1,v2,... got {spec!r}")
    return axis.strip(), parse_grid(values)


def _series_labels(spec: str, values) -> list[str]:
    """Column tags for a series: the user's own tokens for a list (so ``4/3`` stays ``4/3``)."""
    raw = spec.partition("=")[2]
    if ":" not in raw:
        toks = [t.strip() for t in raw.split(",") if t.strip()]
        if len(toks) == len(values):
            return toks
    return [f"{v:g}" for v in values]


def _with(cfg: RunConfig, axis: str, value) -> RunConfig:
    return cfg if not axis else dataclasses.replace(cfg, **{axis: value})


def cmd_geometry(cfg: RunConfig, output):
    if cfg.scenario == "vertical":
        fp = geo.footprint_vertical(geo.VerticalScenario(cfg.a, cfg.b, cfg.H))
        cols = ["a", "b", "x0", "ecc", "area", "d_min", "d_break", "d_max"]
        rows = [[fp.a, fp.b, fp.x0, fp.ecc, fp.area, *geo.support_bounds(fp, cfg.H)]]
        emit(render(cfg, cols, rows), output)
        return EXIT_OK
    axis, values = parse_series(cfg.series)
    if axis not in ("", "theta", "psi", "H"):
        raise ValueError("geometry series supports theta, psi or H")
    rows = []
    for v in values:
        c = _with(cfg, axis, v)
        if c.sweep:
            if c.sweep not in ("psi", "theta"):
                raise ValueError("geometry sweeps support psi or theta")
            default = f"0:{89 - c.theta:g}:1" if c.sweep == "psi" else f"1:{89 - c.psi:g}:1"
            for g in parse_grid(c.grid or default):
                th, ps = (c.theta, g) if c.sweep == "psi" else (g, c.psi)
                rows.append(_geometry_row(c.H, th, ps))
        else:
            geo.TiltedScenario.from_degrees(c.H, c.theta, c.psi)  # raises on invalid geometry
            rows.append(_geometry_row(c.H, c.theta, c.psi))
    emit(render(cfg, GEOMETRY_COLUMNS, rows), output)
    return EXIT_OK


def cmd_distance(cfg: RunConfig, output):
    m = _model(cfg)
    d_min, _, d_max = m.bounds
    d = np.linspace(d_min, d_max, max(cfg.points, 2))
    pdf = m.euclidean_pdf(d)
    cdf = m.euclidean_cdf(d)
    cols = ["d", "pdf", "cdf"]
    columns = [d, pdf, cdf]
    notes = []
    if cfg.mc > 0:
        emp = sample_distance(SimConfig(seed=cfg.seed, n_samples=cfg.mc, model=m))
        edges = np.linspace(d_min, d_max, cfg.bins + 1)
        dens = emp.histogram(edges)
        idx = np.clip(np.searchsorted(edges, d, side="right") - 1, 0, cfg.bins - 1)
        cols += ["mc_density", "mc_cdf"]
        columns += [dens[idx], emp.cdf(d)]
        notes.append(f"ks_distance = {ks_distance(emp, m.cdf_fast)!r}")
    rows = list(zip(*[c.tolist() for c in columns]))
    emit(render(cfg, cols, rows, notes), output)
    return EXIT_OK


def _outage_block(cfg: RunConfig, workers: int):
    """Grid values plus ``{column: values}`` for one curve."""
    ch = FadingChannel(cfg.m, cfg.nu, cfg.gamma_bar)
    base = OutageQuery(ch, _model(cfg), cfg.gamma_th)
    if cfg.sweep:
        grid = parse_grid(cfg.grid or DEFAULT_GRIDS[cfg.sweep])
        res = outage_sweep(base, cfg.sweep, grid, workers=workers)
    else:
        o = outage_probability(base)
        grid = [cfg.gamma_th]
        res = [SweepRow(cfg.gamma_th, o.p_out, True, o.below_floor, "")]
    cols = {
        "p_out": [r.p_out for r in res],
        "valid": [r.valid for r in res],
        "below_floor": [r.below_floor for r in res],
    }
    if cfg.compare_vertical:
        if cfg.scenario != "tilted":
            raise ValueError("--compare-vertical needs a tilted scenario")
        hv_col, pv_col = [], []
        for r in res:
            hv, pv = math.nan, math.nan
            if r.valid:
                q = query_at(base, cfg.sweep, r.value) if cfg.sweep else base
                hv = geo.equivalent_vertical_altitude(q.model.source)
                vm = DistanceModel.vertical(q.model.fp.a, q.model.fp.b, hv)
                pv = outage_probability(OutageQuery(q.channel, vm, q.gamma_th_db)).p_out
            hv_col.append(hv)
            pv_col.append(pv)
        cols["H_v"] = hv_col
        cols["p_out_vertical"] = pv_col
    return grid, cols


def cmd_outage(cfg: RunConfig, output, workers=1):
    axis, values = parse_series(cfg.series)
    if axis and axis not in SWEEP_AXES:
        raise ValueError(f"unknown series axis {axis!r}")
    labels = _series_labels(cfg.series, values) if axis else [""]
    grid, merged = None, {}
    for v, tag in zip(values, labels):
        g, cols = _outage_block(_with(cfg, axis, v), workers)
        grid = g
        for name, col in cols.items():
            merged[name if not axis else f"{name}[{axis}={tag}]"] = col
    valid_cols = [c for n, c in merged.items() if n.startswith("valid")]
    any_valid = [any(vals) for vals in zip(*valid_cols)]
    names = [cfg.sweep or "gamma_th"] + list(merged)
    rows = [[x] + [merged[n][i] for n in merged] for i, x in enumerate(grid)]
    emit(render(cfg, names, rows), output)
    return EXIT_OK if any(any_valid) else EXIT_INVALID


def cmd_selftest(cfg: RunConfig, output, inject_failure=False):
    def progress(res):
        print(f"[{'PASS' if res.passed else 'FAIL'}] {res.name} ({res.seconds:.2f}s)", file=sys.stderr)

    results = st.run(quick=cfg.quick, inject_failure=inject_failure, progress=progress)
    rows = [[r.name, r.passed, r.detail.replace(",", ";")] for r in results]
    emit(render(cfg, ["check", "passed", "detail"], rows), output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# ----------------------------------------------------------------- parser --

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI file with a [run] section (or a previous output file)")
    p.add_argument("--output", "-o", help=f"output path; relative paths land in ${OUTPUT_DIR_ENV} when set")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)


def _geometry_flags(p):
    p.add_argument("--scenario", choices=("tilted", "vertical"))
    p.add_argument("--H", type=float, help="altitude [m]")
    p.add_argument("--theta", type=float, help="semi-apex angle [deg]")
    p.add_argument("--psi", type=float, help="tilt angle [deg]")
    p.add_argument("--a", type=float, help="semi-major axis [m] (vertical)")
    p.add_argument("--b", type=float, help="semi-minor axis [m] (vertical)")


def _frac(s):
    return float(Fraction(s))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellcover", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"ellcover {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geometry", help="footprint dimensions and support bounds")
    _common(g)
    _geometry_flags(g)
    g.add_argument("--sweep", choices=("psi", "theta"))
    g.add_argument("--grid")
    g.add_argument("--series", help="stack curves, e.g. theta=20,30,40")

    d = sub.add_parser("distance", help="slant-distance PDF/CDF table")
    _common(d)
    _geometry_flags(d)
    d.add_argument("--points", type=int, help="grid size (default 400)")
    d.add_argument("--mc", type=int, help="Monte-Carlo sample count for histogram columns")
    d.add_argument("--bins", type=int)

    o = sub.add_parser("outage", help="outage probability, optionally swept")
    _common(o)
    _geometry_flags(o)
    o.add_argument("--m", type=_frac, help="Nakagami shape (fractions allowed, e.g. 4/3)")
    o.add_argument("--nu", type=float)
    o.add_argument("--gamma-bar", dest="gamma_bar", type=float, help="transmit SNR [dB]")
    o.add_argument("--gamma-th", dest="gamma_th", type=float, help="SNR threshold [dB]")
    o.add_argument("--sweep", choices=SWEEP_AXES)
    o.add_argument("--grid", help="start:stop:step or comma list")
    o.add_argument("--series", help="one column group per value, e.g. m=1,4/3,2,4")
    o.add_argument("--compare-vertical", dest="compare_vertical", action="store_const", const=True)
    o.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("selftest", help="run the oracle suite")
    _common(s)
    s.add_argument("--quick", action="store_const", const=True, help="n=1e5 with widened bounds")
    s.add_argument("--inject-failure", action="store_true", help=argparse.SUPPRESS)
    return ap


COMMANDS = ("geometry", "distance", "outage", "selftest")


def _place_config(argv: list[str]) -> list[str]:
    """Let ``--config`` appear anywhere and supply the subcommand when it is omitted."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return argv
    pos = next((i for i, a in enumerate(rest) if a in COMMANDS), None)
    if pos is None:
        command = load_config(known.config).get("command")
        if command not in COMMANDS:
            raise ValueError(f"{known.config}: no command given and none recorded in the file")
        rest, pos = [command] + rest, 0
    return rest[: pos + 1] + ["--config", known.config] + rest[pos + 1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _place_config(argv)
    except (OSError, ValueError) as exc:
        print(f"ellcover: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "geometry":
            return cmd_geometry(cfg, args.output)
        if args.command == "distance":
            return cmd_distance(cfg, args.output)
        if args.command == "outage":
            return cmd_outage(cfg, args.output, workers=args.workers)
        return cmd_selftest(cfg, args.output, inject_failure=args.inject_failure)
    except (geo.GeometryError, ValueError) as exc:
        print(f"ellcover: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
