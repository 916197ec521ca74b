"""Command-line front end.

Output is JSON lines by default: a header record carrying the command, the
seed and the parameters, then one record per item.  ``--format csv`` prints
a fixed column set instead.

Exit codes: 0 ok, 2 invalid parameters or config, 3 pole at step 0,
4 verification mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Optional

from .errors import InvalidParams, NeedsTower, PadynError
from .field import parse_element
from .orbit import basin_probe, exceptional_probe, iterate, verify
from .rational_map import (
    IDENTITY,
    CaseTag,
    MapParams,
    classify_case,
    fixed_points,
    radicand_class,
    series_radii,
    two_cycle,
)

EXIT_OK, EXIT_INVALID, EXIT_POLE, EXIT_MISMATCH = 0, 2, 3, 4

SWEEP_COLUMNS = ["p", "a", "b", "c", "d", "status", "case", "fixed_points", "local_types",
                 "h_exp", "g_norm_exp", "x0", "verify_passed", "error"]
ITERATE_COLUMNS = ["n", "point", "anchor", "radius_exp", "events"]


@dataclass
class RunConfig:
    p: str = "3"
    a: str = "0"
    b: str = "2"
    c: str = "1"
    d: str = "1"
    x0: Optional[str] = None
    steps: int = 50
    backend: str = "exact"
    precision: int = 40
    radii: str = ""
    samples: int = 5
    seed: int = 0
    format: str = "json"
    depth: int = 50
    threshold_exp: int = 60
    corrupt_step: Optional[int] = None
    workers: int = 0

    def params(self) -> MapParams:
        return MapParams.parse(self.p, self.a, self.b, self.c, self.d)

    def header(self, command: str):
        cfg = {f.name: getattr(self, f.name) for f in fields(self)}
        return {"header": {"command": command, "seed": self.seed, "config": cfg}}


class ConfigError(ValueError):
    pass


_INT_KEYS = {"steps", "precision", "samples", "seed", "depth", "threshold_exp", "corrupt_step", "workers"}


def read_config(path: str) -> dict:
    """Flat key=value file; '#' starts a comment."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _INT_KEYS:
                try:
                    val = int(val)
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: {key} must be an integer, got {val!r}") from None
            out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    for name in "pabcd":
        common.add_argument(f"--{name}", help="rational or a + b*sqrt(D); comma list in sweep")
    common.add_argument("--x0")
    common.add_argument("--steps", type=int)
    common.add_argument("--backend", choices=["exact", "trunc", "auto"])
    common.add_argument("--precision", type=int, help="p-adic digits for the truncated backend")
    common.add_argument("--radii", help="comma-separated radius exponents")
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--depth", type=int, help="exceptional-probe depth")
    common.add_argument("--threshold-exp", type=int, dest="threshold_exp",
                        help="converged at exponent <= -E, escaped at >= E")
    common.add_argument("--workers", type=int, help="sweep processes (0 = cpu count)")
    common.add_argument("--corrupt-step", type=int, dest="corrupt_step", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="padyn", description="p-adic (2,1)-rational dynamics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("classify", "case, fixed points or 2-cycle, local types and radii"),
        ("iterate", "orbit stream with per-anchor radius exponents"),
        ("verify", "check an orbit step by step against the radius model"),
        ("sweep", "classify (and verify, with --x0) over a parameter grid"),
        ("basin", "sample spheres about an attracting fixed point"),
        ("probe", "search the exceptional set for --x0"),
    ]:
        sub.add_parser(name, parents=[common], help=text)
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    base = read_config(ns.config) if ns.config else {}
    for f in fields(RunConfig):
        val = getattr(ns, f.name, None)
        if val is not None:
            base[f.name] = val
    return RunConfig(**base)


# --------------------------------------------------------------------------
# commands


def classify_report(params: MapParams) -> dict:
    case = classify_case(params)
    out = {"params": params.as_dict(), "case": case.value, "c_norm": params.c_norm.to_json()}
    try:
        if case is CaseTag.NO_FIXED:
            out["two_cycle"] = two_cycle(params).to_json()
        else:
            fps = fixed_points(params)
            if fps is IDENTITY:
                out["fixed_points"] = "all"
            else:
                out["fixed_points"] = [fp.to_json() for fp in fps]
                if case is CaseTag.UNIQUE_FIXED:
                    sr = series_radii(params, fps[0])
                    out["series_radii"] = {
                        "q_radius": sr.q_radius.to_json() if sr.q_radius else None,
                        "s_radius": sr.s_radius.to_json() if sr.s_radius else None,
                    }
    except NeedsTower as exc:
        out["error"] = f"NeedsTower: {exc}"
    rc = radicand_class(params)
    if rc is not None:
        out["radicand"] = type(rc).__name__
    return out


def cmd_classify(cfg: RunConfig, emit) -> int:
    params = cfg.params()
    emit(cfg.header("classify"))
    emit(classify_report(params))
    return EXIT_OK


def cmd_iterate(cfg: RunConfig, emit) -> int:
    params = cfg.params()
    x0 = parse_element(cfg.x0 or "0")
    traj = iterate(params, x0, cfg.steps, backend=cfg.backend, precision=cfg.precision)
    emit(cfg.header("iterate"))
    if cfg.format == "csv":
        rows = []
        for rec in traj.records():
            for anchor, e in (rec["radius_exp"] or {"": None}).items():
                rows.append({"n": rec["n"], "point": rec["point"], "anchor": anchor,
                             "radius_exp": _exp_str(e), "events": ";".join(rec["events"])})
        emit_csv(ITERATE_COLUMNS, rows, emit)
    else:
        for rec in traj.records():
            emit(rec)
        emit({"events": [e.to_json() for e in traj.events]})
    pole = traj.event("PoleHit")
    return EXIT_POLE if pole is not None and pole.step == 0 else EXIT_OK


def _exp_str(e):
    if e is None:
        return ""
    return e["exp"] if isinstance(e, dict) else e


def _stop(cfg):
    return (Fraction(-cfg.threshold_exp), Fraction(cfg.threshold_exp))


def cmd_verify(cfg: RunConfig, emit) -> int:
    params = cfg.params()
    x0 = parse_element(cfg.x0 or "0")
    if x0 == params.pole:
        emit(cfg.header("verify"))
        emit({"error": "x0 is the pole"})
        return EXIT_POLE
    backend = "auto" if cfg.backend == "exact" else cfg.backend
    rep = verify(params, x0, cfg.steps, stop_exp=_stop(cfg), backend=backend,
                 corrupt_step=cfg.corrupt_step)
    emit(cfg.header("verify"))
    emit(rep.to_json())
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def _sweep_cell(args):
    (p, a, b, c, d), x0, steps, stop = args
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update(p=p, a=a, b=b, c=c, d=d, x0=x0 or "")
    try:
        params = MapParams.parse(p, a, b, c, d)
    except (InvalidParams, ValueError) as exc:
        row.update(status="invalid", error=str(exc))
        return row
    try:
        rep = classify_report(params)
        row.update(status="ok", case=rep["case"], error=rep.get("error", ""))
        if "two_cycle" in rep:
            row.update(h_exp=_exp_str(rep["two_cycle"]["h"]),
                       g_norm_exp=_exp_str(rep["two_cycle"]["g_multiplier_norm"]))
        elif isinstance(rep.get("fixed_points"), list):
            row["fixed_points"] = ";".join(fp["point"] for fp in rep["fixed_points"])
            row["local_types"] = ";".join(fp["local_type"] for fp in rep["fixed_points"])
        if x0:
            row["verify_passed"] = verify(params, parse_element(x0), steps, stop_exp=stop).passed
    except PadynError as exc:
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return row


def cmd_sweep(cfg: RunConfig, emit) -> int:
    axes = [str(getattr(cfg, k)).split(",") for k in "pabcd"]
    cells = [(combo, cfg.x0, cfg.steps, _stop(cfg)) for combo in itertools.product(*axes)]
    workers = cfg.workers or None
    if len(cells) == 1 or workers == 1:
        rows = [_sweep_cell(cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))  # map keeps grid order
    emit(cfg.header("sweep"))
    if cfg.format == "csv":
        emit_csv(SWEEP_COLUMNS, rows, emit)
    else:
        for row in rows:
            emit(row)
    return EXIT_OK


def cmd_basin(cfg: RunConfig, emit) -> int:
    params = cfg.params()
    radii = [Fraction(e) for e in cfg.radii.split(",")] if cfg.radii else [Fraction(-1)]
    summary = basin_probe(params, radii, cfg.samples, cfg.steps, threshold=-cfg.threshold_exp,
                          seed=cfg.seed, depth=cfg.depth)
    emit(cfg.header("basin"))
    for s in summary:
        emit(s.to_json())
    return EXIT_OK


def cmd_probe(cfg: RunConfig, emit) -> int:
    params = cfg.params()
    v = exceptional_probe(params, parse_element(cfg.x0 or "0"), cfg.depth)
    emit(cfg.header("probe"))
    emit(v.to_json())
    return EXIT_OK


COMMANDS = {"classify": cmd_classify, "iterate": cmd_iterate, "verify": cmd_verify,
            "sweep": cmd_sweep, "basin": cmd_basin, "probe": cmd_probe}


def emit_csv(columns, rows, emit):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k, "") for k in columns})
    emit(buf.getvalue().rstrip("\n"), raw=True)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ns = build_parser().parse_args(argv)

    def emit(obj, raw=False):
        if raw:
            print(obj, file=out)
        elif cfg.format == "csv" and "header" in obj:
            print("# " + json.dumps(obj["header"]), file=out)
        else:
            print(json.dumps(obj), file=out)

    try:
        cfg = resolve_config(ns)
        return COMMANDS[ns.command](cfg, emit)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidParams, ValueError) as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
