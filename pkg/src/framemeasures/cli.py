"""Command-line front end.

A run is described by a JSON config file (see ``parse_config``); the
command is one of describe, transform, construct, verify, limit-check,
catalog.  Artifacts are emitted as JSON or CSV with all reals printed as
17-significant-digit decimals, so identical configs and seeds produce
byte-identical output.  Exit status: 0 on success/consistent verdicts,
2 when a verify run violates its certificate, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from . import constructions as cons
from . import serialize as ser
from .errors import ConfigError, MeasureError
from .measures import mass_with_error, support_superset, validate
from .transforms import TransformRequest, transform_rows
from .verifier import (
    FrameReport,
    LimitCheckReport,
    approx_identity_limit_check,
    estimate_bounds,
    gen_test_family,
)

COMMANDS = ("describe", "transform", "construct", "verify", "limit-check", "catalog")
_FAMILY_COMMANDS = ("verify", "limit-check")


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    count: int
    max_degree: int
    seed: int


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def values(self):
        if self.spacing == "log":
            if self.start <= 0 or self.stop <= 0:
                raise ConfigError("log grids need positive endpoints")
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    command: str
    measure: Optional[object] = None
    pair: Optional[cons.CertifiedPair] = None
    quad: TransformRequest = TransformRequest()
    family: Optional[FamilySpec] = None
    grid: Optional[GridSpec] = None
    limit_kind: Optional[str] = None
    limit_n: tuple[int, ...] = ()
    steps: tuple = ()
    catalog: cons.CatalogConfig = cons.CatalogConfig()
    catalog_raw: tuple = ()  # raw overrides, merged under per-pair configs
    fmt: str = "json"
    out_path: Optional[str] = None


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON run configuration."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}")
    return config_from_obj(obj)


def config_from_obj(obj) -> RunConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    command = obj.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")

    quad_raw = dict(obj.get("quad", {}))
    catalog_raw = dict(obj.get("catalog", {}))
    if "trunc_T" in quad_raw:
        # comb truncation is a catalog concern; accept it in the quad group
        catalog_raw.setdefault(
            "comb_halfwidth", int(ser.parse_real(quad_raw.pop("trunc_T"), "trunc_T"))
        )
    catalog = _catalog_config(catalog_raw)
    quad = _quad_config(quad_raw)

    measure = None
    if "measure" in obj:
        measure = ser.measure_from_obj(obj["measure"], "measure")
        bad = validate(measure)
        if bad:
            raise ConfigError("invalid measure: " + "; ".join(bad))
    elif command in ("describe", "transform"):
        raise ConfigError(f"the {command} command needs a 'measure'")

    pair = None
    if "pair" in obj:
        pair = _resolve_pair(obj["pair"], catalog_raw)
    elif command in ("verify", "limit-check", "construct"):
        raise ConfigError(f"the {command} command needs a 'pair'")

    family = None
    if "family" in obj:
        fam = obj["family"]
        if "seed" not in fam:
            raise ConfigError("family-based commands need an explicit seed")
        family = FamilySpec(
            kind=fam.get("kind", "trig"),
            count=int(fam.get("count", 20)),
            max_degree=int(fam.get("max_degree", 8)),
            seed=int(fam["seed"]),
        )
    elif command in _FAMILY_COMMANDS:
        raise ConfigError(f"the {command} command needs a 'family' with a seed")

    grid = None
    if "grid" in obj:
        g = obj["grid"]
        grid = GridSpec(
            start=ser.parse_real(g["start"], "grid.start"),
            stop=ser.parse_real(g["stop"], "grid.stop"),
            count=int(g.get("count", 64)),
            spacing=g.get("spacing", "linear"),
        )
    elif command == "transform":
        raise ConfigError("the transform command needs a 'grid'")

    limit_kind = None
    limit_n: tuple[int, ...] = ()
    if command == "limit-check":
        lc = obj.get("limit_check")
        if not lc:
            raise ConfigError("the limit-check command needs 'limit_check'")
        limit_kind = lc.get("kind", "i")
        limit_n = tuple(int(n) for n in lc.get("n_list", ()))

    steps = tuple(obj.get("construct", {}).get("steps", ()))
    if command == "construct" and not steps:
        raise ConfigError("the construct command needs construct.steps")

    out = obj.get("output", {})
    fmt = out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"output format must be json or csv, got {fmt!r}")

    return RunConfig(
        command=command,
        measure=measure,
        pair=pair,
        quad=quad,
        family=family,
        grid=grid,
        limit_kind=limit_kind,
        limit_n=limit_n,
        steps=steps,
        catalog=catalog,
        catalog_raw=tuple(sorted(catalog_raw.items(), key=lambda kv: kv[0])),
        fmt=fmt,
        out_path=out.get("path"),
    )


def _catalog_config(obj) -> cons.CatalogConfig:
    known = {f.name for f in fields(cons.CatalogConfig)}
    bad = set(obj) - known
    if bad:
        raise ConfigError(f"unknown catalog fields: {sorted(bad)}")
    kwargs = {}
    for k, v in obj.items():
        if k in ("F", "E"):
            kwargs[k] = tuple(
                (ser.parse_real(a, k), ser.parse_real(b, k)) for a, b in v
            )
        elif k in ("comb_halfwidth", "ifs_depth", "envelope_grid"):
            kwargs[k] = int(v)
        else:
            kwargs[k] = ser.parse_real(v, k)
    return cons.CatalogConfig(**kwargs)


def _quad_config(obj) -> TransformRequest:
    req = TransformRequest()
    mapping = {
        "ifs_depth": int,
        "quad_points": int,
        "realize_depth": int,
        "atom_cap": int,
        "error_budget": float,
        "realize_resolution": float,
        "max_refinements": int,
    }
    kwargs = {}
    for key, conv in mapping.items():
        if key in obj:
            kwargs[key] = conv(ser.parse_real(obj[key], key))
    unknown = set(obj) - set(mapping)
    if unknown:
        raise ConfigError(f"unknown quad fields: {sorted(unknown)}")
    return replace(req, **kwargs)


def _resolve_pair(obj, catalog_raw) -> cons.CertifiedPair:
    if not isinstance(obj, dict):
        raise ConfigError("pair must be an object")
    source = obj.get("source", "explicit")
    if source == "catalog":
        idx = int(obj.get("index", 1))
        merged = {**dict(catalog_raw), **obj.get("config", {})}
        pairs = cons.canonical_pairs(_catalog_config(merged))
        if not 1 <= idx <= len(pairs):
            raise ConfigError(f"catalog index must be 1..{len(pairs)}, got {idx}")
        return pairs[idx - 1]
    if source == "explicit":
        return ser.pair_from_obj(obj, "pair")
    raise ConfigError(f"pair source must be 'catalog' or 'explicit', got {source!r}")


# ---------------------------------------------------------------------------
# construct steps
# ---------------------------------------------------------------------------
def _apply_step(pair: cons.CertifiedPair, step: dict, catalog_raw) -> cons.CertifiedPair:
    rule = step.get("rule")
    if rule == "density_restrict":
        E = step.get("set")
        return cons.density_restrict(
            pair,
            E if E is None else [(ser.parse_real(a, rule), ser.parse_real(b, rule)) for a, b in E],
            ser.density_from_obj(step["phi"], rule),
        )
    if rule == "scale_base":
        return cons.scale_base(pair, ser.parse_real(step["alpha"], rule))
    if rule == "scale_frame_measure":
        if "phi" in step:
            return cons.scale_frame_measure(pair, ser.density_from_obj(step["phi"], rule))
        return cons.scale_frame_measure(pair, ser.parse_real(step["alpha"], rule))
    if rule == "mix_frame_measures":
        other = _resolve_pair(step["other"], catalog_raw)
        return cons.mix_frame_measures(
            pair,
            other,
            ser.parse_real(step["alpha"], rule),
            ser.parse_real(step["beta"], rule),
        )
    if rule == "convolve_frame_measure_with_probability":
        return cons.convolve_frame_measure_with_probability(
            pair, ser.measure_from_obj(step["rho"], rule)
        )
    if rule == "translate_pair":
        return cons.translate_pair(pair, ser.parse_real(step["shift"], rule))
    if rule == "convolution_chain":
        return cons.convolution_chain(
            pair,
            ser.density_from_obj(step["phi"], rule),
            [
                [(ser.parse_real(a, rule), ser.parse_real(b, rule)) for a, b in s]
                for s in step["sets"]
            ],
            normalized=bool(step.get("normalized", True)),
        )
    if rule == "sum_with_densities":
        parts = [
            (
                [(ser.parse_real(a, rule), ser.parse_real(b, rule)) for a, b in p["set"]],
                ser.density_from_obj(p["phi"], rule),
            )
            for p in step.get("parts", ())
        ]
        return cons.sum_with_densities(pair, parts)
    if rule == "smooth_base":
        return cons.smooth_base(
            pair,
            ser.density_from_obj(step["phi"], rule),
            [ser.measure_from_obj(r, rule) for r in step.get("rhos", ())],
        )
    raise ConfigError(f"unknown construct rule {rule!r}")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------
def report_to_obj(report: FrameReport) -> dict:
    return {
        "ratios": [
            {
                "id": e.test_id,
                "ratio": ser.fmt_real(e.ratio),
                "err": ser.fmt_real(e.err),
                "tail": None if e.tail is None else ser.fmt_real(e.tail),
            }
            for e in report.ratios
        ],
        "emp_lower": ser.fmt_real(report.emp_lower),
        "emp_upper": ser.fmt_real(report.emp_upper),
        "cert": None if report.cert is None else ser.cert_to_obj(report.cert),
        "verdict": report.verdict,
        "notes": list(report.notes),
    }


def report_to_rows(report: FrameReport) -> list[list[str]]:
    rows = [["id", "ratio", "err", "tail"]]
    for e in report.ratios:
        rows.append(
            [
                e.test_id,
                ser.fmt_real(e.ratio),
                ser.fmt_real(e.err),
                "" if e.tail is None else ser.fmt_real(e.tail),
            ]
        )
    rows.append(["summary:emp_lower", ser.fmt_real(report.emp_lower), "", ""])
    rows.append(["summary:emp_upper", ser.fmt_real(report.emp_upper), "", ""])
    if report.cert is not None:
        rows.append(["summary:cert_A", ser.fmt_real(report.cert.A), "", ""])
        rows.append(["summary:cert_B", ser.fmt_real(report.cert.B), "", ""])
        rows.append(["summary:cert_kind", report.cert.kind, "", ""])
    rows.append(["summary:verdict", report.verdict, "", ""])
    for note in report.notes:
        rows.append(["summary:note", note, "", ""])
    return rows


def limit_report_to_obj(report: LimitCheckReport) -> dict:
    return {
        "entries": [
            {"n": e.n, "report": report_to_obj(e.report)} for e in report.entries
        ],
        "all_consistent": report.all_consistent,
        "max_drift": ser.fmt_real(report.max_drift),
        "drift_budget": ser.fmt_real(report.drift_budget),
        "drift_ok": report.drift_ok,
    }


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------
def run(config: RunConfig) -> tuple[int, str]:
    """Execute the config; returns (exit status, artifact text)."""
    if config.command == "describe":
        return _run_describe(config)
    if config.command == "transform":
        return _run_transform(config)
    if config.command == "catalog":
        pairs = cons.canonical_pairs(config.catalog)
        obj = {"pairs": [ser.pair_to_obj(p) for p in pairs]}
        if config.fmt == "json":
            return 0, _json_text(obj)
        rows = [["index", "kind", "A", "B", "truncation"]]
        for i, p in enumerate(pairs, 1):
            rows.append(
                [
                    str(i),
                    p.cert.kind,
                    ser.fmt_real(p.cert.A),
                    ser.fmt_real(p.cert.B),
                    p.truncation.describe() if p.truncation else "",
                ]
            )
        return 0, _csv_text(rows)
    if config.command == "construct":
        pair = config.pair
        for step in config.steps:
            pair = _apply_step(pair, step, config.catalog_raw)
        obj = ser.pair_to_obj(pair)
        if config.fmt == "json":
            return 0, _json_text(obj)
        rows = [["field", "value"]]
        rows.append(["cert_A", ser.fmt_real(pair.cert.A)])
        rows.append(["cert_B", ser.fmt_real(pair.cert.B)])
        rows.append(["cert_kind", pair.cert.kind])
        for s in pair.cert.provenance:
            rows.append(["provenance", s.rule])
        return 0, _csv_text(rows)
    if config.command == "verify":
        pair = config.pair
        fam = gen_test_family(
            pair.mu,
            config.family.kind,
            config.family.count,
            config.family.max_degree,
            config.family.seed,
        )
        report = estimate_bounds(
            pair.mu,
            pair.nu,
            fam,
            req=config.quad,
            cert=pair.cert,
            truncation=pair.truncation,
        )
        status = 2 if report.verdict.endswith("violated") else 0
        if config.fmt == "json":
            return status, _json_text(report_to_obj(report))
        return status, _csv_text(report_to_rows(report))
    if config.command == "limit-check":
        pair = config.pair
        fam = gen_test_family(
            pair.mu,
            config.family.kind,
            config.family.count,
            config.family.max_degree,
            config.family.seed,
        )
        report = approx_identity_limit_check(
            pair, config.limit_kind, config.limit_n, fam, req=config.quad
        )
        any_violated = any(
            e.report.verdict.endswith("violated") for e in report.entries
        )
        status = 2 if any_violated else 0
        if config.fmt == "json":
            return status, _json_text(limit_report_to_obj(report))
        rows = [["n", "emp_lower", "emp_upper", "verdict"]]
        for e in report.entries:
            rows.append(
                [
                    str(e.n),
                    ser.fmt_real(e.report.emp_lower),
                    ser.fmt_real(e.report.emp_upper),
                    e.report.verdict,
                ]
            )
        rows.append(["summary:max_drift", ser.fmt_real(report.max_drift), "", ""])
        rows.append(["summary:drift_budget", ser.fmt_real(report.drift_budget), "", ""])
        rows.append(["summary:drift_ok", str(report.drift_ok), "", ""])
        return status, _csv_text(rows)
    raise ConfigError(f"unhandled command {config.command!r}")


def _run_describe(config: RunConfig) -> tuple[int, str]:
    mu = config.measure
    violations = validate(mu)
    obj = {"violations": violations}
    if not violations:
        mass, err = mass_with_error(
            mu,
            depth=config.quad.realize_depth,
            resolution=config.quad.realize_resolution,
        )
        sup = support_superset(mu)
        obj.update(
            {
                "mass": ser.fmt_real(mass),
                "mass_error": ser.fmt_real(err),
                "support": {
                    "kind": sup.kind,
                    "hull": [ser.fmt_real(v) for v in sup.hull()],
                },
            }
        )
    if config.fmt == "json":
        return 0, _json_text(obj)
    rows = [["field", "value"]]
    for v in violations:
        rows.append(["violation", v])
    if not violations:
        rows.append(["mass", obj["mass"]])
        rows.append(["mass_error", obj["mass_error"]])
        rows.append(["support_kind", obj["support"]["kind"]])
        rows.append(["support_hull_lo", obj["support"]["hull"][0]])
        rows.append(["support_hull_hi", obj["support"]["hull"][1]])
    return 0, _csv_text(rows)


def _run_transform(config: RunConfig) -> tuple[int, str]:
    rows = transform_rows(config.measure, config.grid.values(), config.quad)
    if config.fmt == "json":
        obj = {
            "rows": [
                {
                    "t": ser.fmt_real(t),
                    "re": ser.fmt_real(re),
                    "im": ser.fmt_real(im),
                    "err": ser.fmt_real(err),
                }
                for t, re, im, err in rows
            ]
        }
        return 0, _json_text(obj)
    table = [["t", "re", "im", "err"]]
    table.extend(
        [ser.fmt_real(t), ser.fmt_real(re), ser.fmt_real(im), ser.fmt_real(err)]
        for t, re, im, err in rows
    )
    return 0, _csv_text(table)


def emit_report(text: str, destination: Optional[str]) -> None:
    """Write an artifact to a file path or stdout."""
    if destination is None:
        sys.stdout.write(text)
        return
    try:
        with open(destination, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write artifact to {destination}: {exc}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="framemeasures",
        description="Measure-expression transforms and frame-bound verification",
    )
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--seed", type=int, help="override the family seed")
    parser.add_argument("--format", choices=("json", "csv"), help="artifact format")
    parser.add_argument("--out", help="artifact destination path (default stdout)")
    parser.add_argument(
        "--trunc-T", type=int, dest="trunc_T", help="override comb truncation halfwidth"
    )
    parser.add_argument(
        "--ifs-depth", type=int, dest="ifs_depth", help="override the transform depth"
    )
    parser.add_argument(
        "--error-budget",
        type=float,
        dest="error_budget",
        help="override the quadrature error budget",
    )
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            obj = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return 1

    if not isinstance(obj, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return 1
    if args.seed is not None:
        obj.setdefault("family", {})["seed"] = args.seed
    if args.format is not None:
        obj.setdefault("output", {})["format"] = args.format
    if args.out is not None:
        obj.setdefault("output", {})["path"] = args.out
    if args.trunc_T is not None:
        obj.setdefault("catalog", {})["comb_halfwidth"] = args.trunc_T
        pair = obj.get("pair")
        if isinstance(pair, dict) and pair.get("source") == "catalog":
            pair.setdefault("config", {})["comb_halfwidth"] = args.trunc_T
    if args.ifs_depth is not None:
        obj.setdefault("quad", {})["ifs_depth"] = args.ifs_depth
    if args.error_budget is not None:
        obj.setdefault("quad", {})["error_budget"] = args.error_budget

    try:
        config = config_from_obj(obj)
        status, text = run(config)
        emit_report(text, config.out_path)
        return status
    except MeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
