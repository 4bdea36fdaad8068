"""Command-line harness: counting, multiplier evaluation, verification
sweeps, and operator probes, with machine-readable reports.

Exit codes are the machine contract: 0 clean pass, 1 verified violations,
2 argument or precondition error, 3 work-budget refusal, 4 configuration
error.  Stdout text is informational only.

Reports embed a manifest (subcommand, full parameters, seed, version,
fixture hashes) sufficient to byte-reproduce the hashed payload; wall-clock
metadata is quarantined in a separate field outside the digest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__
from .budget import WorkBudgetError
from .lattice import BallSpec, MarkedClass, ball_count, profile_spectrum
from .multiplier import lambda_batch, m_batch
from .verifier import DEFAULT_SEED, SUITES, canonical_json, run_suite
from . import maxop as mx

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_CONFIG = 4

_FIXTURE_NAMES = ("grids/default.toml", "baselines.json", "report_schema.json")


class ConfigError(ValueError):
    """Malformed grid file or parameter table."""


def _fixture_dir() -> Path:
    return Path(__file__).resolve().parent / "fixtures"


def fixture_hashes() -> dict:
    """Content hashes of the shipped fixture files, for run manifests."""
    out = {}
    base = _fixture_dir()
    for name in _FIXTURE_NAMES:
        path = base / name
        if path.is_file():
            out[name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


def load_baselines() -> dict:
    with open(_fixture_dir() / "baselines.json") as fh:
        return json.load(fh)


@dataclass
class RunManifest:
    """Everything needed to reproduce a report payload byte for byte."""

    subcommand: str
    params: dict
    seed: int | None
    version: str
    fixtures: dict

    def payload(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "fixtures": self.fixtures,
        }


def make_manifest(subcommand: str, params: dict, seed: int | None = None) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        params=params,
        seed=seed,
        version=__version__,
        fixtures=fixture_hashes(),
    )


def report_document(manifest: RunManifest, payload: dict) -> dict:
    """Full report: hashed payload plus manifest, digest, and quarantined
    wall-clock metadata (not covered by the digest)."""
    digest = hashlib.sha256(canonical_json(payload).encode("ascii")).hexdigest()
    return {
        "manifest": manifest.payload(),
        "payload": payload,
        "digest": digest,
        "meta": {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "host": platform.node(),
        },
    }


def write_report(doc: dict, out_dir, stem: str, csv_body: str | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}.json"
    with open(path, "w") as fh:
        fh.write(canonical_json(doc))
        fh.write("\n")
    if csv_body is not None:
        (out / f"{stem}.csv").write_text(csv_body)
    return path


# ---------------------------------------------------------------------------
# report schema validation (hand-rolled, no extra dependency)

def load_report_schema() -> dict:
    with open(_fixture_dir() / "report_schema.json") as fh:
        return json.load(fh)


def validate_report(obj, schema) -> list:
    """Check a document against the shipped schema subset: type (possibly a
    list of alternatives), required/properties for objects, items for
    arrays, enum.  Returns a list of "path: problem" strings, empty when
    the document conforms."""
    problems: list[str] = []

    def type_ok(value, name: str) -> bool:
        return {
            "object": lambda v: isinstance(v, dict),
            "array": lambda v: isinstance(v, list),
            "string": lambda v: isinstance(v, str),
            "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
            "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
            "boolean": lambda v: isinstance(v, bool),
            "null": lambda v: v is None,
        }[name](value)

    def walk(value, spec, path):
        names = spec.get("type")
        if names is not None:
            allowed = names if isinstance(names, list) else [names]
            if not any(type_ok(value, n) for n in allowed):
                problems.append(f"{path}: expected {allowed}, got {type(value).__name__}")
                return
        if "enum" in spec and value not in spec["enum"]:
            problems.append(f"{path}: {value!r} not in {spec['enum']}")
        if isinstance(value, dict):
            for key in spec.get("required", ()):
                if key not in value:
                    problems.append(f"{path}: missing required key {key!r}")
            for key, sub in spec.get("properties", {}).items():
                if key in value:
                    walk(value[key], sub, f"{path}.{key}")
        if isinstance(value, list) and "items" in spec:
            for i, item in enumerate(value):
                walk(item, spec["items"], f"{path}[{i}]")

    walk(obj, schema, "$")
    return problems


# ---------------------------------------------------------------------------
# grid configuration

def _coerce_scalar(text: str):
    try:
        return json.loads(text)
    except (json.JSONDecodeError, ValueError):
        return text


def _split_inline(text: str) -> list:
    """Split "a=1,b=[2,3],c=x" on commas outside brackets."""
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch in "[{":
            depth += 1
        elif ch in "]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return [p for p in (s.strip() for s in parts) if p]


def parse_grid_arg(arg: str | None, suite: str) -> dict:
    """Grid parameters from either a config file (.toml or .json; a table
    named after the suite is selected when present) or inline key=value
    pairs like "n_max=30,dims=[2,4]"."""
    if arg is None:
        return {}
    path = Path(arg)
    looks_like_file = arg.endswith((".toml", ".json")) or path.is_file()
    if looks_like_file:
        if not path.is_file():
            raise ConfigError(f"grid file not found: {arg}")
        try:
            if arg.endswith(".json"):
                data = json.loads(path.read_text())
            else:
                with open(path, "rb") as fh:
                    data = tomllib.load(fh)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse grid file {arg}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("grid file must hold a table of parameters")
        if suite in data and isinstance(data[suite], dict):
            return dict(data[suite])
        if any(key in SUITES for key in data):
            raise ConfigError(f"grid file has no table for suite {suite!r}")
        return dict(data)
    params = {}
    for pair in _split_inline(arg):
        if "=" not in pair:
            raise ConfigError(f"expected key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        params[key.strip()] = _coerce_scalar(value.strip())
    if not params:
        raise ConfigError(f"empty grid specification {arg!r}")
    return params


# ---------------------------------------------------------------------------
# subcommands

def _cmd_count(args) -> int:
    spec = BallSpec(args.d, args.N)
    if args.profile is None:
        count = ball_count(spec, mode=args.mode)
        if args.json:
            doc = report_document(
                make_manifest("count", {"d": args.d, "N": args.N, "mode": args.mode}),
                {"d": args.d, "N": args.N, "count": str(count)},
            )
            print(canonical_json(doc))
        else:
            print(count)
        return EXIT_OK
    marked = MarkedClass.parse(args.profile)
    prof = profile_spectrum(args.d, args.N, marked)
    rows = [
        (m, j, c)
        for m, per_j in enumerate(prof.counts)
        for j, c in enumerate(per_j)
        if c
    ]
    if args.json:
        payload = {
            "d": args.d,
            "N": args.N,
            "marked": args.profile,
            "rows": [{"norm_sq": m, "marked": j, "count": str(c)} for m, j, c in rows],
        }
        doc = report_document(
            make_manifest("count", {"d": args.d, "N": args.N, "profile": args.profile}),
            payload,
        )
        print(canonical_json(doc))
    else:
        print("norm_sq,marked,count")
        for m, j, c in rows:
            print(f"{m},{j},{c}")
    return EXIT_OK


def _parse_xi(text: str, d: int) -> np.ndarray:
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    tokens = [t for t in text.replace(",", " ").split() if t]
    vals = [float(Fraction(tok)) if "/" in tok else float(tok) for tok in tokens]
    if len(vals) != d:
        raise ValueError(f"xi has {len(vals)} coordinates, expected {d}")
    return np.asarray(vals, dtype=np.float64)


def _cmd_multiplier(args) -> int:
    spec = BallSpec(args.d, args.N)
    xi = _parse_xi(args.xi, args.d)
    value = float(m_batch(spec, xi[None, :])[0])
    payload = {"d": args.d, "N": args.N, "xi": [float(v) for v in xi],
               "value": value}
    if args.approximant:
        branch, lam = lambda_batch(spec, xi[None, :])
        payload["lambda"] = float(lam[0])
        payload["branch"] = int(branch[0])
    if args.json:
        doc = report_document(
            make_manifest("multiplier", {"d": args.d, "N": args.N, "xi": args.xi}),
            payload,
        )
        print(canonical_json(doc))
    else:
        print(format(value, ".17g"))
        if args.approximant:
            print(f"lambda[{payload['branch']}] = {format(payload['lambda'], '.17g')}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    params = parse_grid_arg(args.grid, args.suite)
    try:
        report = run_suite(args.suite, params)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    manifest = make_manifest(
        "verify",
        {"suite": args.suite, "grid": params},
        seed=params.get("seed", DEFAULT_SEED),
    )
    doc = report_document(manifest, report.payload())
    schema = load_report_schema()
    problems = validate_report(doc, schema)
    if problems:
        print("report schema violations:", file=sys.stderr)
        for p in problems[:10]:
            print("  " + p, file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        path = write_report(doc, args.out, args.suite, report.to_csv())
        print(f"wrote {path}")
    status = "PASS" if report.passed else "FAIL"
    extra = f" c_hat={report.calibrated_constant:.6g}" if report.calibrated_constant is not None else ""
    print(
        f"{args.suite}: {status} cells={report.cells_tested} "
        f"violations={len(report.violations)} skips={report.hypothesis_skips}{extra}"
    )
    return EXIT_OK if report.passed else EXIT_VIOLATIONS


def _parse_radii(text: str) -> list:
    vals = sorted({int(tok) for tok in text.replace(",", " ").split()})
    if not vals or any(v < 1 for v in vals):
        raise ValueError("radius set must be positive integers")
    return vals


def _cmd_maxop(args) -> int:
    if args.probe == "ellipsoid":
        if not 1 <= args.d <= 4:
            print("ellipsoid probe supports d in 1..4", file=sys.stderr)
            return EXIT_USAGE
    elif not 1 <= args.d <= 5:
        print("operator probes support d in 1..5", file=sys.stderr)
        return EXIT_USAGE
    if args.probe == "norm":
        radii = _parse_radii(args.set)
        rep = mx.operator_norm_probe(args.d, args.M, radii, args.trials, args.seed)
        payload = rep.payload()
        params = {"probe": "norm", "d": args.d, "M": args.M, "set": radii,
                  "trials": args.trials}
    elif args.probe == "square":
        inputs = [("delta", mx.GridFunction.delta(args.d, args.M))]
        for trial in range(args.trials):
            inputs.append((f"random-{trial:03d}", mx.GridFunction.random(args.d, args.M, args.seed, trial)))
        ratios = {}
        best, witness = -math.inf, ""
        gap_max = 0.0
        for name, f in inputs:
            spatial = mx.square_function_apply(f, args.C1, args.C2).norm
            spectral = mx.square_function_norm_spectral(f, args.C1, args.C2)
            gap_max = max(gap_max, abs(spatial - spectral))
            ratio = spatial / f.norm
            ratios[name] = ratio
            if ratio > best:
                best, witness = ratio, name
        payload = {
            "best_ratio": best,
            "witness": witness,
            "ratios": ratios,
            "d": args.d,
            "M": args.M,
            "C1": args.C1,
            "C2": args.C2,
            "trials": args.trials,
            "seed": args.seed,
            "spatial_spectral_gap": gap_max,
        }
        params = {"probe": "square", "d": args.d, "M": args.M,
                  "C1": args.C1, "C2": args.C2, "trials": args.trials}
    else:
        lams = [float(t) for t in args.lambdas.split(",")] if args.lambdas else None
        if lams is None or len(lams) != args.d:
            print("ellipsoid probe needs --lambdas with one weight per axis", file=sys.stderr)
            return EXIT_USAGE
        t_set = [float(t) for t in args.t_set.split(",")] if args.t_set else None
        spec = mx.EllipsoidSpec(args.d, tuple(lams), args.t)
        rep = mx.ellipsoid_probe(spec, t_set, M=args.M)
        payload = rep.payload()
        params = {"probe": "ellipsoid", "d": args.d, "M": args.M,
                  "lambdas": lams, "t": args.t, "t_set": t_set}
    doc = report_document(make_manifest("maxop", params, seed=args.seed), payload)
    if args.out:
        path = write_report(doc, args.out, f"maxop-{args.probe}")
        print(f"wrote {path}")
    print(f"best ratio {payload['best_ratio']:.12g} ({payload['witness']})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxlat",
        description="Lattice-ball counting, averaging multipliers, and bound sweeps.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("count", help="exact lattice-point counts and profiles")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--mode", default="exact", choices=["exact", "float"])
    p.add_argument("--profile", default=None,
                   help='marked-class expression: all | none | abs>=T | in{v1,v2,...}')
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_count)

    p = sub.add_parser("multiplier", help="evaluate the averaging multiplier")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--xi", required=True,
                   help="comma or space separated coordinates (rationals like 1/3 "
                        "allowed), or @file")
    p.add_argument("--approximant", action="store_true",
                   help="also print the Gaussian branch approximant")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_multiplier)

    p = sub.add_parser("verify", help="run an inequality sweep")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--grid", default=None,
                   help="config file (.toml/.json) or inline key=value pairs")
    p.add_argument("--out", default=None, help="directory for report JSON and CSV")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("maxop", help="operator probes on periodized grids")
    p.add_argument("--probe", required=True, choices=["norm", "square", "ellipsoid"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--M", type=int, default=16)
    p.add_argument("--set", default="1,2,4", help="radii for the maximal operator")
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--C1", default="1")
    p.add_argument("--C2", default="1")
    p.add_argument("--lambdas", default=None, help="ellipsoid axis weights, comma separated")
    p.add_argument("--t", type=float, default=2.0, help="ellipsoid radius")
    p.add_argument("--t-set", dest="t_set", default=None,
                   help="radii for the ellipsoid maximal probe")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_maxop)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WorkBudgetError as exc:
        print(f"work budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
