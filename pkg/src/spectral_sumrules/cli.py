"""Command line front end: ``verify``, ``sample``, ``rates`` and ``probe``.

Exit codes: 0 success (for ``verify``: PASS or PASS-inf), 1 input error
(a JSON diagnostic goes to stderr; a ``verify`` report with status FLAGGED
is still written), 2 a sum-rule check that FAILed.

Every output carries the tool version, a hash of the effective config and
the seed.  The only line that changes between identical reruns is the
timestamp line: line 2 of a JSON document, line 1 of a CSV file.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .ensembles import EnsembleSpec, empirical_measure, sample
from .ldp import probe_extreme_rate, rate_curve
from .measures import Ensemble, measure_from_family, measure_from_json
from .sumrules import DEFAULT_TOL, verify_sum_rule

TOOL = "spectral-sumrules"
OUT_DIR_ENV = "SPECTRAL_SUMRULES_OUT"
EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


class CliInputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliInputError(message)


def load_schema() -> dict:
    text = resources.files("spectral_sumrules").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def _float_list(text: str) -> list[float]:
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise CliInputError(f"grid must be start:stop:step with step > 0, got {text!r}")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run config; command-line flags override its values")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--out", help=f"output file (default: stdout, or a file under ${OUT_DIR_ENV})")
    common.add_argument("--seed", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--panels", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--ensemble", choices=["hermite", "laguerre", "jacobi", "jacobi-kn"])
    common.add_argument("--tau", type=float)
    common.add_argument("--kappa1", type=float)
    common.add_argument("--kappa2", type=float)

    parser = _Parser(prog=TOOL, description="Sum rules, tridiagonal ensembles and rate probes.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="compare both sides of a sum rule")
    p.add_argument("--measure", help="family[:key=value,...] or a measure JSON file")

    p = sub.add_parser("sample", parents=[common], help="draw one matrix from a tridiagonal ensemble")
    p.add_argument("--n", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--weighted", action="store_true", default=None)

    p = sub.add_parser("rates", parents=[common], help="tabulate outlier rates two ways")
    p.add_argument("--grid", type=_float_list, help="start:stop:step or a comma list")
    p.add_argument("--x", type=float, help="a single grid point")
    p.add_argument("--side", choices=["plus", "minus"])
    p.add_argument("--require-outside", dest="require_outside", action="store_true", default=None)

    p = sub.add_parser("probe", parents=[common], help="Monte Carlo tail probabilities of the extreme eigenvalue")
    p.add_argument("--x", type=float)
    p.add_argument("--nladder", type=_int_list)
    p.add_argument("--draws", type=int)
    p.add_argument("--side", choices=["plus", "minus"])
    p.add_argument("--beta", type=float)
    return parser


def config_from_args(args: argparse.Namespace) -> dict:
    config: dict = {}
    if args.config:
        with open(args.config) as fh:
            config.update(json.load(fh))
    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        if key == "x" and args.command == "rates":
            config["grid"] = [value]
            continue
        config[key] = value
    if config.get("command") != args.command:
        config["command"] = args.command
    return config


def validate_config(config: dict) -> None:
    try:
        jsonschema.validate(config, load_schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise CliInputError(f"config invalid at {path}: {exc.message}") from None


def _hashed_fields(config: dict) -> dict:
    return {k: v for k, v in config.items() if k not in ("out", "format")}


def config_hash(config: dict) -> str:
    blob = json.dumps(_hashed_fields(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _ensemble(config: dict) -> Ensemble:
    name = config["ensemble"]
    if name == "hermite":
        return Ensemble.hermite()
    if name == "laguerre":
        return Ensemble.laguerre(config.get("tau", 0.5))
    return Ensemble.jacobi(config.get("kappa1", 0.0), config.get("kappa2", 0.0))


def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def parse_measure(text: str, ensemble: Ensemble):
    """``family[:key=value,...]`` or a JSON file; law parameters default to the ensemble's."""
    path = Path(text)
    if text.endswith(".json") or path.is_file():
        with open(path) as fh:
            return measure_from_json(json.load(fh))
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    params: dict = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise CliInputError(f"measure parameter {item!r} is not key=value")
        params[key.strip()] = _parse_value(value.strip())
    if family in ("mp", "atom-at-zero"):
        params.setdefault("tau", ensemble.tau if ensemble.name == "laguerre" else 0.5)
    if family == "kmk":
        params.setdefault("kappa1", ensemble.kappa1)
        params.setdefault("kappa2", ensemble.kappa2)
    return measure_from_family(family, params)


# --------------------------------------------------------------------------
# commands (each returns (exit_code, payload, csv_rows, csv_fields))


def cmd_verify(config: dict):
    ens = _ensemble(config)
    mu = parse_measure(config["measure"], ens)
    report = verify_sum_rule(
        ens,
        None,
        mu,
        config.get("depth", 50),
        tol=config.get("tol", DEFAULT_TOL),
        panels=config.get("panels", 64),
    )
    if report.status == "FLAGGED":
        code = EXIT_INPUT  # the report is still written; the diagnostic names the offending atom
    else:
        code = EXIT_OK if report.status in ("PASS", "PASS-inf") else EXIT_FAIL
    return code, report.to_json(), [report.csv_row()], list(report.CSV_FIELDS)


def _sample_spec(config: dict) -> EnsembleSpec:
    kind = {"hermite": "hermite", "laguerre": "laguerre", "jacobi": "jacobi_kn", "jacobi-kn": "jacobi_kn"}[config["ensemble"]]
    return EnsembleSpec(
        kind,
        config.get("n", 100),
        config.get("beta", 2.0),
        config.get("seed", 0),
        config.get("tau", 0.5 if kind == "laguerre" else 1.0),
        config.get("kappa1", 0.0),
        config.get("kappa2", 0.0),
    )


def cmd_sample(config: dict):
    spec = _sample_spec(config)
    data = sample(spec)
    mu = empirical_measure(data, bool(config.get("weighted", False)))
    rows = [{"index": i + 1, "eigenvalue": repr(float(x)), "weight": repr(float(w))} for i, (x, w) in enumerate(zip(mu.nodes, mu.weights))]
    payload = {
        "ensemble": spec.kind,
        "n": spec.n,
        "beta": spec.beta,
        "seed": spec.seed,
        "weighted": bool(config.get("weighted", False)),
        "eigenvalues": mu.nodes.tolist(),
        "weights": mu.weights.tolist(),
    }
    return EXIT_OK, payload, rows, ["index", "eigenvalue", "weight"]


def _fmt(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def cmd_rates(config: dict):
    ens = _ensemble(config)
    law = ens.law
    side = config.get("side", "plus")
    grid = sorted(config["grid"])
    lo, hi = law.support
    inside = [x for x in grid if lo < x < hi]
    if config.get("require_outside") and inside:
        raise CliInputError(f"grid points {inside} lie inside the support [{lo}, {hi}]")
    rows = [
        {"x": r.x, "direct": _fmt(r.direct), "effective": _fmt(r.effective), "discrepancy": _fmt(r.discrepancy)}
        for r in rate_curve(law, side, grid)
    ]
    payload = {"ensemble": ens.label, "side": side, "support": [lo, hi], "rows": rows}
    return EXIT_OK, payload, rows, ["x", "direct", "effective", "discrepancy"]


def cmd_probe(config: dict):
    spec = _sample_spec({**config, "n": config["nladder"][0]})
    report = probe_extreme_rate(spec, config["nladder"], config["x"], config.get("side", "plus"), config.get("draws", 5000))
    doc = report.to_json()
    rows = [{**r, "target": doc["target_rate"]} for r in doc["rows"]]
    fields = ["n", "hits", "p_hat", "ci_lo", "ci_hi", "rate_estimate", "censored", "target"]
    return EXIT_OK, doc, rows, fields


COMMANDS = {"verify": cmd_verify, "sample": cmd_sample, "rates": cmd_rates, "probe": cmd_probe}


# --------------------------------------------------------------------------
# output


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def render(fmt: str, meta: dict, payload, rows, fields) -> str:
    stamp = _timestamp()
    if fmt == "json":
        body = json.dumps({"meta": meta, "result": payload}, indent=2, sort_keys=True)
        return "{\n  \"timestamp\": " + json.dumps(stamp) + ",\n" + body[2:] + "\n"
    buf = io.StringIO()
    buf.write(f"# timestamp: {stamp}\n")
    buf.write("# " + " ".join(f"{k}={meta[k]}" for k in ("tool", "version", "config_hash", "seed")) + "\n")
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _destination(config: dict, digest: str, fmt: str) -> Path | None:
    if config.get("out"):
        return Path(config["out"])
    directory = os.environ.get(OUT_DIR_ENV)
    if directory:
        return Path(directory) / f"{config['command']}-{digest}.{fmt}"
    return None


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = config_from_args(args)
        validate_config(config)
        code, payload, rows, fields = COMMANDS[config["command"]](config)
        fmt = config.get("format", "json")
        digest = config_hash(config)
        meta = {"tool": TOOL, "version": __version__, "config_hash": digest, "seed": config.get("seed", 0), "config": _hashed_fields(config)}
        text = render(fmt, meta, payload, rows, fields)
        dest = _destination(config, digest, fmt)
        if dest is None:
            sys.stdout.write(text)
        else:
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_text(text)
        if code == EXIT_INPUT:
            message = "; ".join(payload["spectral_side"]["problems"])
            sys.stderr.write(json.dumps({"error": {"type": "FlaggedInput", "message": message}}) + "\n")
        return code
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (CliInputError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        diag = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(json.dumps(diag) + "\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
