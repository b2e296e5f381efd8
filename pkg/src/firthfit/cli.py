"""Command-line front end: ``firthfit {fit,check-separation,verify}``.

JSON goes to ``--out`` or stdout, a one-line human summary to stderr.
Exit codes: 0 success, 2 data error, 3 non-convergence or failed verification.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError, ParseError
from .fit import FitConfig, FitStatus, fit_mle, fit_penalized
from .harness import run_verification
from .model import Dataset, LinkKind
from .separation import detect_separation

SCHEMA_TAG = "firth-fit/1"
EXIT_OK, EXIT_DATA, EXIT_FAILED = 0, 2, 3
_NONFINITE = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


@dataclass(frozen=True)
class RunSpec:
    subcommand: str
    input: Optional[str] = None
    link: str = LinkKind.LOGIT.value
    penalized: bool = True
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    seed: int = 7
    out: Optional[str] = None


@dataclass
class OutputRecord:
    spec: dict
    fit: Optional[dict] = None
    separation: Optional[dict] = None
    verify: Optional[dict] = None
    schema: str = SCHEMA_TAG

    def to_dict(self) -> dict:
        return _encode(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "OutputRecord":
        raw = _decode(json.loads(text))
        if raw.get("schema") != SCHEMA_TAG:
            raise ParseError(f"unsupported schema {raw.get('schema')!r}")
        return cls(**raw)


def _encode(obj):
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "NaN" if math.isnan(obj) else ("Infinity" if obj > 0 else "-Infinity")
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


def read_csv(path) -> Dataset:
    """Read ``y,m,x1,...,xp`` rows; no implicit intercept is added."""
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError("empty CSV file")
    header = [h.strip() for h in rows[0]]
    p = len(header) - 2
    if p < 1 or header != ["y", "m"] + [f"x{j}" for j in range(1, p + 1)]:
        raise ParseError("header must be y,m,x1,...,xp")
    y, m, X = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            vals = [Decimal(v.strip()) for v in row]
        except InvalidOperation:
            raise ParseError(f"line {lineno}: non-numeric or missing value") from None
        if not all(v.is_finite() for v in vals):
            raise ParseError(f"line {lineno}: non-finite value")
        y.append(float(vals[0]))
        m.append(float(vals[1]))
        X.append([float(v) for v in vals[2:]])
    if not X:
        raise ParseError("CSV has a header but no data rows")
    return Dataset(np.array(X), y, m)


def _config(spec: RunSpec) -> FitConfig:
    kw = {}
    if spec.tol is not None:
        kw["grad_tol"] = spec.tol
    if spec.max_iter is not None:
        kw["max_iter"] = spec.max_iter
    return FitConfig(**kw)


def run(spec: RunSpec) -> tuple[int, Optional[OutputRecord], str]:
    """Execute one command. Returns ``(exit_code, record, summary)``.

    ``record`` is ``None`` on data errors, in which case ``summary`` holds the
    error message.
    """
    rec = OutputRecord(spec=asdict(spec))
    try:
        if spec.subcommand == "verify":
            rep = run_verification(seed=spec.seed)
            rec.verify = rep
            failed = [k for k, ok in rep["checks"].items() if not ok]
            summary = (f"verify seed={spec.seed}: {len(rep['checks']) - len(failed)}/"
                       f"{len(rep['checks'])} checks passed"
                       + (f"; failed: {', '.join(failed)}" if failed else ""))
            return (EXIT_FAILED if failed else EXIT_OK), rec, summary

        ds = read_csv(spec.input)
        sep = detect_separation(ds)
        rec.separation = sep.to_dict()
        if spec.subcommand == "check-separation":
            return EXIT_OK, rec, f"separation: {sep.kind.value}"

        fitter = fit_penalized if spec.penalized else fit_mle
        res = fitter(ds, spec.link, _config(spec))
        rec.fit = res.to_dict()
        beta = ", ".join(f"{b:.7g}" for b in res.beta_hat)
        summary = (f"fit link={spec.link} penalized={spec.penalized} "
                   f"status={res.status.value} iterations={res.iterations} "
                   f"beta_hat=[{beta}] separation={sep.kind.value}")
        code = EXIT_OK if res.status is FitStatus.CONVERGED else EXIT_FAILED
        return code, rec, summary
    except DataError as exc:
        return EXIT_DATA, None, f"error: {type(exc).__name__}: {exc}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firthfit",
        description="Jeffreys-prior penalized binomial regression")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--out", help="write JSON here instead of stdout")

    fit = sub.add_parser("fit", help="fit a binomial regression")
    fit.add_argument("input", help="CSV with header y,m,x1,...,xp")
    fit.add_argument("--link", choices=[k.value for k in LinkKind], default="logit")
    fit.add_argument("--no-penalty", dest="penalized", action="store_false",
                     help="maximize the plain likelihood")
    fit.add_argument("--tol", type=float, help="gradient sup-norm tolerance")
    fit.add_argument("--max-iter", type=int, dest="max_iter")
    common(fit)

    sep = sub.add_parser("check-separation", help="detect data separation")
    sep.add_argument("input")
    common(sep)

    ver = sub.add_parser("verify", help="run the numerical existence checks")
    ver.add_argument("--seed", type=int, default=7)
    common(ver)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = RunSpec(**{k: v for k, v in vars(args).items()
                      if k in RunSpec.__dataclass_fields__})
    try:
        code, rec, summary = run(spec)
    except ValueError as exc:  # invalid numeric flag values
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(summary, file=sys.stderr)
    if rec is not None:
        text = rec.to_json()
        if spec.out:
            Path(spec.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
