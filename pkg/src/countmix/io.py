"""Count-file ingestion and serialization of fits and reports.

Count files are plain text with ``#key=value`` directives followed by data
lines.  ``#format=raw`` files hold one nonnegative count per line;
``#format=fingerprint`` files hold ``j,phi_j`` pairs.  Optional directives:
``#n=`` (concentration; defaults to the total count mass), ``#k=`` (alphabet
size; defaults to the number of cells), and ``#tail=`` (cells binned into an
unbounded top bucket, carried as metadata and excluded from fits).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, TextIO, Union

import numpy as np

from .base import CountData, ParseError
from .evaluate import GofReport
from .functionals import EstimateReport
from .npmle import FitResult, PenalizedFitResult

__all__ = [
    "FIT_SCHEMA",
    "REPORT_SCHEMAS",
    "read_counts",
    "write_counts",
    "write_fit",
    "write_report",
]

_DIRECTIVES = ("format", "n", "k", "tail")


def _iter_lines(source: Union[str, Path, TextIO]):
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            yield from enumerate(handle, start=1)
    else:
        yield from enumerate(source, start=1)


def read_counts(source: Union[str, Path, TextIO]) -> CountData:
    """Parse a count file (path or open text stream) into CountData.

    Raw mode yields the counts verbatim; fingerprint mode expands each
    ``j,phi_j`` pair into phi_j copies of j.  Malformed lines raise
    ``ParseError`` with their line number.
    """
    fmt: Optional[str] = None
    n: Optional[int] = None
    k: Optional[int] = None
    tail = 0
    raw_counts: list[int] = []
    phi: dict[int, int] = {}
    for lineno, line in _iter_lines(source):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            if "=" not in text:
                raise ParseError("directive must look like #key=value", lineno)
            key, _, value = text[1:].partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in _DIRECTIVES:
                raise ParseError(f"unknown directive {key!r}", lineno)
            if key == "format":
                if value not in ("raw", "fingerprint"):
                    raise ParseError(f"unknown format {value!r}", lineno)
                fmt = value
            else:
                try:
                    parsed = int(value)
                except ValueError:
                    raise ParseError(f"directive #{key} needs an integer", lineno) from None
                if key == "n":
                    n = parsed
                elif key == "k":
                    k = parsed
                else:
                    tail = parsed
            continue
        if fmt is None:
            raise ParseError("data before a #format directive", lineno)
        if fmt == "raw":
            try:
                value = int(text)
            except ValueError:
                raise ParseError(f"expected an integer count, got {text!r}", lineno) from None
            if value < 0:
                raise ParseError("counts must be nonnegative", lineno)
            raw_counts.append(value)
        else:
            parts = text.split(",")
            if len(parts) != 2:
                raise ParseError("fingerprint lines must look like j,phi_j", lineno)
            try:
                j, count = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"expected integers, got {text!r}", lineno) from None
            if j < 0 or count < 0:
                raise ParseError("fingerprint entries must be nonnegative", lineno)
            if j in phi:
                raise ParseError(f"duplicate fingerprint value {j}", lineno)
            phi[j] = count
    if fmt is None:
        raise ParseError("missing #format directive")
    if fmt == "raw":
        counts = np.array(raw_counts, dtype=np.int64)
    else:
        js = sorted(phi)
        counts = np.repeat(np.array(js, dtype=np.int64), [phi[j] for j in js])
    if n is None:
        total = int(counts.sum())
        if total == 0:
            raise ParseError("#n is required when every count is zero")
        n = total
    return CountData(counts, n=n, k=k, tail=tail)


def write_counts(data: CountData, fmt: str = "raw") -> str:
    """Serialize CountData so that reading the output reproduces it."""
    if fmt not in ("raw", "fingerprint"):
        raise ParseError(f"unknown format {fmt!r}")
    lines = [f"#format={fmt}", f"#n={data.n}", f"#k={data.k}"]
    if data.tail:
        lines.append(f"#tail={data.tail}")
    if fmt == "raw":
        lines.extend(str(int(c)) for c in data.counts)
    else:
        values, counts = np.unique(data.counts, return_counts=True)
        lines.extend(f"{int(v)},{int(c)}" for v, c in zip(values, counts))
    return "\n".join(lines) + "\n"


FIT_SCHEMA = {
    "type": "object",
    "required": [
        "v",
        "atoms",
        "weights",
        "log_likelihood",
        "optimality_gap",
        "iterations",
        "converged",
    ],
    "properties": {
        "v": {"const": 1},
        "atoms": {"type": "array", "items": {"type": "number"}},
        "weights": {"type": "array", "items": {"type": "number"}},
        "log_likelihood": {"type": "number"},
        "optimality_gap": {"type": "number", "minimum": 0},
        "iterations": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
    },
}

REPORT_SCHEMAS = {
    "estimate": {
        "type": "object",
        "required": ["v", "type", "value", "method"],
        "properties": {
            "v": {"const": 1},
            "type": {"const": "estimate"},
            "value": {"type": "number"},
            "method": {"type": "string"},
        },
    },
    "gof": {
        "type": "object",
        "required": ["v", "type", "statistic", "dof", "p_value", "expected", "truncation"],
        "properties": {
            "v": {"const": 1},
            "type": {"const": "gof"},
            "dof": {"type": "integer"},
            "p_value": {"type": "number", "minimum": 0, "maximum": 1},
            "expected": {"type": "array", "items": {"type": "number"}},
            "truncation": {"type": "integer"},
        },
    },
    "penalized": {
        "type": "object",
        "required": ["v", "type", "k_hat", "atoms", "weights", "penalized_objective", "profile"],
        "properties": {
            "v": {"const": 1},
            "type": {"const": "penalized"},
            "k_hat": {"type": "number"},
            "profile": {"type": "array"},
        },
    },
}


def write_fit(fit: FitResult) -> str:
    """Fit as a JSON document; floats round-trip exactly through the text."""
    doc = {
        "v": 1,
        "atoms": fit.mixing.atoms.tolist(),
        "weights": fit.mixing.weights.tolist(),
        "log_likelihood": fit.log_likelihood,
        "optimality_gap": fit.optimality_gap,
        "iterations": fit.iterations,
        "converged": fit.converged,
    }
    return json.dumps(doc, indent=2)


def write_report(report) -> str:
    """Serialize an estimate, goodness-of-fit, or penalized-fit report."""
    if isinstance(report, EstimateReport):
        doc = {
            "v": 1,
            "type": "estimate",
            "value": report.value,
            "method": report.method,
            "parts": list(report.parts) if report.parts is not None else None,
            "raw": report.raw,
            "bounds": list(report.bounds) if report.bounds is not None else None,
        }
    elif isinstance(report, GofReport):
        stat = report.statistic
        doc = {
            "v": 1,
            "type": "gof",
            "statistic": stat if np.isfinite(stat) else "inf",
            "dof": report.dof,
            "p_value": report.p_value,
            "expected": np.asarray(report.expected).tolist(),
            "truncation": report.truncation,
            "degenerate": report.degenerate,
        }
    elif isinstance(report, PenalizedFitResult):
        doc = {
            "v": 1,
            "type": "penalized",
            "k_hat": report.k_hat,
            "atoms": report.mixing.atoms.tolist(),
            "weights": report.mixing.weights.tolist(),
            "penalized_objective": report.penalized_objective,
            "profile": [[kp, obj] for kp, obj in report.profile],
        }
    else:
        raise TypeError(f"cannot serialize report of type {type(report).__name__}")
    return json.dumps(doc, indent=2)
