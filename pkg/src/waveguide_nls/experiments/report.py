"""Experiment reports: records, fitted slopes, criteria and flat CSV output."""
from __future__ import annotations

from dataclasses import dataclass, field
import csv
import io
import json
import math

import numpy as np

CSV_COLUMNS = {
    "strichartz": ["N", "p", "member", "ratio", "sup_ratio", "slope", "residual", "pass"],
    "bilinear": ["N1", "N2", "member", "ratio", "slope", "pass"],
    "conservation": ["kappa", "t", "mass_drift", "energy_drift", "momentum_drift"],
    "picard": ["size", "iter", "distance", "factor"],
    "smalldata": ["kappa", "t", "h1", "ratio"],
    "focusing": ["kappa", "t", "max_abs", "growth"],
    "tail": ["kappa", "t", "tail", "bound"],
}


def clean(obj):
    """Make a value JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return obj


@dataclass(frozen=True)
class Criterion:
    name: str
    value: float | None
    threshold: float | None
    passed: bool
    note: str = ""

    def to_dict(self):
        return clean({"name": self.name, "value": self.value, "threshold": self.threshold,
                      "passed": self.passed, "note": self.note})


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    records: list
    summary: dict
    criteria: list
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.criteria) and all(c["passed"] for c in self.criteria)

    def to_dict(self, with_meta: bool = True) -> dict:
        out = {"kind": self.kind, "config": self.config, "records": self.records,
               "summary": self.summary, "criteria": self.criteria, "passed": self.passed}
        if with_meta:
            out["meta"] = self.meta
        return clean(out)

    def to_json(self, with_meta: bool = True) -> str:
        return json.dumps(self.to_dict(with_meta), indent=1, sort_keys=True)

    def records_json(self) -> str:
        """The deterministic part: everything except wall-clock metadata."""
        return self.to_json(with_meta=False)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        for key in ("kind", "config", "records", "summary", "criteria"):
            if key not in data:
                raise ValueError(f"malformed report: missing {key!r}")
        if not isinstance(data["records"], list):
            raise ValueError("malformed report: records must be a list")
        return cls(data["kind"], data["config"], data["records"], data["summary"],
                   data["criteria"], data.get("meta", {}))

    @classmethod
    def load(cls, path) -> "ExperimentReport":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"malformed report: {exc}") from None
        if not isinstance(data, dict):
            raise ValueError("malformed report: top level must be an object")
        return cls.from_dict(data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def csv_rows(self):
        """Column names and flat rows; sweep rows repeat their fit results."""
        cols = CSV_COLUMNS[self.kind]
        if self.kind == "strichartz":
            fits = {float(f["p"]): f for f in self.summary["fits"]}
            rows = []
            for r in self.records:
                f = fits[float(r["p"])]
                sup = dict((float(n), v) for n, v in f["sup"])
                rows.append([r["N"], r["p"], r["member"], r["ratio"], sup[float(r["N"])],
                             f["slope"], f["residual"], f["passed"]])
            return cols, rows
        if self.kind == "bilinear":
            fits = {int(f["N2"]): f for f in self.summary["fits"]}
            rows = [[r["N1"], r["N2"], r["member"], r["ratio"], fits[int(r["N2"])]["slope"],
                     fits[int(r["N2"])]["passed"]] for r in self.records]
            return cols, rows
        return cols, [[r.get(c) for c in cols] for r in self.records if r.get("csv", True)]

    def csv_text(self) -> str:
        cols, rows = self.csv_rows()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())


def loglog_fit(x, y):
    """OLS fit of ``log y = slope log x + b``.

    Returns ``(slope, intercept, residual)`` where ``residual`` is the sum of
    squared residuals in log space.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.unique(x).size < 2:
        raise ValueError("log-log fit needs at least two distinct abscissae")
    if (x <= 0).any() or (y <= 0).any():
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    coef = np.polyfit(lx, ly, 1)
    res = ly - np.polyval(coef, lx)
    return float(coef[0]), float(coef[1]), float(np.sum(res ** 2))


def member_seed(seed: int, member: int, *extra) -> list:
    """Stable per-member entropy for ``numpy.random.default_rng``."""
    return [int(seed), int(member), *[int(e) for e in extra]]
