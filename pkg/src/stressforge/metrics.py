"""Field-comparison metrics: MSE, MAE, PMAE, PAE, PPAE.

All five are computed per case over the full m x m image (void pixels
included) and aggregated as the arithmetic mean of per-case values. The
normalized metrics use per-case denominators: PMAE divides the MAE by the
ground-truth range, PPAE divides the peak error by the ground-truth maximum;
cases where those denominators degenerate are excluded from the aggregate
with a reported count.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ShapeError, UndefinedMetricError


def _pair(truth, pred) -> tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(truth, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if truth.shape != pred.shape:
        raise ShapeError(f"field shapes differ: {truth.shape} vs {pred.shape}")
    return truth, pred


def mae(truth, pred) -> float:
    """Mean absolute error (MPa)."""
    truth, pred = _pair(truth, pred)
    return float(np.mean(np.abs(truth - pred)))


def mse(truth, pred) -> float:
    """Mean squared error (MPa^2)."""
    truth, pred = _pair(truth, pred)
    return float(np.mean((truth - pred) ** 2))


def pmae(truth, pred) -> float:
    """MAE normalized by the ground-truth range, in percent."""
    truth, pred = _pair(truth, pred)
    span = float(truth.max() - truth.min())
    if span <= 0.0:
        raise UndefinedMetricError("PMAE undefined: ground-truth field is constant")
    return mae(truth, pred) / span * 100.0

def pae(truth, pred) -> float:
    """Absolute difference of the two field maxima (MPa)."""
    truth, pred = _pair(truth, pred)
    return float(abs(truth.max() - pred.max()))


def ppae(truth, pred) -> float:
    """Peak error normalized by the ground-truth maximum, in percent."""
    truth, pred = _pair(truth, pred)
    peak = float(truth.max())
    if peak <= 0.0:
        raise UndefinedMetricError("PPAE undefined: ground-truth maximum is not positive")
    return pae(truth, pred) / peak * 100.0


@dataclass
class CaseMetrics:
    """Per-case metric values; normalized entries are None when undefined."""

    case_id: int
    mse: float
    mae: float
    pmae: float | None
    pae: float
    ppae: float | None


def evaluate_case(case_id: int, truth, pred) -> CaseMetrics:
    """All five metrics for one case, tolerating degenerate denominators."""
    truth, pred = _pair(truth, pred)
    try:
        pmae_value = pmae(truth, pred)
    except UndefinedMetricError:
        pmae_value = None
    try:
        ppae_value = ppae(truth, pred)
    except UndefinedMetricError:
        ppae_value = None
    return CaseMetrics(case_id, mse(truth, pred), mae(truth, pred),
                       pmae_value, pae(truth, pred), ppae_value)


_METRIC_NAMES = ("mse", "mae", "pmae", "pae", "ppae")


@dataclass
class MetricReport:
    """Per-case records plus arithmetic-mean aggregates."""

    cases: list
    aggregates: dict
    exclusions: dict = field(default_factory=dict)

    def summary_line(self) -> str:
        parts = []
        for name in _METRIC_NAMES:
            value = self.aggregates[name]
            unit = "%" if name in ("pmae", "ppae") else ""
            parts.append(f"{name.upper()}={value:.6g}{unit}" if value is not None
                         else f"{name.upper()}=n/a")
        excluded = sum(self.exclusions.values())
        return f"cases={len(self.cases)} " + " ".join(parts) + f" excluded={excluded}"


def aggregate(case_metrics) -> MetricReport:
    """Mean of each metric over cases; undefined values are excluded and
    counted."""
    cases = list(case_metrics)
    if not cases:
        raise EmptyInputError("cannot aggregate an empty set of case metrics")
    aggregates, exclusions = {}, {}
    for name in _METRIC_NAMES:
        values = [getattr(record, name) for record in cases]
        defined = [v for v in values if v is not None]
        exclusions[name] = len(values) - len(defined)
        aggregates[name] = float(np.mean(defined)) if defined else None
    return MetricReport(cases, aggregates, exclusions)


def report_to_json(report: MetricReport, path):
    data = {
        "cases": [
            {"case_id": record.case_id, **{name: getattr(record, name) for name in _METRIC_NAMES}}
            for record in report.cases
        ],
        "aggregates": report.aggregates,
        "exclusions": report.exclusions,
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def report_to_csv(report: MetricReport, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("case_id",) + _METRIC_NAMES)
        for record in report.cases:
            writer.writerow([record.case_id] + [
                "" if getattr(record, name) is None else repr(getattr(record, name))
                for name in _METRIC_NAMES
            ])
        writer.writerow(["aggregate"] + [
            "" if report.aggregates[name] is None else repr(report.aggregates[name])
            for name in _METRIC_NAMES
        ])
