"""Ratio reports: the uniform record for every verified formula.

Formula identifiers are the short catalog labels used across this package,
its CLI and its CSV output (e.g. "1.7" is the chord form of the window
second moment, "2.1" the iterated-product window formula, "6.16" the exact
substitution identity).  Hard inequalities carry pass/fail verdicts;
asymptotic relations are judged only as trends over a sweep of increasing T.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

__all__ = ["RatioReport", "make_report", "trend_verdict", "write_report_csv"]

#: verdict vocabulary
PASS, FAIL, DIAGNOSTIC, TREND_PASS, TREND_FAIL, PENDING = (
    "pass", "fail", "diagnostic", "trend-pass", "trend-fail", "pending-sweep")

#: trend acceptance band for the final ratio of a sweep
TREND_BAND = (0.4, 2.5)


@dataclass(frozen=True)
class RatioReport:
    """One verified formula instance: both sides, their ratio, a verdict."""

    formula_id: str
    T: float
    U: float
    n: int
    lhs: float
    rhs: float
    ratio: float
    verdict: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rhs != 0.0:
            expected = self.lhs / self.rhs
            if not (abs(self.ratio - expected) <= 1e-12 * max(1.0, abs(expected))):
                raise ValueError("ratio must equal lhs/rhs")


def make_report(formula_id, T, U, n, lhs, rhs, verdict=DIAGNOSTIC, **meta):
    if rhs == 0.0:
        raise ZeroDivisionError(f"formula {formula_id}: zero right-hand side")
    return RatioReport(formula_id=str(formula_id), T=float(T), U=float(U), n=int(n),
                       lhs=float(lhs), rhs=float(rhs), ratio=float(lhs) / float(rhs),
                       verdict=verdict, meta=meta)


def trend_verdict(reports):
    """Judge a sweep of reports (same formula, strictly increasing T).

    The sweep passes when the final ratio lies within TREND_BAND and
    |ratio - 1| does not increase at the last step.  This is deliberately
    loose: the underlying convergence is logarithmic, so a tight numeric
    assertion at fixed T would be fiction.
    """
    if len(reports) < 2:
        raise ValueError("trend needs at least two sweep points")
    ts = [r.T for r in reports]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("sweep must have strictly increasing T")
    ratios = [r.ratio for r in reports]
    final = ratios[-1]
    ok_band = TREND_BAND[0] <= final <= TREND_BAND[1]
    ok_step = abs(ratios[-1] - 1.0) <= abs(ratios[-2] - 1.0) + 1e-12
    return TREND_PASS if (ok_band and ok_step) else TREND_FAIL


_CSV_COLUMNS = ["formula_id", "T", "U", "n", "F", "lhs", "rhs", "ratio", "verdict"]


def write_report_csv(reports, path_or_file):
    """Write reports as CSV with the stable column set.

    The F column comes from ``meta['F']`` when present.  Output is
    deterministic: row order follows (formula_id, T) and floats use repr.
    """
    rows = sorted(reports, key=lambda r: (r.formula_id, r.T, r.meta.get("k", -1)))

    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_CSV_COLUMNS)
        for r in rows:
            w.writerow([r.formula_id, repr(r.T), repr(r.U), r.n,
                        r.meta.get("F", ""), repr(r.lhs), repr(r.rhs),
                        repr(r.ratio), r.verdict])

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w", newline="") as fh:
            _emit(fh)
    elif isinstance(path_or_file, io.TextIOBase) or hasattr(path_or_file, "write"):
        _emit(path_or_file)
    else:
        raise TypeError("expected a path or a writable text file")
