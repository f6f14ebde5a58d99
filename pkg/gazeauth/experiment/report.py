"""
Result tables in CSV or Markdown.

Markdown cells read "mean (SD)" in percent with two decimals, e.g.
"5.75 (0.13)".
"""
import csv
import io
from typing import Dict, List, Sequence, Tuple

from ..core.exceptions import ValidationError
from .spec import ExperimentResult

REPORT_HEADER = ["exp_id", "eer_mean_pct", "eer_sd_pct", "frr_mean_pct", "frr_sd_pct", "unresolved_far"]
FORMATS = ("csv", "markdown")
NO_CHANGE = "—"


def _pct(value: float) -> float:
    # round first so binary noise such as 5.7499999 does not flip the last digit
    return round(value * 100.0, 10)


def format_cell(mean: float, sd: float) -> str:
    """'5.75 (0.13)' for fractions 0.0575 and 0.0013."""
    return f"{_pct(mean):.2f} ({_pct(sd):.2f})"


def _index(results: Sequence[ExperimentResult]) -> Dict[str, ExperimentResult]:
    if not results:
        raise ValidationError("no results to report", suggestions=["Run 'gazeauth exp' or 'gazeauth grid' first"])
    by_id: Dict[str, ExperimentResult] = {}
    for result in results:
        if result.exp_id in by_id:
            raise ValidationError(f"duplicate experiment id {result.exp_id} in report")
        by_id[result.exp_id] = result
    return by_id


def _factor_cells(result: ExperimentResult) -> List[str]:
    spec = result.spec
    if spec is None:
        return ["", "", "", "", ""]
    return [spec.calib_training.value, spec.pipeline.value, spec.axis.value, spec.regime.value, spec.filter.value]


def render_report(results: Sequence[ExperimentResult], fmt: str = "markdown") -> str:
    """
    One row per experiment, in the given order.

    Raises:
        ValidationError: Empty input, duplicate exp_id or unknown format
    """
    _index(results)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in results:
            writer.writerow([
                r.exp_id,
                f"{_pct(r.eer_mean):.2f}", f"{_pct(r.eer_sd):.2f}",
                f"{_pct(r.frr_mean):.2f}", f"{_pct(r.frr_sd):.2f}",
                int(r.unresolved_far),
            ])
        return buf.getvalue()
    if fmt != "markdown":
        raise ValidationError(f"unknown report format '{fmt}'", suggestions=[f"Use one of {', '.join(FORMATS)}"])

    lines = [
        "| Exp | Calibration | Pipeline | Axis | Regime | Filter | EER (%) | FRR (%) |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for r in results:
        frr = format_cell(r.frr_mean, r.frr_sd) + (" *" if r.unresolved_far else "")
        lines.append("| " + " | ".join([r.exp_id, *_factor_cells(r), format_cell(r.eer_mean, r.eer_sd), frr]) + " |")
    if any(r.unresolved_far for r in results):
        lines.append("")
        lines.append("\\* target FAR below the resolution of the impostor score count")
    return "\n".join(lines) + "\n"


def change_marker(mean_a: float, sd_a: float, mean_b: float, sd_b: float) -> str:
    """
    Change from a to b in percentage points.

    "—" when the mean ± SD intervals overlap; otherwise an up arrow for
    an improvement (lower error) and a down arrow for a degradation.
    """
    if abs(mean_b - mean_a) <= sd_a + sd_b:
        return NO_CHANGE
    delta = _pct(mean_b) - _pct(mean_a)
    arrow = "↓" if delta > 0 else "↑"
    return f"{arrow} {delta:+.2f}"


def render_comparison(
    results: Sequence[ExperimentResult],
    pairs: Sequence[Tuple[str, str]],
    fmt: str = "markdown",
) -> str:
    """
    Before/after change table for pairs of experiment ids.

    Raises:
        ValidationError: Missing experiment, empty input or unknown format
    """
    by_id = _index(results)
    missing = sorted({e for pair in pairs for e in pair if e not in by_id})
    if missing:
        raise ValidationError(f"no stored result for {', '.join(missing)}")

    rows = []
    for a, b in pairs:
        ra, rb = by_id[a], by_id[b]
        axis = rb.spec.axis.value if rb.spec else ""
        rows.append([
            f"{a} -> {b}", axis,
            change_marker(ra.eer_mean, ra.eer_sd, rb.eer_mean, rb.eer_sd),
            change_marker(ra.frr_mean, ra.frr_sd, rb.frr_mean, rb.frr_sd),
        ])

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["comparison", "axis", "eer_change", "frr_change"])
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "markdown":
        raise ValidationError(f"unknown report format '{fmt}'", suggestions=[f"Use one of {', '.join(FORMATS)}"])
    lines = ["| Comparison | Axis | EER change | FRR change |", "|---|---|---|---|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines) + "\n"
