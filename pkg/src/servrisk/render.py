"""CSV, JSON and Markdown renderings of grids, scores and oracle reports."""

from __future__ import annotations

import csv
import io
import json
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any

from .config import OutputFormat
from .mc_oracle import GridValidation
from .risk_model import LoanProfile, adjusted_lgd, adjusted_pd, expected_loss
from .serviceability import RiskWeightGrid


def round2(value: float) -> str:
    """Half-even rounding to two decimals of the shortest repr of ``value``."""
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def _pct(sd: float) -> str:
    return f"{Decimal(repr(sd)) * 100:f}".rstrip("0").rstrip(".") + "%"


def _csv(rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _markdown(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def grid_document(grid: RiskWeightGrid, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.CSV:
        rows: list[list[Any]] = [["nsr", *map(repr, grid.sd_axis)]]
        rows += [[repr(n), *map(repr, row)] for n, row in zip(grid.nsr_axis, grid.values)]
        return _csv(rows)
    if fmt is OutputFormat.JSON:
        return _json(
            {
                "stress_factor": grid.stress_factor,
                "base_nsr": grid.base_nsr,
                "family": grid.family.value,
                "skew": grid.skew,
                "nsr_axis": list(grid.nsr_axis),
                "sd_axis": list(grid.sd_axis),
                "values": [list(row) for row in grid.values],
            }
        )
    header = ["NSR", *map(_pct, grid.sd_axis)]
    body = [[repr(n), *map(round2, row)] for n, row in zip(grid.nsr_axis, grid.values)]
    return _markdown(header, body)


def score_document(profile: LoanProfile, fmt: OutputFormat) -> str:
    results = {
        "base_pd": profile.base_pd,
        "base_lgd": profile.base_lgd,
        "adjusted_pd": adjusted_pd(profile),
        "adjusted_lgd": adjusted_lgd(profile),
        "expected_loss": expected_loss(profile),
    }
    if fmt is OutputFormat.JSON:
        return _json(
            {
                **results,
                "pd_cap": profile.pd_cap,
                "pd_floor": profile.pd_floor,
                "pd_weights": [{"name": n, "factor": f} for n, f in profile.pd_weights],
                "lgd_weights": [{"name": n, "factor": f} for n, f in profile.lgd_weights],
            }
        )
    rows = [["pd_weight", n, f] for n, f in profile.pd_weights]
    rows += [["lgd_weight", n, f] for n, f in profile.lgd_weights]
    rows += [[k, "", v] for k, v in results.items()]
    if fmt is OutputFormat.CSV:
        return _csv([["kind", "name", "value"], *[[k, n, repr(v)] for k, n, v in rows]])
    return _markdown(["Kind", "Name", "Value"], [[k, n, f"{v:.6g}"] for k, n, v in rows])


_REPORT_FIELDS = [
    "nsr",
    "sd",
    "samples",
    "empirical_pd_num",
    "empirical_pd_den",
    "empirical_weight",
    "standard_error",
    "analytic_weight",
    "z_score",
]


def summary_line(result: GridValidation) -> str:
    s = result.summary()
    return (
        f"exceptions: {s['exceptions']} of {s['cells_validated']} validated cells "
        f"with |z| > {s['z_limit']:g} ({s['cells_skipped']} skipped)"
    )


def validation_document(result: GridValidation, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.JSON:
        return _json({"reports": [r.to_dict() for r in result.reports], "summary": result.summary()})
    if fmt is OutputFormat.CSV:
        rows: list[list[Any]] = [[*_REPORT_FIELDS, "status"]]
        flagged = {id(r) for r in result.exceptions()}
        for r in result.reports:
            d = r.to_dict()
            rows.append([repr(d[k]) if isinstance(d[k], float) else d[k] for k in _REPORT_FIELDS] + ["exception" if id(r) in flagged else "ok"])
        for s in result.skipped:
            rows.append([repr(s.nsr), repr(s.sd)] + [""] * (len(_REPORT_FIELDS) - 2) + [f"skipped: {s.reason}"])
        return _csv(rows)
    header = ["NSR", "SD", "Samples", "Empirical", "Std err", "Analytic", "z"]
    body = [
        [repr(r.case.nsr), _pct(r.case.distribution.relative_sd), str(r.samples), f"{r.empirical_weight:.4f}",
         f"{r.standard_error:.2g}", f"{r.analytic_weight:.4f}", f"{r.z_score:+.2f}"]
        for r in result.reports
    ]
    text = _markdown(header, body)
    for s in result.skipped:
        text += f"\nskipped NSR {s.nsr!r}, SD {_pct(s.sd)}: {s.reason}"
    if result.skipped:
        text += "\n"
    return text + "\n" + summary_line(result) + "\n"
