"""CSV writers for analysis reports, attack candidates and orbits."""

import csv
from typing import Iterable, TextIO, Union

from pydantic import BaseModel, Field

REPORT_HEADER = ["test", "subject", "metric", "value"]
ORBIT_HEADER = ["k", "x"]


class ReportRow(BaseModel):
    test: str = Field(description="Analysis test name")
    subject: str = Field(description="Corpus entry, grid or 'all' for aggregates")
    metric: str
    value: Union[int, float, str]


def format_value(value: Union[int, float, str]) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_report_csv(rows: Iterable[ReportRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for row in rows:
        writer.writerow([row.test, row.subject, row.metric, format_value(row.value)])


def write_attack_csv(candidates, stream: TextIO, with_x0: bool = False) -> None:
    """Candidates ranked by r: ``rank,r,matched_bytes`` (plus ``x0`` for (r, x0) searches)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["rank", "r", "matched_bytes"] + (["x0"] if with_x0 else []))
    for rank, candidate in enumerate(candidates, start=1):
        row = [rank, f"{candidate.r:.9f}", candidate.matched_bytes]
        if with_x0:
            row.append(f"{candidate.x0:.17g}")
        writer.writerow(row)


def write_orbit_csv(values: Iterable[float], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(ORBIT_HEADER)
    for k, x in enumerate(values):
        writer.writerow([k, f"{x:.17g}"])
