#!/usr/bin/env python3
"""Download the three public benchmark datasets and convert them to data/ CSVs.

Produces data/haberman.csv (306 rows, minority "died"), data/blood_service.csv
(748 rows, minority "donated"), and data/vertebral.csv (310 rows, minority
"normal"), each in the package CSV format: header row, float feature columns,
label in the last column. The acceptance benchmark runs only when these files
exist; this machine needs outbound access to archive.ics.uci.edu.
"""

from __future__ import annotations

import csv
import io
import sys
import urllib.error
import urllib.request
import zipfile
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def fetch(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read()


def write_csv(name: str, header: list[str], rows: list[list[str]]) -> None:
    path = DATA_DIR / name
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def haberman() -> None:
    """Survival after surgery: 3 features, labels 1 (survived) / 2 (died)."""
    raw = fetch(f"{UCI}/haberman/haberman.data").decode("utf-8")
    rows = []
    for line in raw.splitlines():
        if not line.strip():
            continue
        age, year, nodes, cls = line.strip().split(",")
        rows.append([age, year, nodes, "died" if cls == "2" else "survived"])
    write_csv("haberman.csv", ["age", "op_year", "axillary_nodes", "label"], rows)


def blood_service() -> None:
    """Blood transfusion service: 4 features, labels 0 (idle) / 1 (donated)."""
    raw = fetch(f"{UCI}/blood-transfusion/transfusion.data").decode("utf-8")
    lines = [line for line in raw.splitlines() if line.strip()]
    rows = []
    for line in lines[1:]:  # first line is the original header
        recency, frequency, monetary, months, cls = line.strip().split(",")
        rows.append(
            [recency, frequency, monetary, months, "donated" if cls == "1" else "idle"]
        )
    write_csv(
        "blood_service.csv",
        ["recency", "frequency", "monetary", "months", "label"],
        rows,
    )


def vertebral() -> None:
    """Vertebral column, two-class variant: 6 features, labels AB / NO."""
    payload = fetch(f"{UCI}/00212/vertebral_column_data.zip")
    with zipfile.ZipFile(io.BytesIO(payload)) as archive:
        raw = archive.read("column_2C.dat").decode("utf-8")
    rows = []
    for line in raw.splitlines():
        if not line.strip():
            continue
        *features, cls = line.split()
        rows.append([*features, "abnormal" if cls == "AB" else "normal"])
    write_csv(
        "vertebral.csv",
        ["incidence", "tilt", "angle", "slope", "radius", "spondylolisthesis", "label"],
        rows,
    )


def main() -> int:
    DATA_DIR.mkdir(exist_ok=True)
    try:
        haberman()
        blood_service()
        vertebral()
    except (urllib.error.URLError, OSError) as exc:
        print(
            f"download failed: {exc}\n"
            "This environment has no route to archive.ics.uci.edu. Run this "
            "script on a networked machine and copy the resulting data/ "
            "directory into the repository.",
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
