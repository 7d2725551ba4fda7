#!/usr/bin/env python3
"""Fetch the Breast Cancer Wisconsin (Original) table and write data/breastw.csv.

Source: UCI repository, 699 rows. Preprocessing (the standard anomaly
detection variant of this table): drop the id column, drop the 16 rows
with a missing bare_nuclei value, map class 4 (malignant) to label 1 and
class 2 (benign) to label 0. Result: 683 rows, 9 integer features in
1..10, 239 anomalies.

Needs network access to one of the mirrors below; uses only the Python
standard library.
"""

import csv
import io
import sys
import urllib.error
import urllib.request
from pathlib import Path

MIRRORS = [
    "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/breast-cancer-wisconsin.data",
    "https://raw.githubusercontent.com/jbrownlee/Datasets/master/breast-cancer-wisconsin.csv",
]

FEATURES = [
    "clump_thickness",
    "cell_size_uniformity",
    "cell_shape_uniformity",
    "marginal_adhesion",
    "single_epithelial_cell_size",
    "bare_nuclei",
    "bland_chromatin",
    "normal_nucleoli",
    "mitoses",
]


def download() -> str:
    last_error = None
    for url in MIRRORS:
        try:
            with urllib.request.urlopen(url, timeout=30) as response:
                text = response.read().decode("ascii")
            print(f"fetched {url}")
            return text
        except (urllib.error.URLError, OSError) as e:
            print(f"mirror failed: {url}: {e}", file=sys.stderr)
            last_error = e
    raise SystemExit(f"every mirror failed; last error: {last_error}")


def main() -> None:
    out_path = Path(__file__).resolve().parent.parent / "data" / "breastw.csv"
    raw = download()

    rows = []
    n_missing = 0
    for record in csv.reader(io.StringIO(raw)):
        if not record:
            continue
        if len(record) != 11:
            raise SystemExit(f"expected 11 fields (id, 9 features, class): {record}")
        features, klass = record[1:10], record[10]
        if "?" in features:
            n_missing += 1
            continue
        values = [int(v) for v in features]
        if not all(1 <= v <= 10 for v in values):
            raise SystemExit(f"feature outside 1..10: {record}")
        if klass not in ("2", "4"):
            raise SystemExit(f"class must be 2 or 4: {record}")
        rows.append(values + [1 if klass == "4" else 0])

    n_anomalies = sum(r[-1] for r in rows)
    if (len(rows), n_missing, n_anomalies) != (683, 16, 239):
        raise SystemExit(
            f"integrity check failed: got {len(rows)} rows, {n_missing} dropped, "
            f"{n_anomalies} anomalies; expected 683, 16, 239"
        )

    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(FEATURES + ["label"])
        writer.writerows(rows)
    print(f"wrote {out_path}: 683 rows, 9 features, 239 anomalies")


if __name__ == "__main__":
    main()
