r"""Confusion-matrix files: CSV with header `true\pred,<labels>` and one `<label>,<counts>` row per class"""

import csv

import numpy as np

from herdwatch.common.errors import MalformedInputError
from herdwatch.metrics.classification import ConfusionMatrix

CORNER = "true\\pred"


def load_confusion(path: str) -> ConfusionMatrix:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[0].strip() != CORNER:
            raise MalformedInputError(f"line 1: header must start with '{CORNER}'")
        labels = [h.strip() for h in header[1:]]
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not v.strip() for v in row):
                continue
            if len(row) != len(labels) + 1:
                raise MalformedInputError(
                    f"line {line}: expected {len(labels) + 1} fields, got {len(row)}"
                )
            expected = labels[len(rows)] if len(rows) < len(labels) else None
            if row[0].strip() != expected:
                raise MalformedInputError(
                    f"line {line}: row label '{row[0].strip()}' does not match column '{expected}'"
                )
            try:
                rows.append([int(v) for v in row[1:]])
            except ValueError as e:
                raise MalformedInputError(f"line {line}: {e}") from e
    if len(rows) != len(labels):
        raise MalformedInputError(f"Expected {len(labels)} class rows, got {len(rows)}")
    counts = np.array(rows, dtype=np.int64).reshape(len(labels), len(labels))
    return ConfusionMatrix(labels, counts)


def save_confusion(cm: ConfusionMatrix, path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([CORNER] + cm.class_names)
        for name, row in zip(cm.class_names, cm.counts):
            writer.writerow([name] + [int(v) for v in row])
