"""Deterministic table and report writers.

Floats are rendered with repr(), the shortest representation that parses back
to the identical double, so emitted artifacts are byte-stable across runs and
lossless through a read-write cycle.
"""

import csv
import json
import math

import numpy as np


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if math.isnan(v) else repr(v)
    return str(value)


def write_table(path, columns, rows):
    """rows: iterable of dicts keyed by the column names."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_plain(payload), fh, indent=2, allow_nan=True)
        fh.write("\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def write_similarity_triplets(path, similarity, unit_ids):
    """Row-sparse S as (row_id, col_id, weight) triplets in CSR order."""
    coo = similarity.tocoo()
    rows = [{"row_id": unit_ids[i], "col_id": unit_ids[j], "weight": w}
            for i, j, w in zip(coo.row, coo.col, coo.data)]
    write_table(path, ["row_id", "col_id", "weight"], rows)
