"""JSON-lines report rows and CSV summaries."""

import csv
import io
import json
import math

import numpy as np


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def make_row(metric, value, params=None, exact=None, witness=None, budget=None, seed=None,
             **extra):
    row = {"metric": metric, "params": params or {}, "value": value, "exact": exact,
           "witness": witness, "budget": budget, "seed": seed}
    row.update(extra)
    return _clean(row)


def dumps(row):
    return json.dumps(_clean(row), sort_keys=True)


def append_rows(path, rows):
    with open(path, "a", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dumps(row) + "\n")


def write_rows(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dumps(row) + "\n")


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


CSV_COLUMNS = ["family", "size", "metric", "value", "slope"]


def csv_summary(records):
    """CSV text with one line per record; ``slope`` is filled on the final row of a series."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        slope = rec.get("slope")
        w.writerow([rec["family"], rec["size"], rec["metric"], repr(float(rec["value"])),
                    "" if slope is None else repr(float(slope))])
    return buf.getvalue()
