"""Files written by a run.

``records.csv``
    One row per ConvergenceRecord, header ``RECORD_FIELDS``.  RFC 4180
    quoting, CRLF line ends, '.' decimal point, floats with 17 significant
    digits (``%.17g``) so that parsing restores every value bit for bit.
    Empty cells stand for "not applicable".  Wall times are kept out of
    this file so identical configurations give identical bytes.
``timings.csv``
    ``sweep,g,value,wall_time`` for each record.
``<sweep>__<g>.dat``
    Plot data: ``#`` comment lines, then two whitespace-separated columns
    ``value abs_error``.
``summary.json``
    Fits, reference values and an echo of the configuration.
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

from .sweep import ConvergenceRecord, RECORD_FIELDS

_FLOAT_FIELDS = {"value", "W", "L", "dos", "reference", "abs_error", "rel_error",
                 "ref_W", "ref_L"}
_INT_FIELDS = {"K", "Nb", "N", "nodes", "ref_K", "ref_Nb"}


def fmt_float(x):
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _cell(name, val):
    if val is None:
        return ""
    if name in _FLOAT_FIELDS:
        return fmt_float(val)
    if name in _INT_FIELDS:
        return str(int(val))
    return str(val)


def _parse(name, text):
    if text == "":
        return None
    if name in _FLOAT_FIELDS:
        return float(text)
    if name in _INT_FIELDS:
        return int(text)
    return text


def _write_rows(path, header, rows):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_records(path, records):
    rows = [[_cell(f, getattr(r, f)) for f in RECORD_FIELDS] for r in records]
    return _write_rows(path, RECORD_FIELDS, rows)


def read_records(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != tuple(RECORD_FIELDS):
            raise ValueError(f"{path}: unexpected header {header}")
        return [ConvergenceRecord(**{f: _parse(f, v) for f, v in zip(header, row)})
                for row in reader]


def write_timings(path, records):
    rows = [[r.sweep, r.g, fmt_float(r.value), fmt_float(r.wall_time)] for r in records]
    return _write_rows(path, ["sweep", "g", "value", "wall_time"], rows)


def _slug(text):
    return re.sub(r"[^A-Za-z0-9.=-]+", "_", text).strip("_")


def plot_data_name(sweep, g):
    return f"{_slug(sweep)}__{_slug(g)}.dat"


def write_plot_data(directory, records):
    """One two-column file per (sweep, g); returns the paths in sweep order."""
    groups = {}
    for r in records:
        groups.setdefault((r.sweep, r.g), []).append(r)
    paths = []
    for (sweep, g), recs in groups.items():
        path = Path(directory) / plot_data_name(sweep, g)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# sweep {sweep}, scheme {recs[0].scheme}, g = {g}\n")
            fh.write(f"# reference {recs[0].ref_scheme} W={fmt_float(recs[0].ref_W)} "
                     f"L={fmt_float(recs[0].ref_L)} K={recs[0].ref_K} value={fmt_float(recs[0].reference)}\n")
            fh.write(f"# {recs[0].parameter} abs_error\n")
            for r in recs:
                if r.status == "ok":
                    fh.write(f"{fmt_float(r.value)} {fmt_float(r.abs_error)}\n")
        paths.append(path)
    return paths


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_summary(path, fits, config_raw, extra=None):
    """``fits`` maps ``"sweep / g"`` to a RateFit, a message string or None."""
    doc = {"fits": {k: (v.as_dict() if hasattr(v, "as_dict") else v) for k, v in fits.items()},
           "config": config_raw}
    if extra:
        doc.update(extra)
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def emit_outputs(directory, records, fits, config_raw, extra=None):
    """Write every output file into ``directory`` (created if needed)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [write_records(directory / "records.csv", records),
             write_timings(directory / "timings.csv", records)]
    paths += write_plot_data(directory, records)
    paths.append(write_summary(directory / "summary.json", fits, config_raw, extra))
    return paths
