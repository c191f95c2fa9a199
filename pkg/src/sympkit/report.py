"""Deterministic JSON/CSV serialization of analysis reports.

Complex numbers are written as ``[re, im]`` pairs and floats with 17
significant digits, which round-trips IEEE doubles exactly.  Object keys
are sorted.  Non-finite floats are written as the strings ``"inf"``,
``"-inf"`` and ``"nan"``.
"""

import csv
import io
import json
import math

import numpy as np


def _float(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        return "0.0"
    s = f"{x:.17g}"
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_plain(obj):
    """Convert numpy values and complex numbers to JSON-compatible data."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _emit(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (list, dict)) for v in obj):
            out.append("[")
            for i, v in enumerate(obj):
                if i:
                    out.append(", ")
                _emit(v, out, indent, level + 1)
            out.append("]")
        else:
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(pad)
                _emit(v, out, indent, level + 1)
                out.append(",\n" if i < len(obj) - 1 else "\n")
            out.append(end + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            out.append(pad + json.dumps(k, ensure_ascii=True) + ": ")
            _emit(obj[k], out, indent, level + 1)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(end + "}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=1):
    """Deterministic JSON text for ``obj`` (numpy arrays and complex allowed)."""
    out = []
    _emit(to_plain(obj), out, indent, 0)
    out.append("\n")
    return "".join(out)


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj in ("nan", "inf", "-inf"):
        return float(obj)
    return obj


def loads(text):
    """Inverse of :func:`dumps` up to the complex-to-pair conversion."""
    return _restore(json.loads(text))


def check(name, passed, residual=None, detail=None):
    """A single named check entry of a report document."""
    entry = {"name": name, "status": "pass" if passed else "fail"}
    if residual is not None:
        entry["residual"] = float(residual)
    if detail is not None:
        entry["detail"] = detail
    return entry


def _csv_float(x):
    return _float(x).strip('"')


def to_csv(document):
    """Flatten checks (and Green-table entries if present) to CSV text.

    Columns: ``record, lambda_re, lambda_im, name, k, l, i, j, re, im,
    status``.  Check rows leave the index columns empty; Green rows leave
    ``name`` and ``status`` empty.
    """
    document = to_plain(document)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["record", "lambda_re", "lambda_im", "name", "k", "l", "i", "j", "re", "im", "status"])
    for c in document.get("checks", []):
        res = c.get("residual")
        w.writerow(["check", "", "", c["name"], "", "", "", "", "" if res is None else _csv_float(res), "", c["status"]])
    for item in document.get("payload", {}).get("results", []):
        table = item.get("green_entries")
        if not table:
            continue
        lam = item["lambda"]
        for rec in table:
            k, l = rec["k"], rec["l"]
            for i, row in enumerate(rec["G"]):
                for j, val in enumerate(row):
                    w.writerow(["green", _csv_float(lam[0]), _csv_float(lam[1]), "", k, l, i, j,
                                _csv_float(val[0]), _csv_float(val[1]), ""])
    return buf.getvalue()
