"""File formats: dataset CSV, result records, benchmark CSVs and PPM heatmaps."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import MISSING, asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, MalformedInput


# -- numbers ---------------------------------------------------------------------------


def fmt_float(v: float) -> str:
    """17 significant digits: always parses back to the identical double."""
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"cannot serialise non-finite value {v}")
    s = format(v, ".17g")
    if not any(ch in s for ch in ".eE"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at fixed 17-digit precision and stable key order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# -- dataset ---------------------------------------------------------------------------


def load_dataset(path, n: int | None = None):
    """Read ``label,f_1,...,f_n`` rows; lines starting with ``#`` are ignored.

    Returns ``(X, labels)`` as float and int arrays.
    """
    rows, labels = [], []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                labels.append(int(parts[0]))
                rows.append([float(v) for v in parts[1:]])
            except ValueError:
                raise MalformedInput(f"{path}:{lineno}: not a numeric dataset row") from None
    if not rows:
        raise MalformedInput(f"{path}: dataset is empty")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise DimensionMismatch(f"{path}: rows have differing feature counts {sorted(width)}")
    X = np.array(rows, dtype=np.float64)
    if n is not None and X.shape[1] != n:
        raise DimensionMismatch(f"{path}: rows have {X.shape[1]} features, model expects {n}")
    return X, np.array(labels, dtype=np.int64)


def save_dataset(path, X, labels, header: str | None = None) -> None:
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        for x, lab in zip(X, labels):
            fh.write(",".join([str(int(lab))] + [fmt_float(v) for v in x]) + "\n")


# -- result records --------------------------------------------------------------------


@dataclass
class ResultRecord:
    config: dict
    y: int
    t: int
    A: list
    cardinality: int
    cardinality_pct: float
    violating_classes: list
    oracle_calls: int
    stats: dict
    final_bounds: list | None
    maximal_certified: bool
    fidelity: float | None = None
    ne_robustness: float | None = None
    wall_time: dict | None = None
    pi: list | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ResultRecord":
        names = {f.name for f in fields(cls)}
        missing = {f.name for f in fields(cls) if f.default is MISSING} - doc.keys()
        if missing:
            raise MalformedInput(f"result file lacks fields {sorted(missing)}")
        return cls(**{k: v for k, v in doc.items() if k in names})


def write_result(record: ResultRecord, path) -> None:
    Path(path).write_text(dumps(record.to_dict()) + "\n")


def read_result(path) -> ResultRecord:
    return ResultRecord.from_dict(json.loads(Path(path).read_text()))


# -- benchmark CSVs --------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def csv_text(header, rows, partial: bool = False) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    if partial:
        w.writerow(["partial=true"])
    return buf.getvalue()


def read_csv_rows(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# -- heatmaps --------------------------------------------------------------------------


def _round255(v) -> np.ndarray:
    # round half up, unlike numpy's round half to even
    return np.floor(np.asarray(v) * 255.0 + 0.5).astype(np.int64)


def render_heatmap(base, input_shape, subset, grad) -> np.ndarray:
    """RGB image (h, w, 3) uint8 highlighting explanation pixels.

    Pixels outside the explanation are grey.  Explanation pixels keep a dimmed grey in two
    channels and saturate one: green for a positive gradient sign, red for negative, blue
    for zero.  With several channels a pixel is highlighted when any of its channels is in
    the subset, using the sign of the member channel with the largest gradient magnitude.
    """
    h, w, c = (int(s) for s in input_shape)
    if c not in (1, 3):
        raise DimensionMismatch(f"heatmaps need 1 or 3 channels, got {c}")
    base = np.asarray(base, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if base.size != h * w * c or grad.size != base.size:
        raise DimensionMismatch(f"input_shape {input_shape} does not match {base.size} features")
    pix = np.clip(base, 0.0, 1.0).reshape(h, w, c).mean(axis=2)
    grey = _round255(pix)
    dim = _round255(0.4 * pix)
    img = np.repeat(grey[:, :, None], 3, axis=2)

    member = np.zeros(h * w * c, dtype=bool)
    member[list(subset)] = True
    member = member.reshape(h, w, c)
    mags = np.where(member, np.abs(grad.reshape(h, w, c)), -1.0)
    pick = np.argmax(mags, axis=2)  # first channel on ties
    sign = np.sign(np.take_along_axis(grad.reshape(h, w, c), pick[:, :, None], axis=2)[:, :, 0])
    tinted = member.any(axis=2)
    for s, channel in ((1.0, 1), (-1.0, 0), (0.0, 2)):
        mask = tinted & (sign == s)
        img[mask] = dim[mask][:, None]
        img[mask, channel] = 255
    return img.astype(np.uint8)


def write_ppm(path, rgb) -> None:
    """Binary PPM (P6) with maxval 255."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())
