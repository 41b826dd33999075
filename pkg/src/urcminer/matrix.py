"""Row-labelled numeric matrices and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from urcminer.errors import DataError, SchemaError


def _fmt(v: float) -> str:
    # %.17g round-trips every float64 and prints integral values without a dot
    return format(float(v), ".17g")


@dataclass
class Matrix:
    row_ids: list[int]
    feature_names: list[str]
    values: np.ndarray
    mode: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(len(self.row_ids), len(self.feature_names))
        self.row_ids = [int(r) for r in self.row_ids]
        self.feature_names = list(self.feature_names)

    def __len__(self):
        return len(self.row_ids)

    @property
    def shape(self):
        return self.values.shape

    def take(self, indices) -> "Matrix":
        idx = np.asarray(indices, dtype=int)
        return Matrix([self.row_ids[i] for i in idx], self.feature_names, self.values[idx], self.mode, dict(self.meta))

    def select_rows(self, row_ids) -> "Matrix":
        pos = {r: i for i, r in enumerate(self.row_ids)}
        try:
            return self.take([pos[int(r)] for r in row_ids])
        except KeyError as exc:
            raise DataError(f"row {exc.args[0]} not present in matrix") from None

    def columns(self, names) -> "Matrix":
        pos = {n: i for i, n in enumerate(self.feature_names)}
        missing = [n for n in names if n not in pos]
        if missing:
            raise SchemaError(f"matrix lacks column {missing[0]!r}")
        return Matrix(self.row_ids, list(names), self.values[:, [pos[n] for n in names]], self.mode, dict(self.meta))

    def hstack(self, other: "Matrix") -> "Matrix":
        """Concatenate columns, aligning ``other`` on this matrix's row ids."""
        clash = set(self.feature_names) & set(other.feature_names)
        if clash:
            raise SchemaError(f"duplicate column {sorted(clash)[0]!r} in concatenation")
        right = other.select_rows(self.row_ids)
        meta = {**other.meta, **self.meta}
        return Matrix(self.row_ids, self.feature_names + right.feature_names,
                      np.hstack([self.values, right.values]), self.mode, meta)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        tags = [f"mode={self.mode or 'none'}"] + [f"{k}={self.meta[k]}" for k in sorted(self.meta)]
        buf.write("# urcminer " + " ".join(tags) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["comment_id"] + self.feature_names)
        for rid, row in zip(self.row_ids, self.values):
            w.writerow([rid] + [_fmt(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv_text(cls, text: str, source: str = "<csv>") -> "Matrix":
        lines = text.splitlines()
        mode, meta = None, {}
        if lines and lines[0].startswith("#"):
            for tok in lines[0][1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    if k == "mode":
                        mode = None if v == "none" else v
                    else:
                        meta[k] = v
            lines = lines[1:]
        rows = list(csv.reader(lines))
        if not rows:
            raise DataError(f"{source}: no header row")
        header = rows[0]
        if not header or header[0] != "comment_id":
            raise DataError(f"{source}: first column must be comment_id")
        ids, vals = [], []
        for n, r in enumerate(rows[1:], 2):
            if len(r) != len(header):
                raise DataError(f"{source}: row {n} has {len(r)} fields, expected {len(header)}")
            try:
                ids.append(int(r[0]))
                vals.append([float(x) for x in r[1:]])
            except ValueError as exc:
                raise DataError(f"{source}: row {n}: {exc}") from None
        values = np.array(vals, dtype=np.float64).reshape(len(ids), len(header) - 1)
        return cls(ids, header[1:], values, mode, meta)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def from_csv(cls, path) -> "Matrix":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv_text(fh.read(), str(path))


def write_labels(row_ids, labels, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["comment_id", "label"])
        for r, lab in zip(row_ids, labels):
            w.writerow([r, lab])


def read_labels(path) -> dict[int, str]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"comment_id", "label"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected columns comment_id,label")
        try:
            return {int(r["comment_id"]): r["label"] for r in reader}
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None


def labels_for(matrix: Matrix, labels: dict[int, str]) -> list[str]:
    missing = [r for r in matrix.row_ids if r not in labels]
    if missing:
        raise DataError(f"no label for comment {missing[0]} ({len(missing)} unlabelled rows)")
    return [labels[r] for r in matrix.row_ids]
