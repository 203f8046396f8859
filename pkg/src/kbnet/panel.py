"""Panel ingestion, log returns, rolling windows and smoothing.

Input format: CSV with a leading ``date`` column (ISO-8601 or a plain
integer index) followed by one column per node.  All values use ``.`` as
the decimal separator and carry no thousands separators.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import PanelError

__all__ = [
    "TimeSeriesPanel",
    "ReturnPanel",
    "WindowSpec",
    "load_panel",
    "load_weights",
    "write_panel",
    "log_returns",
    "make_windows",
    "moving_average",
]


def _timestamp_key(ts: str):
    """Sort key for a timestamp cell: numeric if possible, else the raw
    string (ISO-8601 dates sort correctly lexicographically)."""
    try:
        return (0, float(ts), "")
    except ValueError:
        return (1, 0.0, ts)


def _check_timestamps(timestamps):
    keys = [_timestamp_key(t) for t in timestamps]
    for prev, cur in zip(keys, keys[1:]):
        if cur <= prev:
            raise PanelError("non-increasing timestamps")


def _check_labels(labels):
    if len(labels) < 2:
        raise PanelError("need at least 2 node columns")
    if len(set(labels)) != len(labels):
        raise PanelError("duplicate label in header")


@dataclass(frozen=True)
class TimeSeriesPanel:
    """Aligned multivariate level observations, shape (T, M)."""

    labels: tuple
    timestamps: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "values", values)
        _check_labels(self.labels)
        t, m = values.shape
        if m != len(self.labels):
            raise PanelError("value row width does not match label count")
        if t != len(self.timestamps):
            raise PanelError("row count does not match timestamp count")
        if t < m + 2:
            raise PanelError(f"need at least M+2={m + 2} rows, got {t}")
        if not np.all(np.isfinite(values)):
            raise PanelError("non-finite value in panel")
        _check_timestamps(self.timestamps)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ReturnPanel:
    """Log-return observations, shape (T-1, M) relative to the source panel."""

    labels: tuple
    timestamps: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.base is None:
            values.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "values", values)
        _check_labels(self.labels)
        t, m = values.shape
        if m != len(self.labels):
            raise PanelError("value row width does not match label count")
        if t != len(self.timestamps):
            raise PanelError("row count does not match timestamp count")
        if not np.all(np.isfinite(values)):
            raise PanelError("non-finite return value")
        _check_timestamps(self.timestamps)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WindowSpec:
    """Rolling-window geometry in observation counts (not calendar units)."""

    window_length: int
    step: int = 1

    def __post_init__(self):
        if self.window_length < 1:
            raise PanelError("window_length must be positive")
        if self.step < 1:
            raise PanelError("step must be >= 1")


def load_panel(source, missing: str = "strict") -> TimeSeriesPanel:
    """Read a panel CSV from a path, file object or string.

    ``missing`` selects the gap policy: ``strict`` rejects empty cells,
    ``ffill`` forward-fills them and drops leading incomplete rows.
    """
    if missing not in ("strict", "ffill"):
        raise PanelError(f"unknown missing-data policy {missing!r}")
    if isinstance(source, (str, bytes)) and "\n" not in str(source):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    else:
        if isinstance(source, bytes):
            source = source.decode("utf-8")
        if isinstance(source, str):
            source = io.StringIO(source)
        rows = list(csv.reader(source))
    if not rows:
        raise PanelError("empty CSV")
    header = rows[0]
    if not header or header[0].strip().lower() != "date":
        raise PanelError("first CSV column must be 'date'")
    labels = [h.strip() for h in header[1:]]
    _check_labels(labels)

    timestamps = []
    data = []
    for ln, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise PanelError(f"line {ln}: expected {len(header)} cells, got {len(row)}")
        timestamps.append(row[0].strip())
        parsed = []
        for label, cell in zip(labels, row[1:]):
            cell = cell.strip()
            if not cell:
                if missing == "strict":
                    raise PanelError(f"line {ln}: missing value for {label!r}")
                parsed.append(math.nan)
                continue
            try:
                parsed.append(float(cell))
            except ValueError:
                raise PanelError(f"line {ln}: non-numeric cell {cell!r} for {label!r}") from None
        data.append(parsed)
    values = np.asarray(data, dtype=float)
    if values.size == 0:
        raise PanelError("CSV contains no data rows")

    if missing == "ffill":
        for j in range(values.shape[1]):
            col = values[:, j]
            for t in range(1, len(col)):
                if math.isnan(col[t]):
                    col[t] = col[t - 1]
        complete = ~np.isnan(values).any(axis=1)
        first = int(np.argmax(complete))
        if not complete.any():
            raise PanelError("no complete row after forward-fill")
        values = values[first:]
        timestamps = timestamps[first:]
        if np.isnan(values).any():
            raise PanelError("unfillable gap remains after forward-fill")

    return TimeSeriesPanel(labels=tuple(labels), timestamps=tuple(timestamps), values=values)


def write_panel(panel: TimeSeriesPanel) -> str:
    """Serialize a panel back to canonical CSV (shortest round-trip floats)."""
    lines = ["date," + ",".join(panel.labels)]
    for ts, row in zip(panel.timestamps, panel.values):
        lines.append(ts + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def load_weights(source, labels) -> np.ndarray:
    """Read a ``label,weight`` CSV and return weights ordered like ``labels``."""
    if isinstance(source, (str, bytes)) and "\n" not in str(source):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    else:
        if isinstance(source, bytes):
            source = source.decode("utf-8")
        rows = list(csv.reader(io.StringIO(source)))
    table = {}
    for row in rows:
        if not row or row[0].strip().lower() == "label":
            continue
        if len(row) != 2:
            raise PanelError(f"weight row must have 2 cells, got {row!r}")
        try:
            table[row[0].strip()] = float(row[1])
        except ValueError:
            raise PanelError(f"non-numeric weight {row[1]!r}") from None
    try:
        w = np.array([table[lab] for lab in labels], dtype=float)
    except KeyError as exc:
        raise PanelError(f"weight missing for label {exc.args[0]!r}") from None
    if not np.all(np.isfinite(w)) or np.any(w < 0) or not np.any(w > 0):
        raise PanelError("weights must be finite, nonnegative and not all zero")
    return w


def log_returns(panel: TimeSeriesPanel) -> ReturnPanel:
    """Log returns log(level[t+1] / level[t]) column by column."""
    values = panel.values
    bad = np.argwhere(values <= 0)
    if bad.size:
        t, j = bad[0]
        raise PanelError(
            f"nonpositive level at row {panel.timestamps[t]!r}, column {panel.labels[j]!r}"
        )
    returns = np.log(values[1:] / values[:-1])
    return ReturnPanel(labels=panel.labels, timestamps=panel.timestamps[1:], values=returns)


def make_windows(panel: ReturnPanel, spec: WindowSpec):
    """Split a return panel into rolling views.

    Windows start at offsets 0, step, 2*step, ...; each covers exactly
    ``window_length`` rows; a trailing partial window is dropped.  The
    views share storage with the source panel.
    """
    n = panel.n_obs
    if spec.window_length > n:
        raise PanelError(f"window_length {spec.window_length} exceeds {n} available rows")
    windows = []
    for start in range(0, n - spec.window_length + 1, spec.step):
        stop = start + spec.window_length
        windows.append(
            ReturnPanel(
                labels=panel.labels,
                timestamps=panel.timestamps[start:stop],
                values=panel.values[start:stop],
            )
        )
    return windows


def moving_average(series, k: int) -> np.ndarray:
    """Trailing moving average with a partial window at the start.

    output[t] is the mean of the most recent min(t+1, k) values, so the
    result has the same length as the input and no look-ahead.
    """
    if k < 1:
        raise ValueError("window size k must be >= 1")
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        return x.copy()
    csum = np.cumsum(x)
    out = np.empty_like(csum)
    head = min(k, x.size)
    out[:head] = csum[:head] / np.arange(1, head + 1)
    if x.size > k:
        out[k:] = (csum[k:] - csum[:-k]) / k
    return out
