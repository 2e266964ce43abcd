"""Tabular scan/time traces, CSV serialization and lineshape statistics."""

from dataclasses import dataclass

import numpy as np

CSV_SIG_DIGITS = 12


@dataclass
class Trace:
    """Columnar trace: one abscissa plus one or more signal columns."""

    columns: tuple
    data: np.ndarray  # shape (n_rows, n_columns)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise ValueError(
                f"data shape {self.data.shape} does not match columns {self.columns}"
            )

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        fmt = f"{{:.{CSV_SIG_DIGITS - 1}e}}"
        for row in self.data:
            lines.append(",".join(fmt.format(v) for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def read_csv(path) -> Trace:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty CSV")
        columns = tuple(header.split(","))
        rows = []
        for ln, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise ValueError(f"{path}:{ln}: expected {len(columns)} fields, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ValueError(f"{path}:{ln}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: CSV has a header but no rows")
    return Trace(columns=columns, data=np.asarray(rows))


@dataclass(frozen=True)
class ResonanceStats:
    """Peak amplitude and full width at half maximum of a scanned line."""

    amplitude: float
    fwhm: float
    peak_position: float


def _cross(x0, y0, x1, y1, level):
    # linear interpolation of the level crossing between two samples
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def lineshape_stats(x, y) -> ResonanceStats:
    """Amplitude, FWHM and position of the principal peak of y(x).

    Amplitude is the grid maximum; the width is the extent of the contiguous
    interval around the peak where y stays above half maximum, with the two
    boundary crossings located by linear interpolation.  A half maximum that
    is never crossed on one side extends to the grid edge.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 3:
        raise ValueError("lineshape_stats needs matching 1-d arrays of length >= 3")
    ipk = int(np.argmax(y))
    amp = float(y[ipk])
    half = 0.5 * amp
    left = float(x[0])
    for i in range(ipk, 0, -1):
        if y[i - 1] < half:
            left = _cross(x[i], y[i], x[i - 1], y[i - 1], half)
            break
    right = float(x[-1])
    for i in range(ipk, x.size - 1):
        if y[i + 1] < half:
            right = _cross(x[i], y[i], x[i + 1], y[i + 1], half)
            break
    return ResonanceStats(amplitude=amp, fwhm=float(right - left), peak_position=float(x[ipk]))
