"""CTU grid partitioning, per-CTU category assignment, and delta-QP maps.

A frame is tiled by CTUs of a fixed nominal size; edge CTUs keep their true
(smaller) pixel dimensions. Per CTU, pixels of each ROI category are
counted and the cascaded thresholding rule is applied:

    category 2 if strong-ROI pixel count  > t2
    else 1     if weak-ROI pixel count    > t1
    else 0

Both comparisons are strict, and the strong test runs first even when a CTU
would pass both. The category grid then maps elementwise to delta-QP values
{2: -q, 1: 0, 0: +q}.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import CorruptInputError
from .frame_io import SegmentationMap
from .taxonomy import Q_MAX, Q_MIN, Taxonomy

SUPPORTED_CTU_SIZES = (16, 32, 64)

_DQP_MAGIC = b"RQM1"
_DQP_HEADER = struct.Struct("<4sHHI")  # magic, cols, rows, frame count


@dataclass(frozen=True)
class CtuGrid:
    """Exact tiling of a width x height frame by ctu_size blocks."""

    width: int
    height: int
    ctu_size: int
    rows: int
    cols: int

    @property
    def n_ctus(self) -> int:
        return self.rows * self.cols

    def rect(self, i: int, j: int) -> tuple[int, int, int, int]:
        """Pixel rectangle (x0, y0, w, h) of CTU (i, j); edges may be partial."""
        x0 = j * self.ctu_size
        y0 = i * self.ctu_size
        return (
            x0,
            y0,
            min(self.ctu_size, self.width - x0),
            min(self.ctu_size, self.height - y0),
        )

    def pixel_counts(self) -> np.ndarray:
        """(rows, cols) pixel count of every CTU."""
        w = np.minimum(
            np.full(self.cols, self.ctu_size), self.width - np.arange(self.cols) * self.ctu_size
        )
        h = np.minimum(
            np.full(self.rows, self.ctu_size), self.height - np.arange(self.rows) * self.ctu_size
        )
        return h[:, None] * w[None, :]

    def ctu_index_of_pixels(self) -> np.ndarray:
        """(height, width) flat CTU index of every pixel."""
        jj = np.arange(self.width) // self.ctu_size
        ii = np.arange(self.height) // self.ctu_size
        return (ii[:, None] * self.cols + jj[None, :]).astype(np.int32)


def build_grid(width: int, height: int, ctu_size: int = 64) -> CtuGrid:
    if ctu_size not in SUPPORTED_CTU_SIZES:
        raise ValueError(f"ctu_size must be one of {SUPPORTED_CTU_SIZES}, got {ctu_size}")
    if width < 1 or height < 1:
        raise ValueError(f"frame dimensions must be positive, got {width}x{height}")
    rows = -(-height // ctu_size)
    cols = -(-width // ctu_size)
    return CtuGrid(width, height, ctu_size, rows, cols)


def count_categories(seg: SegmentationMap, grid: CtuGrid, taxonomy: Taxonomy) -> np.ndarray:
    """Count pixels per CTU per category; returns (rows, cols, 3) int64.

    The three counts of a CTU always sum to its pixel count.
    """
    if (seg.width, seg.height) != (grid.width, grid.height):
        raise ValueError(
            f"segmentation is {seg.width}x{seg.height}, grid expects "
            f"{grid.width}x{grid.height}"
        )
    cats = taxonomy.category_lut()[seg.class_ids]
    flat = grid.ctu_index_of_pixels().ravel().astype(np.int64) * 3 + cats.ravel()
    counts = np.bincount(flat, minlength=grid.n_ctus * 3)
    return counts.reshape(grid.rows, grid.cols, 3)


def assign_categories(
    counts: np.ndarray,
    t1: int,
    t2: int,
    pixel_counts: np.ndarray | None = None,
    proportional_thresholds: bool = False,
) -> np.ndarray:
    """Apply the cascaded strict-threshold rule; returns (rows, cols) int8.

    With proportional_thresholds, t1/t2 are scaled per CTU by
    pixel_count/4096 so partial edge CTUs of small frames are judged by the
    same pixel fraction as full 64x64 CTUs. Default is absolute thresholds.
    """
    counts = np.asarray(counts)
    if proportional_thresholds:
        if pixel_counts is None:
            raise ValueError("proportional_thresholds requires pixel_counts")
        scale = pixel_counts / 4096.0
        eff_t1 = t1 * scale
        eff_t2 = t2 * scale
    else:
        eff_t1, eff_t2 = t1, t2
    m = np.zeros(counts.shape[:2], dtype=np.int8)
    weak = counts[:, :, 1] > eff_t1
    m[weak] = 1
    strong = counts[:, :, 2] > eff_t2
    m[strong] = 2
    return m


def make_dqp_map(m: np.ndarray, q: int) -> np.ndarray:
    """Map CTU categories elementwise to delta-QP: {2: -q, 1: 0, 0: +q}."""
    if not Q_MIN <= q <= Q_MAX:
        raise ValueError(f"q={q} out of range [{Q_MIN}, {Q_MAX}]")
    m = np.asarray(m)
    return np.array([q, 0, -q], dtype=np.int8)[m]


def dqp_maps_for_sequence(
    seg_maps, grid: CtuGrid, taxonomy: Taxonomy, t1=None, t2=None, q=None,
    proportional_thresholds: bool = False,
) -> list[np.ndarray]:
    """Full per-frame pipeline: count -> assign -> delta-QP map."""
    t1 = taxonomy.t1 if t1 is None else t1
    t2 = taxonomy.t2 if t2 is None else t2
    q = taxonomy.q if q is None else q
    pixel_counts = grid.pixel_counts() if proportional_thresholds else None
    maps = []
    for seg in seg_maps:
        counts = count_categories(seg, grid, taxonomy)
        m = assign_categories(counts, t1, t2, pixel_counts, proportional_thresholds)
        maps.append(make_dqp_map(m, q))
    return maps


def write_dqp_maps(maps, path) -> int:
    """Write delta-QP maps in the binary RQM1 format; returns bytes written."""
    maps = [np.asarray(m) for m in maps]
    if maps:
        rows, cols = maps[0].shape
        if any(m.shape != (rows, cols) for m in maps):
            raise ValueError("all maps must share dimensions")
    else:
        rows = cols = 0
    written = 0
    with open(path, "wb") as f:
        written += f.write(_DQP_HEADER.pack(_DQP_MAGIC, cols, rows, len(maps)))
        for m in maps:
            written += f.write(m.astype(np.int8).tobytes())
    return written


def read_dqp_maps(path) -> list[np.ndarray]:
    with open(path, "rb") as f:
        header = f.read(_DQP_HEADER.size)
        if len(header) < _DQP_HEADER.size:
            raise CorruptInputError(f"{path}: truncated header")
        magic, cols, rows, n_frames = _DQP_HEADER.unpack(header)
        if magic != _DQP_MAGIC:
            raise CorruptInputError(f"{path}: bad magic {magic!r}, expected {_DQP_MAGIC!r}")
        per_frame = rows * cols
        data = f.read()
    if len(data) != per_frame * n_frames:
        raise CorruptInputError(
            f"{path}: expected {per_frame * n_frames} map bytes, found {len(data)}"
        )
    arr = np.frombuffer(data, dtype=np.int8)
    return [arr[i * per_frame : (i + 1) * per_frame].reshape(rows, cols).copy()
            for i in range(n_frames)]


def write_dqp_maps_text(maps, path) -> None:
    """Text export: first line 'cols rows', then one map per frame block."""
    maps = [np.asarray(m) for m in maps]
    with open(path, "w", encoding="utf-8") as f:
        if maps:
            rows, cols = maps[0].shape
        else:
            rows = cols = 0
        f.write(f"{cols} {rows}\n")
        for m in maps:
            for row in m:
                f.write(" ".join(str(int(v)) for v in row) + "\n")
            f.write("\n")


def read_dqp_maps_text(path) -> list[np.ndarray]:
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().split()
        if len(first) != 2:
            raise CorruptInputError(f"{path}: expected 'cols rows' on line 1")
        cols, rows = int(first[0]), int(first[1])
        maps = []
        block = []
        for line in f:
            line = line.strip()
            if not line:
                if block:
                    maps.append(np.array(block, dtype=np.int8))
                    block = []
                continue
            block.append([int(v) for v in line.split()])
        if block:
            maps.append(np.array(block, dtype=np.int8))
    for m in maps:
        if m.shape != (rows, cols):
            raise CorruptInputError(f"{path}: map shape {m.shape} != ({rows}, {cols})")
    return maps
