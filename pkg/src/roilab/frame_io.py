"""Raw planar YUV420p video and color-coded segmentation image I/O.

On-disk formats consumed and produced by every other module:

* Video: headerless planar YUV420p, 8 bit, frame major (Y then U then V
  for frame 0, then frame 1, ...), conventionally named ``<name>.yuv``.
* Segmentation: one 24-bit RGB PNG per frame, ``<name>_seg_%06d.png``,
  where every pixel color is exactly one palette color of the taxonomy.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import CorruptInputError, DataError


@dataclass
class Frame:
    """One 8-bit YUV420p frame: full-size luma, half-size chroma planes."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.y = np.ascontiguousarray(self.y, dtype=np.uint8)
        self.u = np.ascontiguousarray(self.u, dtype=np.uint8)
        self.v = np.ascontiguousarray(self.v, dtype=np.uint8)
        h, w = self.y.shape
        if w % 2 or h % 2:
            raise ValueError(f"frame dimensions must be even, got {w}x{h}")
        if self.u.shape != (h // 2, w // 2) or self.v.shape != (h // 2, w // 2):
            raise ValueError(
                f"chroma planes must be {w // 2}x{h // 2} for a {w}x{h} frame, "
                f"got u={self.u.shape[::-1]} v={self.v.shape[::-1]}"
            )

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    def copy(self) -> "Frame":
        return Frame(self.y.copy(), self.u.copy(), self.v.copy())


@dataclass
class SegmentationMap:
    """Per-pixel class identifiers, same dimensions as the companion frame."""

    class_ids: np.ndarray

    def __post_init__(self):
        self.class_ids = np.ascontiguousarray(self.class_ids, dtype=np.int32)
        if self.class_ids.ndim != 2:
            raise ValueError("class_ids must be a 2-D array")

    @property
    def width(self) -> int:
        return self.class_ids.shape[1]

    @property
    def height(self) -> int:
        return self.class_ids.shape[0]


def frame_byte_count(width: int, height: int) -> int:
    """Bytes of one YUV420p frame: width*height*3/2."""
    return width * height * 3 // 2


def seg_image_name(name: str, index: int) -> str:
    """Frame-indexed segmentation file name, ``<name>_seg_%06d.png``."""
    return f"{name}_seg_{index:06d}.png"


def read_yuv_sequence(path, width: int, height: int) -> list[Frame]:
    """Read a raw YUV420p file into a list of frames, in stream order.

    The file size must be an exact multiple of the per-frame byte count;
    anything else is treated as corruption, not silently truncated.
    """
    if width % 2 or height % 2:
        raise ValueError(f"dimensions must be even, got {width}x{height}")
    if width <= 0 or height <= 0:
        raise ValueError(f"dimensions must be positive, got {width}x{height}")
    per_frame = frame_byte_count(width, height)
    size = os.path.getsize(path)
    if size % per_frame:
        n_full = size // per_frame
        raise CorruptInputError(
            f"{path}: size {size} is not a multiple of the {per_frame}-byte "
            f"frame ({width}x{height}); expected {n_full * per_frame} or "
            f"{(n_full + 1) * per_frame} bytes"
        )
    y_len = width * height
    c_len = y_len // 4
    ch, cw = height // 2, width // 2
    frames = []
    with open(path, "rb") as f:
        for _ in range(size // per_frame):
            buf = np.frombuffer(f.read(per_frame), dtype=np.uint8)
            frames.append(
                Frame(
                    buf[:y_len].reshape(height, width),
                    buf[y_len : y_len + c_len].reshape(ch, cw),
                    buf[y_len + c_len :].reshape(ch, cw),
                )
            )
    return frames


def write_yuv_sequence(frames, path) -> int:
    """Write frames as a raw YUV420p file. Returns the byte count written."""
    dims = {(f.width, f.height) for f in frames}
    if len(dims) > 1:
        raise ValueError(f"frames have mixed dimensions: {sorted(dims)}")
    written = 0
    with open(path, "wb") as f:
        for frame in frames:
            for plane in (frame.y, frame.u, frame.v):
                data = plane.tobytes()
                f.write(data)
                written += len(data)
    return written


def read_segmentation_image(path, taxonomy, expected_size=None) -> SegmentationMap:
    """Decode a palette-colored PNG into class ids via exact color match.

    Args:
        path: PNG file, 24-bit RGB (alpha is rejected rather than dropped).
        taxonomy: provides the authoritative color -> class mapping.
        expected_size: optional (width, height) to cross-check against.

    Every pixel color must be a palette color; close-but-wrong colors are
    an error by design, since segmentation is ground truth by construction.
    """
    img = Image.open(path)
    if img.mode != "RGB":
        if img.mode in ("P", "L"):
            img = img.convert("RGB")
        else:
            raise DataError(f"{path}: expected 24-bit RGB, got mode {img.mode}")
    rgb = np.asarray(img, dtype=np.uint8)
    if expected_size is not None and (img.width, img.height) != tuple(expected_size):
        raise DataError(
            f"{path}: dimensions {img.width}x{img.height} do not match "
            f"expected {expected_size[0]}x{expected_size[1]}"
        )
    packed = (
        rgb[:, :, 0].astype(np.int32) << 16
        | rgb[:, :, 1].astype(np.int32) << 8
        | rgb[:, :, 2].astype(np.int32)
    )
    ids = taxonomy.packed_color_to_id(packed)
    bad = ids < 0
    if bad.any():
        yy, xx = np.nonzero(bad)
        y0, x0 = int(yy[0]), int(xx[0])
        r, g, b = (int(c) for c in rgb[y0, x0])
        raise DataError(
            f"{path}: unknown color ({r},{g},{b}) at pixel (x={x0}, y={y0}); "
            "color is not in the taxonomy palette"
        )
    return SegmentationMap(ids)


def write_segmentation_image(seg: SegmentationMap, taxonomy, path) -> None:
    """Write class ids as a 24-bit RGB PNG using the taxonomy palette."""
    palette = taxonomy.palette_array()
    ids = seg.class_ids
    if ids.min() < 0 or ids.max() >= len(palette):
        raise ValueError("segmentation contains class ids outside the taxonomy")
    rgb = palette[ids]
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
