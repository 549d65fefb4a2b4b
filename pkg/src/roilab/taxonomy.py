"""Pixel classes, palette colors, and ROI categories.

Category semantics: 0 = background (least important for remote driving),
1 = weak ROI (road, vehicles, pedestrians, ...), 2 = strong ROI (traffic
signs and lights). The thresholds t1/t2 gate how many pixels of a category
a CTU needs before it is promoted, and q is the delta-QP magnitude applied
downstream.

Config file format (``taxonomy.cfg``), line oriented and hand editable::

    # comment
    threshold_t1=512
    threshold_t2=512
    q=10
    R,G,B,class_name,category
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DataError

DEFAULT_T1 = 512
DEFAULT_T2 = 512
DEFAULT_Q = 10
Q_MIN, Q_MAX = 1, 10

CATEGORY_BACKGROUND = 0
CATEGORY_WEAK = 1
CATEGORY_STRONG = 2


@dataclass(frozen=True)
class PixelClass:
    name: str
    color: tuple[int, int, int]
    category: int


@dataclass
class Taxonomy:
    """Immutable class registry. Class ids are indices into ``classes``."""

    classes: list[PixelClass]
    t1: int = DEFAULT_T1
    t2: int = DEFAULT_T2
    q: int = DEFAULT_Q
    _by_name: dict = field(init=False, repr=False)
    _packed_colors: np.ndarray = field(init=False, repr=False)
    _packed_order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._validate()
        self._by_name = {c.name: i for i, c in enumerate(self.classes)}
        packed = np.array(
            [(c.color[0] << 16) | (c.color[1] << 8) | c.color[2] for c in self.classes],
            dtype=np.int32,
        )
        self._packed_order = np.argsort(packed).astype(np.int32)
        self._packed_colors = packed[self._packed_order]

    def _validate(self):
        if not self.classes:
            raise DataError("taxonomy defines no classes")
        names = [c.name for c in self.classes]
        dup_names = sorted({n for n in names if names.count(n) > 1})
        if dup_names:
            raise DataError(f"duplicate class names: {', '.join(dup_names)}")
        colors = [c.color for c in self.classes]
        dup_colors = sorted({c for c in colors if colors.count(c) > 1})
        if dup_colors:
            raise DataError(f"duplicate palette colors: {dup_colors}")
        for c in self.classes:
            if c.category not in (0, 1, 2):
                raise DataError(f"class {c.name!r}: category must be 0, 1 or 2")
            if any(v < 0 or v > 255 for v in c.color):
                raise DataError(f"class {c.name!r}: color components must be 0..255")
        if self.t1 < 0 or self.t2 < 0:
            raise DataError(f"thresholds must be non-negative (t1={self.t1}, t2={self.t2})")
        if not Q_MIN <= self.q <= Q_MAX:
            raise DataError(
                f"q={self.q} out of range [{Q_MIN}, {Q_MAX}]; the encoder does "
                "not stay stable with larger QP offsets"
            )

    def __len__(self) -> int:
        return len(self.classes)

    def class_id(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown class name {name!r}") from None

    def category_of(self, class_id: int) -> int:
        if not 0 <= class_id < len(self.classes):
            raise KeyError(f"class id {class_id} is not registered")
        return self.classes[class_id].category

    def category_lut(self) -> np.ndarray:
        """Class id -> category, as an array for vectorized lookups."""
        return np.array([c.category for c in self.classes], dtype=np.int8)

    def palette_array(self) -> np.ndarray:
        """(n_classes, 3) uint8 RGB palette, indexed by class id."""
        return np.array([c.color for c in self.classes], dtype=np.uint8)

    def packed_color_to_id(self, packed: np.ndarray) -> np.ndarray:
        """Map packed 0xRRGGBB values to class ids; unknown colors map to -1."""
        pos = np.searchsorted(self._packed_colors, packed)
        pos = np.clip(pos, 0, len(self._packed_colors) - 1)
        ids = self._packed_order[pos].astype(np.int32)
        ids[self._packed_colors[pos] != packed] = -1
        return ids

    def category_class_ids(self, category: int) -> list[int]:
        return [i for i, c in enumerate(self.classes) if c.category == category]


def _parse_int(value: str, where: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise DataError(f"{where}: expected an integer, got {value!r}") from None


def load_taxonomy(path) -> Taxonomy:
    """Parse and validate a taxonomy config file."""
    classes = []
    t1, t2, q = DEFAULT_T1, DEFAULT_T2, DEFAULT_Q
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            where = f"{path}:{lineno}"
            if "=" in line and line.split("=", 1)[0].strip() in (
                "threshold_t1",
                "threshold_t2",
                "q",
            ):
                key, value = (s.strip() for s in line.split("=", 1))
                if key == "threshold_t1":
                    t1 = _parse_int(value, where)
                elif key == "threshold_t2":
                    t2 = _parse_int(value, where)
                else:
                    q = _parse_int(value, where)
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) < 5:
                raise DataError(f"{where}: expected 'R,G,B,class_name,category'")
            r, g, b = (_parse_int(p, where) for p in parts[:3])
            category = _parse_int(parts[-1], where)
            name = ",".join(parts[3:-1])
            classes.append(PixelClass(name, (r, g, b), category))
    try:
        return Taxonomy(classes, t1=t1, t2=t2, q=q)
    except DataError as e:
        raise DataError(f"{path}: {e}") from None


def save_taxonomy(taxonomy: Taxonomy, path) -> None:
    """Write a taxonomy back in the config format (load/save roundtrips)."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"threshold_t1={taxonomy.t1}\n")
        f.write(f"threshold_t2={taxonomy.t2}\n")
        f.write(f"q={taxonomy.q}\n")
        for c in taxonomy.classes:
            r, g, b = c.color
            f.write(f"{r},{g},{b},{c.name},{c.category}\n")


def default_taxonomy_path() -> str:
    """Path of the bundled default taxonomy config."""
    return str(resources.files("roilab") / "data" / "default_taxonomy.cfg")


def default_taxonomy() -> Taxonomy:
    return load_taxonomy(default_taxonomy_path())


def collapse_to_two_categories(taxonomy: Taxonomy) -> Taxonomy:
    """Merge weak and strong ROI into one ROI category.

    Classes of categories 1 and 2 all become category 2 (single undivided
    ROI), background stays 0. This reproduces the older two-category scheme
    for comparison runs: every ROI CTU then gets -q and background +q.
    """
    merged = [
        PixelClass(c.name, c.color, CATEGORY_STRONG if c.category else CATEGORY_BACKGROUND)
        for c in taxonomy.classes
    ]
    return Taxonomy(merged, t1=taxonomy.t1, t2=taxonomy.t2, q=taxonomy.q)
