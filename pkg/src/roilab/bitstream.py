"""Exp-Golomb codes and MSB-first bit packing, vectorized over numpy arrays.

Order-0 exponential Golomb: a non-negative n is coded as the binary form
of n+1 preceded by bitlength(n+1)-1 zeros. Because the leading zeros are
part of the code length, the codeword *value* is simply n+1, which makes
whole symbol streams packable with array arithmetic. Signed values map
positives to odd indices (v -> 2v-1) and non-positives to even (v -> -2v),
so 0 -> '1', 1 -> '010', -1 -> '011', 2 -> '00100', ...
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptInputError

_POWERS = 1 << np.arange(32, dtype=np.int64)

MAX_CODE_BITS = 48


def zigzag_order(n: int = 8) -> np.ndarray:
    """Flat row-major indices of an n x n block in zigzag scan order."""
    coords = []
    for d in range(2 * n - 1):
        ij = [(i, d - i) for i in range(max(0, d - n + 1), min(d, n - 1) + 1)]
        if d % 2 == 0:
            ij.reverse()  # even diagonals run bottom-left to top-right
        coords.extend(ij)
    return np.array([i * n + j for i, j in coords], dtype=np.int64)


def int_bit_length(values: np.ndarray) -> np.ndarray:
    """Exact bit length of positive integers (vectorized, no float log)."""
    return np.searchsorted(_POWERS, values, side="right").astype(np.int64)


def ueg_encode(values) -> tuple[np.ndarray, np.ndarray]:
    """(codes, lengths) of unsigned order-0 exp-Golomb codewords."""
    v = np.asarray(values, dtype=np.int64)
    if v.size and v.min() < 0:
        raise ValueError("unsigned exp-Golomb input must be non-negative")
    m = v + 1
    return m, 2 * int_bit_length(m) - 1


def seg_encode(values) -> tuple[np.ndarray, np.ndarray]:
    """(codes, lengths) of signed order-0 exp-Golomb codewords."""
    v = np.asarray(values, dtype=np.int64)
    u = np.where(v > 0, 2 * v - 1, -2 * v)
    return ueg_encode(u)


def ueg_length(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    return 2 * int_bit_length(v + 1) - 1


def seg_length(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    u = np.where(v > 0, 2 * v - 1, -2 * v)
    return 2 * int_bit_length(u + 1) - 1


def pack_codes(codes, lengths) -> tuple[bytes, int]:
    """Pack codewords MSB-first into bytes; returns (payload, exact bits).

    The final byte is zero-padded. Codewords longer than MAX_CODE_BITS are
    rejected; nothing in the codec produces them.
    """
    codes = np.asarray(codes, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    if codes.shape != lengths.shape:
        raise ValueError("codes and lengths must have equal shapes")
    total = int(lengths.sum())
    if total == 0:
        return b"", 0
    width = int(lengths.max())
    if width > MAX_CODE_BITS:
        raise ValueError(f"codeword of {width} bits exceeds {MAX_CODE_BITS}")
    shifts = lengths[:, None] - 1 - np.arange(width, dtype=np.int64)[None, :]
    bits = (codes[:, None] >> np.maximum(shifts, 0)) & 1
    flat = bits[shifts >= 0].astype(np.uint8)
    return np.packbits(flat).tobytes(), total


class BitReader:
    """Sequential MSB-first reader over a packed payload."""

    def __init__(self, data: bytes, bit_length: int):
        self._bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if bit_length > self._bits.size:
            raise CorruptInputError(
                f"payload of {self._bits.size} bits shorter than the declared "
                f"{bit_length}"
            )
        self.bit_length = int(bit_length)
        self.pos = 0

    @property
    def remaining(self) -> int:
        return self.bit_length - self.pos

    def read_bits(self, n: int) -> int:
        if self.pos + n > self.bit_length:
            raise CorruptInputError("bitstream truncated")
        v = 0
        for b in self._bits[self.pos : self.pos + n]:
            v = (v << 1) | int(b)
        self.pos += n
        return v

    def read_ueg(self) -> int:
        bits = self._bits
        p = self.pos
        zeros = 0
        while p < self.bit_length and bits[p] == 0:
            zeros += 1
            p += 1
            if 2 * zeros + 1 > MAX_CODE_BITS:
                raise CorruptInputError("exp-Golomb prefix too long")
        if p >= self.bit_length:
            raise CorruptInputError("bitstream truncated inside exp-Golomb code")
        self.pos = p
        return self.read_bits(zeros + 1) - 1

    def read_seg(self) -> int:
        u = self.read_ueg()
        return (u + 1) // 2 if u % 2 else -(u // 2)
