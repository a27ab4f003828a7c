"""Systematic Reed-Solomon (Cauchy) erasure code: any m of n blocks suffice."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

import numpy as np

from .gf import GaloisField, field


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class ErasureCode:
    """(m, n) MDS code with generator [I_m ; C], C an (n-m) x m Cauchy matrix.

    Symbols live in GF(2^8) when n <= 255 and in GF(2^16) otherwise.
    """

    m: int
    n: int
    width: int = 0
    parity: tuple[tuple[int, ...], ...] = dc_field(default=(), repr=False)

    @classmethod
    def create(cls, m: int, n: int, width: int | None = None) -> "ErasureCode":
        if m < 1 or n < m:
            raise CodeError(f"need 1 <= m <= n, got m={m}, n={n}")
        if width is None:
            width = 8 if n <= 255 else 16
        if n > (1 << width) - 1:
            raise CodeError(f"n={n} too large for GF(2^{width})")
        gf = field(width)
        # x_r = m + r and y_c = c are distinct, so x_r ^ y_c is never 0
        parity = tuple(
            tuple(gf.inv((m + r) ^ c) for c in range(m)) for r in range(n - m)
        )
        return cls(m, n, width, parity)

    @property
    def gf(self) -> GaloisField:
        return field(self.width)

    @property
    def symbol_bits(self) -> int:
        return self.width

    def generator_row(self, index: int) -> tuple[int, ...]:
        if index < self.m:
            return tuple(1 if c == index else 0 for c in range(self.m))
        return self.parity[index - self.m]

    def encode(self, blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
        if len(blocks) != self.m:
            raise CodeError(f"expected {self.m} blocks, got {len(blocks)}")
        blocks = [np.asarray(b, dtype=self.gf.dtype) for b in blocks]
        if len({b.shape for b in blocks}) > 1:
            raise CodeError("blocks must have equal length")
        out = [b.copy() for b in blocks]
        gf = self.gf
        for row in self.parity:
            acc = np.zeros_like(blocks[0])
            for coef, b in zip(row, blocks):
                acc ^= gf.scale(coef, b)
            out.append(acc)
        return out

    def decode(self, received: Mapping[int, np.ndarray]) -> list[np.ndarray]:
        """Rebuild the m message blocks from any m (or more) coded blocks."""
        if len(received) < self.m:
            raise CodeError(f"need {self.m} blocks, got {len(received)}")
        idx = sorted(received)[: self.m]
        if all(i < self.m for i in idx):
            return [np.asarray(received[i], dtype=self.gf.dtype).copy() for i in idx]
        gf = self.gf
        inv = gf.mat_inv([list(self.generator_row(i)) for i in idx])
        recv = [np.asarray(received[i], dtype=gf.dtype) for i in idx]
        out = []
        for row in inv:
            acc = np.zeros_like(recv[0])
            for coef, b in zip(row, recv):
                if coef:
                    acc ^= gf.scale(coef, b)
            out.append(acc)
        return out


def mds_encode(blocks: Sequence[np.ndarray], code: ErasureCode) -> list[np.ndarray]:
    return code.encode(blocks)


def mds_decode(received: Mapping[int, np.ndarray], code: ErasureCode) -> list[np.ndarray]:
    return code.decode(received)


def int_to_symbols(bits: int, n_bits: int, width: int) -> np.ndarray:
    if n_bits % width:
        raise CodeError(f"{n_bits} bits is not a whole number of {width}-bit symbols")
    raw = bits.to_bytes(n_bits // 8, "little")
    return np.frombuffer(raw, dtype=np.uint8 if width == 8 else "<u2").copy()


def symbols_to_int(symbols: np.ndarray, width: int) -> int:
    arr = np.asarray(symbols, dtype=np.uint8 if width == 8 else "<u2")
    return int.from_bytes(arr.tobytes(), "little")
