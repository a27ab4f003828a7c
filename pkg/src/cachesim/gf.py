"""Binary extension fields GF(2^8) and GF(2^16) via log/antilog tables."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# primitive polynomials
PRIMITIVE_POLY = {8: 0x11D, 16: 0x1100B}


class GaloisField:
    def __init__(self, width: int):
        if width not in PRIMITIVE_POLY:
            raise ValueError(f"unsupported field width {width}")
        self.width = width
        self.order = 1 << width
        self.dtype = np.uint8 if width == 8 else np.uint16
        poly = PRIMITIVE_POLY[width]
        q1 = self.order - 1
        exp = np.zeros(2 * q1, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for k in range(q1):
            exp[k] = x
            log[x] = k
            x <<= 1
            if x & self.order:
                x ^= poly
        exp[q1:] = exp[:q1]
        self.exp = exp
        self.log = log

    def __repr__(self) -> str:
        return f"GF(2^{self.width})"

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.exp[(self.order - 1) - self.log[a]])

    def scale(self, a: int, vec: np.ndarray) -> np.ndarray:
        """a * vec elementwise."""
        if a == 0:
            return np.zeros_like(vec)
        v = vec.astype(np.int64)
        out = self.exp[(self.log[v] + self.log[a]) % (self.order - 1)]
        out[v == 0] = 0
        return out.astype(self.dtype)

    def mat_inv(self, mat: list[list[int]]) -> list[list[int]]:
        """Gauss-Jordan inverse of a square matrix over the field."""
        n = len(mat)
        A = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(mat)]
        for col in range(n):
            piv = next((r for r in range(col, n) if A[r][col]), None)
            if piv is None:
                raise np.linalg.LinAlgError("singular matrix over GF(2^%d)" % self.width)
            A[col], A[piv] = A[piv], A[col]
            inv_p = self.inv(A[col][col])
            A[col] = [self.mul(inv_p, x) for x in A[col]]
            for r in range(n):
                f = A[r][col]
                if r != col and f:
                    A[r] = [x ^ self.mul(f, y) for x, y in zip(A[r], A[col])]
        return [row[n:] for row in A]


@lru_cache(maxsize=None)
def field(width: int) -> GaloisField:
    return GaloisField(width)
