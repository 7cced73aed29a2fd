"""Counter-based random numbers keyed by logical coordinates.

Every variate is a pure function of ``(seed, stream, subset rank, lattice
index)``: a Philox4x32-10 block is evaluated at a counter built from those
coordinates and turned into a standard normal by inverse CDF.  Realizing any
subset of coordinates, in any order or split across threads, gives identical
values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InvalidArgumentError

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

# stream tags separating the uses of one seed
STREAM_NOISE = 0
STREAM_PATTERN = 1
STREAM_VECTOR = 2


def philox4x32(counter, key, rounds: int = 10):
    """Vectorized Philox4x32 block function.

    ``counter`` is a sequence of four uint32-valued arrays (broadcastable),
    ``key`` a pair of Python ints.  Returns four uint64 arrays holding 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for _ in range(rounds):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = ((p1 >> _SHIFT32) ^ c1 ^ np.uint64(k0), p1 & _MASK32,
                          (p0 >> _SHIFT32) ^ c3 ^ np.uint64(k1), p0 & _MASK32)
        k0 = (k0 + _W0) & 0xFFFFFFFF
        k1 = (k1 + _W1) & 0xFFFFFFFF
    return c0, c1, c2, c3


def pack_lattice(ells) -> np.ndarray:
    """Injective packing of lattice indices into uint64 (zigzag, 64//k bits per coordinate)."""
    ells = np.asarray(ells, dtype=np.int64)
    if ells.ndim == 1:
        ells = ells[:, None]
    k = ells.shape[1]
    if k == 0:
        return np.zeros(len(ells), dtype=np.uint64)
    bits = 64 // k
    if bits < 2:
        raise InvalidArgumentError(f"cannot pack lattice dimension k={k}")
    zz = ((ells << 1) ^ (ells >> 63)).astype(np.uint64)
    if bits < 64 and np.any(zz >> np.uint64(bits)):
        raise InvalidArgumentError(f"lattice coordinate too large to pack for k={k}")
    out = np.zeros(len(ells), dtype=np.uint64)
    for j in range(k):
        out = (out << np.uint64(bits)) if bits < 64 else out
        out |= zz[:, j]
    return out


def _uniform53(w0, w1):
    """Open-interval (0, 1) uniforms from two 32-bit words."""
    hi = (w0 >> np.uint64(5)).astype(np.float64)
    lo = (w1 >> np.uint64(6)).astype(np.float64)
    return (hi * 67108864.0 + lo + 0.5) / 9007199254740992.0


@dataclass(frozen=True)
class RandomSource:
    """A seed plus a stream id; values only, never mutable state."""

    seed: int
    stream: int = STREAM_NOISE

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidArgumentError("seed must fit in 64 bits")

    @property
    def key(self):
        return (self.seed & 0xFFFFFFFF, (self.seed >> 32) & 0xFFFFFFFF)

    def substream(self, stream: int) -> "RandomSource":
        return RandomSource(self.seed, stream)

    def uniforms(self, rank, packed) -> np.ndarray:
        """Uniforms at coordinates (rank, packed); ``rank`` < 2^32, arrays broadcast."""
        packed = np.asarray(packed, dtype=np.uint64)
        rank = np.asarray(rank, dtype=np.uint64)
        w = philox4x32((packed & _MASK32, packed >> _SHIFT32, rank, np.uint64(self.stream)),
                       self.key)
        return _uniform53(w[0], w[1])

    def normals(self, rank, packed) -> np.ndarray:
        return ndtri(self.uniforms(rank, packed))

    def lattice_normals(self, ranks, ells) -> np.ndarray:
        """Standard normals on the grid ``ranks x ells``, shape (len(ranks), len(ells))."""
        packed = pack_lattice(ells)
        ranks = np.asarray(ranks, dtype=np.uint64)
        return self.normals(ranks[:, None], packed[None, :])
