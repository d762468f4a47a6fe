"""Deterministic lazy exponential clocks that drive every simulation.

A :class:`ClockField` is a pure function from ``(seed, domain, indices)`` to
unit-rate exponential values.  Pair clocks govern edge arrivals (the edge
``{i, j}`` appears once ``t * m_i * m_j`` exceeds the pair clock) and vertex
clocks govern lightning strikes.  Because values depend only on the seed and
the queried indices, any two runs sharing a seed see identical clocks on
whatever index sets they touch; that is what makes coupled comparisons
between different initial states exact rather than merely distributional.

PRF construction (fixed; documented so outputs are bit-reproducible):

* ``mix64`` is the splitmix64 finalizer, operating mod 2**64::

      z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
      z ^= z >> 27;  z *= 0x94D049BB133111EB
      z ^= z >> 31

* pair clock, unordered indices canonicalized to ``i < j`` (1-based)::

      h = mix64(mix64(mix64(seed ^ 0xC2B2AE3D27D4EB4F) ^ i) ^ j)

* vertex clock::

      h = mix64(mix64(seed ^ 0x165667B19E3779F9) ^ i)

* replica derivation (``child(k)``)::

      seed_k = mix64(mix64(seed ^ 0x27D4EB2F165667C5) ^ k)

* uniform variate from the high 52 bits, offset half a lattice step so it
  lies strictly inside (0, 1) (both lattice endpoints are exactly
  representable doubles), then the inverse exponential CDF::

      u  = ((h >> 12) + 0.5) * 2**-52
      xi = -log1p(-u)

The integer layer is exact on any platform; the float layer uses IEEE-754
double operations and ``log1p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidInput

__all__ = [
    "ClockField",
    "EventClockView",
    "edge_arrivals",
    "strike_arrivals",
    "pair_count",
    "pair_index_decode",
]

_PAIR_DOMAIN = np.uint64(0xC2B2AE3D27D4EB4F)
_VERTEX_DOMAIN = np.uint64(0x165667B19E3779F9)
_CHILD_DOMAIN = np.uint64(0x27D4EB2F165667C5)

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)
_U52 = 2.0 ** -52

_PAIR_CHUNK = 1 << 20


def _mix64(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps mod 2**64 silently; scalars would warn,
    # so every caller passes arrays (possibly length 1).
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _to_unit_exp(h: np.ndarray) -> np.ndarray:
    u = ((h >> _S12).astype(np.float64) + 0.5) * _U52
    return -np.log1p(-u)


class ClockField:
    """Stateless family of Exp(1) clocks keyed on a 64-bit seed."""

    __slots__ = ("seed", "_seed_u64", "_corrupt", "_corrupt_counter")

    def __init__(self, seed: int, _corrupt: bool = False):
        self.seed = int(seed)
        self._seed_u64 = np.uint64(self.seed % (1 << 64))
        # test hook: when corrupted, a hidden query counter leaks into the
        # hash, violating purity so that coupled runs diverge
        self._corrupt = bool(_corrupt)
        self._corrupt_counter = 0

    def __repr__(self) -> str:
        return f"ClockField(seed={self.seed})"

    def child(self, k: int) -> "ClockField":
        """Derived field for replica ``k``; independent of the parent's clocks."""
        base = np.array([self._seed_u64 ^ _CHILD_DOMAIN], dtype=np.uint64)
        h = _mix64(_mix64(base) ^ np.uint64(int(k) % (1 << 64)))
        return ClockField(int(h[0]), _corrupt=self._corrupt)

    def _finalize(self, h: np.ndarray) -> np.ndarray:
        if self._corrupt:
            k = self._corrupt_counter
            self._corrupt_counter += h.size
            salt = _mix64(np.arange(k, k + h.size, dtype=np.uint64))
            h = h ^ salt
        return h

    def _pair_hash(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        base = np.array([self._seed_u64 ^ _PAIR_DOMAIN], dtype=np.uint64)
        h = _mix64(_mix64(_mix64(base) ^ i) ^ j)
        return self._finalize(h)

    def _vertex_hash(self, i: np.ndarray) -> np.ndarray:
        base = np.array([self._seed_u64 ^ _VERTEX_DOMAIN], dtype=np.uint64)
        h = _mix64(_mix64(base) ^ i)
        return self._finalize(h)

    def pair_exps(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Exp(1) values for index arrays already canonicalized to i < j."""
        return _to_unit_exp(self._pair_hash(i.astype(np.uint64), j.astype(np.uint64)))

    def vertex_exps(self, i: np.ndarray) -> np.ndarray:
        return _to_unit_exp(self._vertex_hash(i.astype(np.uint64)))

    def unit_pair_exp(self, i: int, j: int) -> float:
        if i == j:
            raise InvalidInput("pair clocks require two distinct indices")
        if i < 1 or j < 1:
            raise InvalidInput("vertex indices are 1-based positive integers")
        lo, hi = (i, j) if i < j else (j, i)
        out = self.pair_exps(
            np.array([lo], dtype=np.uint64), np.array([hi], dtype=np.uint64)
        )
        return float(out[0])

    def unit_vertex_exp(self, i: int) -> float:
        if i < 1:
            raise InvalidInput("vertex indices are 1-based positive integers")
        return float(self.vertex_exps(np.array([i], dtype=np.uint64))[0])


@dataclass(frozen=True)
class EventClockView:
    """Scalar arrival times for a fixed mass assignment and deletion rate.

    ``masses[k]`` is the mass of vertex ``k+1``.  Zero-mass vertices never
    connect and are never struck (their clocks are at infinity), which is
    exactly what realizes truncated initial states under the shared field.
    """

    masses: Sequence[float]
    lam: float
    field: ClockField

    def _mass(self, i: int) -> float:
        if i < 1:
            raise InvalidInput("vertex indices are 1-based positive integers")
        return self.masses[i - 1] if i <= len(self.masses) else 0.0

    def edge_time(self, i: int, j: int) -> float:
        if i == j:
            raise InvalidInput("edge times require two distinct vertices")
        product = self._mass(i) * self._mass(j)
        if product == 0.0:
            return float("inf")
        return self.field.unit_pair_exp(i, j) / product

    def strike_time(self, i: int) -> float:
        rate = self.lam * self._mass(i)
        if rate == 0.0:
            return float("inf")
        return self.field.unit_vertex_exp(i) / rate


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def _pair_index_chunks(n: int) -> Iterator[np.ndarray]:
    total = pair_count(n)
    for start in range(0, total, _PAIR_CHUNK):
        yield np.arange(start, min(start + _PAIR_CHUNK, total), dtype=np.int64)


def pair_index_decode(e: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert the row-major enumeration of pairs (i, j), 1 <= i < j <= n.

    Pair (i, j) has linear index base(i) + (j - i - 1) with
    base(i) = (i - 1) * (2n - i) / 2.  The float solve for i is followed by
    an exact integer fix-up, so the decode is correct for any n with
    pair_count(n) < 2**53.
    """
    e = e.astype(np.int64)
    twon = 2 * n - 1
    i = ((twon - np.sqrt(twon * twon - 8.0 * e)) / 2.0).astype(np.int64) + 1
    i = np.clip(i, 1, n - 1)

    def base(ii: np.ndarray) -> np.ndarray:
        return (ii - 1) * (2 * n - ii) // 2

    # float rounding can be off by one in either direction
    i = np.where(base(i) > e, i - 1, i)
    i = np.where(base(i + 1) <= e, i + 1, i)
    j = e - base(i) + i + 1
    return i, j


def _positive_support(masses: np.ndarray) -> int:
    # masses are non-increasing, so the positive entries form a prefix
    return int(np.searchsorted(-masses, 0.0, side="left"))


def edge_arrivals(
    field: ClockField, masses: np.ndarray, t: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All edges with arrival time <= t: arrays (i, j, time), i < j, 1-based.

    Enumerates the pairs of positive-mass vertices in chunks; the cheap
    filter u <= t*m_i*m_j (valid because -log1p(-u) >= u) keeps the log off
    the hot path.
    """
    masses = np.asarray(masses, dtype=np.float64)
    n_pos = _positive_support(masses)
    out_i: list[np.ndarray] = []
    out_j: list[np.ndarray] = []
    out_t: list[np.ndarray] = []
    if n_pos >= 2 and t > 0.0:
        for chunk in _pair_index_chunks(n_pos):
            i, j = pair_index_decode(chunk, n_pos)
            product = masses[i - 1] * masses[j - 1]
            u = ((field._pair_hash(i.astype(np.uint64), j.astype(np.uint64)) >> _S12
                  ).astype(np.float64) + 0.5) * _U52
            rough = u <= t * product
            if not rough.any():
                continue
            i, j, u, product = i[rough], j[rough], u[rough], product[rough]
            times = -np.log1p(-u) / product
            keep = times <= t
            out_i.append(i[keep])
            out_j.append(j[keep])
            out_t.append(times[keep])
    if not out_i:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0, dtype=np.float64)
    return np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_t)


def strike_arrivals(
    field: ClockField, masses: np.ndarray, lam: float, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """All lightning strikes with time <= t: arrays (vertex, time), 1-based."""
    masses = np.asarray(masses, dtype=np.float64)
    n_pos = _positive_support(masses)
    if n_pos == 0 or lam <= 0.0 or t <= 0.0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    v = np.arange(1, n_pos + 1, dtype=np.int64)
    times = field.vertex_exps(v) / (lam * masses[:n_pos])
    keep = times <= t
    return v[keep], times[keep]
