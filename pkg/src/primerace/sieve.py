"""Segmented odd-only sieve of Eratosthenes with ordered parallel delivery.

Segments are half-open windows ``[lo, hi)``.  They are sieved independently
(optionally on a thread pool) and always handed to consumers in ascending
order, so everything accumulated downstream is independent of the worker
count and of the segment size.
"""
from __future__ import annotations

import json
import math
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .errors import CheckpointFormatError, EmptyRangeError

DEFAULT_SEGMENT_BYTES = 256 * 1024
MAX_BOUND = 2**63


def small_primes(n: int) -> np.ndarray:
    """All primes <= n (plain sieve, used for base primes and tests)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    s = np.ones(n // 2 + 1, dtype=bool)  # s[i] <-> 2i+1
    s[0] = False
    for i in range(1, (math.isqrt(n) - 1) // 2 + 1):
        if s[i]:
            p = 2 * i + 1
            s[p * p // 2 :: p] = False
    odd = 2 * np.flatnonzero(s) + 1
    odd = odd[odd <= n]
    return np.concatenate(([2], odd)).astype(np.int64)


@dataclass
class SieveSegment:
    lo: int
    hi: int
    primes: np.ndarray = field(repr=False)


def _sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi) given base primes covering sqrt(hi)."""
    out = []
    if lo <= 2 < hi:
        out.append(np.array([2], dtype=np.int64))
    first = lo | 1
    if lo <= 1:
        first = 3
    if first >= hi:
        return out[0] if out else np.zeros(0, dtype=np.int64)
    n = (hi - first + 1) // 2  # odd numbers first, first+2, ... < hi
    seg = np.ones(n, dtype=bool)
    lim = math.isqrt(hi - 1)
    for p in base[1 : np.searchsorted(base, lim, side="right")]:
        p = int(p)
        start = max(p * p, ((first + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start >= hi:
            continue
        seg[(start - first) // 2 :: p] = False
    odd = first + 2 * np.flatnonzero(seg).astype(np.int64)
    out.append(odd)
    return np.concatenate(out) if len(out) > 1 else out[0]


def _segment_span(segment_bytes: int) -> int:
    # one bit per odd number
    return 16 * segment_bytes


def segment_bounds(lo: int, hi: int, segment_bytes: int = DEFAULT_SEGMENT_BYTES) -> list[tuple[int, int]]:
    span = _segment_span(segment_bytes)
    # aligned to multiples of span so that resumed runs see the same windows
    bounds = []
    a = lo
    while a < hi:
        b = min(hi, (a // span + 1) * span)
        bounds.append((a, b))
        a = b
    return bounds


def _check_range(lo: int, hi: int) -> None:
    if hi <= lo:
        raise EmptyRangeError(f"empty range [{lo}, {hi})")
    if lo < 0 or hi > MAX_BOUND:
        raise EmptyRangeError(f"range [{lo}, {hi}) outside [0, 2^63]")


def iter_segments(
    lo: int,
    hi: int,
    *,
    segment_bytes: int = DEFAULT_SEGMENT_BYTES,
    workers: int = 1,
) -> Iterator[SieveSegment]:
    """Yield :class:`SieveSegment` objects covering [lo, hi) in ascending order."""
    _check_range(lo, hi)
    lo = max(lo, 2)
    if lo >= hi:
        return
    base = small_primes(math.isqrt(hi - 1) + 1)
    bounds = segment_bounds(lo, hi, segment_bytes)
    if workers <= 1:
        for a, b in bounds:
            yield SieveSegment(a, b, _sieve_segment(a, b, base))
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead; map() yields in submission order
        window = 4 * workers
        for start in range(0, len(bounds), window):
            chunk = bounds[start : start + window]
            futs = [pool.submit(_sieve_segment, a, b, base) for a, b in chunk]
            for (a, b), f in zip(chunk, futs):
                yield SieveSegment(a, b, f.result())


def primes_between(lo: int, hi: int, **kw) -> np.ndarray:
    """All primes in [lo, hi) as one array."""
    if hi <= max(lo, 2):
        return np.zeros(0, dtype=np.int64)
    parts = [s.primes for s in iter_segments(lo, hi, **kw)]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def stream_primes(lo: int, hi: int, callback: Callable[[np.ndarray], object], **kw) -> int:
    """Deliver every prime in [lo, hi) to ``callback`` in ascending batches.

    Each call receives an int64 array (one per segment, possibly empty is
    skipped).  Returns the number of primes delivered.
    """
    count = 0
    for seg in iter_segments(lo, hi, **kw):
        if len(seg.primes):
            callback(seg.primes)
            count += len(seg.primes)
    return count


@dataclass
class PrimePowerEvent:
    n: int
    p: int
    m: int
    log_p: float


@dataclass
class PrimePowerBatch:
    """Column-wise prime-power events, ascending in ``n``."""

    n: np.ndarray
    p: np.ndarray
    m: np.ndarray
    log_p: np.ndarray

    def __len__(self) -> int:
        return len(self.n)

    def events(self) -> Iterator[PrimePowerEvent]:
        for n, p, m, lp in zip(self.n, self.p, self.m, self.log_p):
            yield PrimePowerEvent(int(n), int(p), int(m), float(lp))


def higher_powers(lo: int, hi: int) -> PrimePowerBatch:
    """Prime powers p^m (m >= 2) in [lo, hi)."""
    if hi <= 4:
        return _empty_batch()
    root = math.isqrt(hi - 1)
    ns, ps, ms = [], [], []
    for p in small_primes(root):
        p = int(p)
        q, m = p * p, 2
        while q < hi:
            if q >= lo:
                ns.append(q)
                ps.append(p)
                ms.append(m)
            q *= p
            m += 1
    if not ns:
        return _empty_batch()
    n = np.array(ns, dtype=np.int64)
    order = np.argsort(n, kind="stable")
    p = np.array(ps, dtype=np.int64)[order]
    return PrimePowerBatch(n[order], p, np.array(ms, dtype=np.int64)[order], np.log(p.astype(float)))


def _empty_batch() -> PrimePowerBatch:
    z = np.zeros(0, dtype=np.int64)
    return PrimePowerBatch(z, z, z, np.zeros(0))


def merge_prime_powers(primes: np.ndarray, powers: PrimePowerBatch) -> PrimePowerBatch:
    """Merge a prime batch and a higher-power batch into one ascending batch."""
    if not len(powers):
        return PrimePowerBatch(primes, primes, np.ones(len(primes), dtype=np.int64), np.log(primes.astype(float)))
    n = np.concatenate((primes, powers.n))
    p = np.concatenate((primes, powers.p))
    m = np.concatenate((np.ones(len(primes), dtype=np.int64), powers.m))
    order = np.argsort(n, kind="stable")
    p = p[order]
    return PrimePowerBatch(n[order], p, m[order], np.log(p.astype(float)))


def iter_prime_power_segments(lo: int, hi: int, **kw) -> Iterator[tuple[SieveSegment, PrimePowerBatch]]:
    _check_range(lo, hi)
    powers = higher_powers(max(lo, 2), hi)
    for seg in iter_segments(lo, hi, **kw):
        a, b = np.searchsorted(powers.n, [seg.lo, seg.hi])
        sub = PrimePowerBatch(powers.n[a:b], powers.p[a:b], powers.m[a:b], powers.log_p[a:b])
        yield seg, merge_prime_powers(seg.primes, sub)


def stream_prime_powers(lo: int, hi: int, callback: Callable[[PrimePowerBatch], object], **kw) -> int:
    """Deliver every prime power p^m in [lo, hi) in ascending batches."""
    count = 0
    for _, batch in iter_prime_power_segments(lo, hi, **kw):
        if len(batch):
            callback(batch)
            count += len(batch)
    return count


# ---------------------------------------------------------------------------
# checkpoint files
#
# Layout (little-endian):
#   0   5  magic b"PRLB1"
#   5   2  u16 format version
#   7   8  u64 position (every x < position has been swept)
#   15  4  u32 length L of the metadata JSON
#   19  L  metadata (utf-8 JSON)
#   .   4  u32 number of int64 counters, then the counters
#   .   4  u32 number of float64 counters, then the counters
#   .   4  u32 crc32 of all preceding bytes

MAGIC = b"PRLB1"
VERSION = 1


@dataclass
class CheckpointState:
    position: int = 2
    metadata: dict = field(default_factory=dict)
    ints: list[int] = field(default_factory=list)
    floats: list[float] = field(default_factory=list)


def dump_checkpoint(state: CheckpointState) -> bytes:
    meta = json.dumps(state.metadata, sort_keys=True).encode()
    parts = [
        MAGIC,
        struct.pack("<HQI", VERSION, state.position, len(meta)),
        meta,
        struct.pack(f"<I{len(state.ints)}q", len(state.ints), *state.ints),
        struct.pack(f"<I{len(state.floats)}d", len(state.floats), *state.floats),
    ]
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def load_checkpoint(data: bytes) -> CheckpointState:
    if len(data) < 23 or data[:5] != MAGIC:
        raise CheckpointFormatError("bad magic header")
    if zlib.crc32(data[:-4]) != struct.unpack("<I", data[-4:])[0]:
        raise CheckpointFormatError("checksum mismatch")
    try:
        version, position, mlen = struct.unpack_from("<HQI", data, 5)
        if version != VERSION:
            raise CheckpointFormatError(f"unsupported checkpoint version {version}")
        off = 19
        meta = json.loads(data[off : off + mlen].decode())
        off += mlen
        (ni,) = struct.unpack_from("<I", data, off)
        ints = list(struct.unpack_from(f"<{ni}q", data, off + 4))
        off += 4 + 8 * ni
        (nf,) = struct.unpack_from("<I", data, off)
        floats = list(struct.unpack_from(f"<{nf}d", data, off + 4))
        off += 4 + 8 * nf
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise CheckpointFormatError(f"truncated or corrupt checkpoint: {exc}") from exc
    if off != len(data) - 4:
        raise CheckpointFormatError("trailing bytes in checkpoint")
    return CheckpointState(position, meta, ints, floats)


def checkpoint(state: CheckpointState, path) -> Path:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(dump_checkpoint(state))
    tmp.replace(path)
    return path


def restore(path) -> CheckpointState:
    return load_checkpoint(Path(path).read_bytes())
