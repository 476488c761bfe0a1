import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from primerace.errors import CheckpointFormatError, EmptyRangeError
from primerace.sieve import (
    CheckpointState,
    checkpoint,
    dump_checkpoint,
    iter_segments,
    load_checkpoint,
    primes_between,
    restore,
    stream_prime_powers,
    stream_primes,
)

from conftest import factor_td, is_prime_td


def collect(lo, hi, **kw):
    out = []
    n = stream_primes(lo, hi, out.append, **kw)
    arr = np.concatenate(out) if out else np.zeros(0, dtype=np.int64)
    assert n == len(arr)
    return arr


def test_first_primes():
    assert collect(2, 30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(collect(2, 101)) == 25
    window = collect(26850, 26870).tolist()
    assert 26861 in window and 26863 in window


def test_empty_range():
    with pytest.raises(EmptyRangeError):
        stream_primes(10, 10, lambda p: None)
    with pytest.raises(EmptyRangeError):
        stream_primes(10, 5, lambda p: None)


def test_pi_million(oracle):
    assert len(primes_between(2, 10**6)) == 78498
    # trial-division oracle below 10^5
    assert np.array_equal(primes_between(2, oracle.limit + 1), oracle.primes())


@given(st.integers(0, 200_000), st.integers(1, 5_000), st.sampled_from([64, 1024, 4096]))
@settings(max_examples=80, deadline=None)
def test_arbitrary_windows(lo, width, seg):
    hi = lo + width
    if hi <= 2:
        return
    got = primes_between(lo, hi, segment_bytes=seg)
    want = [n for n in range(max(lo, 2), hi) if is_prime_td(n)]
    assert got.tolist() == want


def test_segments_ascending_and_disjoint():
    segs = list(iter_segments(2, 10**6, segment_bytes=4096))
    assert segs[0].lo == 2 and segs[-1].hi == 10**6
    for a, b in zip(segs, segs[1:]):
        assert a.hi == b.lo
        if len(a.primes) and len(b.primes):
            assert a.primes[-1] < b.primes[0]


def test_segment_size_independence():
    small = primes_between(2, 10**7, segment_bytes=2**16)
    large = primes_between(2, 10**7, segment_bytes=2**20)
    assert np.array_equal(small, large)
    assert len(small) == 664579


def test_worker_independence():
    one = primes_between(2, 3 * 10**6, segment_bytes=2**14, workers=1)
    four = primes_between(2, 3 * 10**6, segment_bytes=2**14, workers=4)
    assert np.array_equal(one, four)


def power_events(lo, hi):
    events = []
    stream_prime_powers(lo, hi, lambda b: events.extend(b.events()))
    return events


def test_prime_power_examples():
    ev = power_events(2, 20)
    assert [e.n for e in ev] == [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19]
    e16 = next(e for e in ev if e.n == 16)
    assert (e16.p, e16.m) == (2, 4)
    assert [e.n for e in power_events(20, 25)] == [23]


def test_prime_powers_against_trial_division():
    ev = power_events(2, 20_000)
    for e in ev:
        assert e.p ** e.m == e.n and e.log_p > 0
        assert np.isclose(e.log_p, np.log(e.p), rtol=0, atol=1e-15)
    want = [n for n in range(2, 20_000) if len(set(factor_td(n))) == 1]
    assert [e.n for e in ev] == want


def test_checkpoint_roundtrip(tmp_path):
    st_ = CheckpointState(123456, {"k": 4, "note": "x"}, [1, -2, 3 * 10**15], [0.1, -2.5e-300, 1e300])
    path = checkpoint(st_, tmp_path / "c.bin")
    back = restore(path)
    assert back == st_
    data = path.read_bytes()
    assert data[:5] == b"PRLB1"
    assert dump_checkpoint(back) == data


def test_checkpoint_errors(tmp_path):
    data = bytearray(dump_checkpoint(CheckpointState(10, {}, [1], [2.0])))
    bad_magic = b"XXXXX" + bytes(data[5:])
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(bad_magic)
    flipped = bytearray(data)
    flipped[20] ^= 0xFF
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(bytes(flipped))
    # wrong version with a valid checksum
    import struct
    import zlib

    body = bytearray(data[:-4])
    struct.pack_into("<H", body, 5, 99)
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(bytes(body) + struct.pack("<I", zlib.crc32(bytes(body))))
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(b"PRLB1")


def test_empty_checkpoint_restores_initial_state(tmp_path):
    path = checkpoint(CheckpointState(), tmp_path / "e.bin")
    assert restore(path) == CheckpointState()
