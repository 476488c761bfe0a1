"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed even under output capture.  The long crossing check for the mod 3
race is skipped unless PRLB_LONG=1.
"""
import math
import tempfile
import time
from itertools import permutations
from pathlib import Path

import numpy as np
import pytest

from primerace.counters import FUNCTIONS, Race, Sweep, lead_density, race_series, sweep
from primerace.density import density
from primerace.kernels import bentz_mod4
from primerace.residues import build_character_table, root_sums_vanish

from conftest import MODULI, long_runs_enabled
from test_kernels import GRID, kernel_point, kt_slack

EXACT = ("pi", "pi2")


@pytest.fixture
def verdict(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def test_criterion_1_first_crossing(verdict):
    t0 = time.perf_counter()
    s = race_series(4, "pi", 3, 1, 30000)
    dt = time.perf_counter() - t0
    verdict(1, s.first_negative == 26861 and dt < 1.0, f"first negative at {s.first_negative}, {dt:.2f} s")


def test_criterion_2_mod3_no_crossing(verdict):
    t0 = time.perf_counter()
    s = race_series(3, "pi", 2, 1, 10**9)
    dt = time.perf_counter() - t0
    ok = s.first_negative is None and s.sign_changes == 0 and dt < 60
    verdict(2, ok, f"x <= 10^9: first negative {s.first_negative}, final delta {s.delta}, {dt:.1f} s")


@pytest.mark.slow
@pytest.mark.optional
@pytest.mark.skipif(not long_runs_enabled(), reason="set PRLB_LONG=1 for the hours-long crossing run")
def test_criterion_2_optional_mod3_crossing(verdict):
    s = race_series(3, "pi", 2, 1, 608_981_813_100)
    verdict(2, s.first_negative == 608_981_813_029, f"long run: first negative at {s.first_negative}")


@pytest.mark.parametrize("k,t,ref", [(8, (3, 5, 7), 0.1928013), (12, (5, 7, 11), 0.1984521)])
def test_criterion_3_density_reproduction(verdict, archive, k, t, ref):
    t0 = time.perf_counter()
    res = density(k, t, archive)
    dt = time.perf_counter() - t0
    ok = abs(res.delta - ref) <= 5e-3 and dt < 300
    verdict(3, ok, f"delta({k};{t}) = {res.delta:.7f} vs {ref}, error estimate {res.error_estimate:.1e}, {dt:.1f} s")


def test_criterion_4_normalization(verdict, archive):
    total = sum(density(8, t, archive).delta for t in permutations((3, 5, 7)))
    verdict(4, abs(total - 1) <= 1e-3, f"sum over six orderings mod 8 = {total:.9f}")


PAIRS = [(3, 2, 1), (4, 3, 1), (5, 1, 2), (5, 2, 3), (5, 1, 4), (8, 3, 5), (8, 1, 7), (8, 5, 7), (12, 1, 5), (12, 7, 11)]


def test_criterion_5_pairwise_completeness(verdict, archive):
    worst = 0.0
    for k, a, b in PAIRS:
        s = density(k, (a, b), archive).delta + density(k, (b, a), archive).delta
        worst = max(worst, abs(s - 1))
    verdict(5, worst <= 1e-3, f"{len(PAIRS)} pairs, max |sum - 1| = {worst:.1e}")


def test_criterion_6_oracle_equivalence(verdict, oracle):
    N = oracle.limit
    bad = []
    samples = np.unique(np.geomspace(2, N, 200).astype(np.int64))
    for k in MODULI:
        units = [a for a in range(k) if math.gcd(a, k) == 1]
        b = units[0]
        tabs = {f: oracle.per_class(k, f) for f in FUNCTIONS}
        # absolute per-class values, advancing one sweep through the sample points
        sw = Sweep(k, [], functions=FUNCTIONS)
        for x in samples.tolist():
            sw.run(x)
            c = sw.counts()
            for f in FUNCTIONS:
                for a in units:
                    got, want = getattr(c, f)[a], tabs[f][a][x]
                    if f in EXACT:
                        same = got == want
                    else:
                        same = math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-12)
                    if not same:
                        bad.append((k, f, a, x))
        # per-integer records from a straight sweep (one past N so that N is stored)
        races = [Race.pair(k, f, a, b) for f in FUNCTIONS for a in units[1:]]
        sw = Sweep(k, races, functions=FUNCTIONS, rho=1e-12, trajectory=True).run(N + 1)
        xs = np.arange(2, N + 1)
        traj = {(x, a): v for x, _, a, v in sw.trajectory}
        for a in units:
            got = np.array([traj.get((x, a), -1) for x in xs.tolist()])
            if not np.array_equal(got, tabs["pi"][a][2:]):
                bad.append((k, "pi-trajectory", a))
        for race in races:
            f, a = race.f, race.lead[0]
            rec = dict(sw.series(race).checkpoints)
            vals = np.array([rec.get(x, np.nan) for x in xs.tolist()], dtype=float)
            want = tabs[f][a][2:] - tabs[f][b][2:]
            if f in EXACT:
                same = np.array_equal(vals, want)
            else:
                scale = np.abs(tabs[f][a][2:]) + np.abs(tabs[f][b][2:])
                same = bool(np.all(np.abs(vals - want) <= 1e-12 * scale + 1e-12))
            if not same:
                bad.append((k, race.name))
    kernel_bad = []
    for kind, params in GRID:
        got, want = kernel_point(kind, params)
        if not math.isclose(got, want, rel_tol=1e-9, abs_tol=kt_slack(kind, params)):
            kernel_bad.append((kind, params))
    ok = not bad and not kernel_bad
    detail = (f"counters at every x <= {N} for k in {MODULI}, mismatches {bad[:3]}; "
              f"{len(GRID)} kernel points, mismatches {kernel_bad[:3]}")
    verdict(6, ok, detail)


def test_criterion_7_orthogonality(verdict):
    failures = []
    for k in range(3, 201):
        t = build_character_table(k)
        A = t.angle_matrix
        L = t.exponent
        U = A[:, A[0] >= 0]
        rows = root_sums_vanish((U[:, None, :] - U[None, :, :]) % L, L)
        cols = root_sums_vanish((U.T[:, None, :] - U.T[None, :, :]) % L, L)
        if not (np.array_equal(rows, ~np.eye(len(t), dtype=bool))
                and np.array_equal(cols, ~np.eye(U.shape[1], dtype=bool))):
            failures.append(k)
    verdict(7, not failures, f"exact row and column relations for 3 <= k <= 200, failures {failures}")


def test_criterion_8_bentz(verdict):
    parts = []
    ok = True
    for x in (50.0, 80.0, 120.0, 200.0):
        v = bentz_mod4(x).value
        ratio = v / (-0.25 * math.sqrt(math.pi * x))
        ok &= v < 0 and 0.5 <= ratio <= 2.0
        parts.append(f"x={x:g}: {v:.3f} (ratio {ratio:.3f})")
    verdict(8, ok, "; ".join(parts))


def test_criterion_9_semiprime_bias(verdict):
    d = lead_density(4, 3, 1, 10**7, f="pi2")
    verdict(9, d.value < 0.3, f"fraction of x <= 10^7 with pi2(x;4,3) > pi2(x;4,1) = {d.value:.6f}")


def test_criterion_10_determinism(verdict):
    T = 10**7
    races = [Race.pair(4, f, 3, 1) for f in FUNCTIONS]
    one = sweep(4, T, races, functions=FUNCTIONS, workers=1).result_json()
    many = sweep(4, T, races, functions=FUNCTIONS, workers=4).result_json()
    with tempfile.TemporaryDirectory() as tmp:
        ck = Path(tmp) / "part.ckpt"
        sweep(4, T // 3, races, functions=FUNCTIONS).save(ck)
        resumed = Sweep.from_checkpoint(ck).run(T)
        res_json = resumed.result_json()
        full_ck = Path(tmp) / "full.ckpt"
        resumed_ck = Path(tmp) / "resumed.ckpt"
        sweep(4, T, races, functions=FUNCTIONS).save(full_ck)
        resumed.save(resumed_ck)
        same_ck = full_ck.read_bytes() == resumed_ck.read_bytes()
    ok = one == many and res_json == one and same_ck
    verdict(10, ok, f"T = 10^7: threads 1 vs 4 identical {one == many}, resume identical {res_json == one}, "
                    f"checkpoint bytes identical {same_ck}")
