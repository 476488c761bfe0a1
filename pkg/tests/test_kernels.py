import math

import numpy as np
import pytest

from primerace.errors import InvalidRaceError, PrimeRaceError
from primerace.kernels import (
    KernelSpec,
    abel_delta,
    bentz_chi3,
    bentz_magnitude,
    bentz_mod4,
    bentz_sum,
    chebyshev_series,
    evaluate,
    kt_gauss_sum,
)

from conftest import factor_td, is_prime_td

# ---------------------------------------------------------------------------
# naive oracles: plain loops over trial-division primes, no truncation logic

_PRIMES = [n for n in range(2, 100_001) if is_prime_td(n)]


def eps(k, n, l1, l2):
    r = n % k
    return 1 if r == l1 % k else (-1 if r == l2 % k else 0)


def naive_abel(F, r, k, l1, l2, N):
    total = 0.0
    for n in range(2, N + 1):
        e = eps(k, n, l1, l2)
        if not e:
            continue
        f = factor_td(n)
        if f[0] != f[-1]:
            continue
        p, m = f[0], len(f)
        if F == "psi":
            w = math.log(p)
        elif F == "Pi":
            w = 1.0 / m
        elif m == 1:
            w = math.log(p) if F == "theta" else 1.0
        else:
            continue
        total += e * w * math.exp(-n * r)
    return total


def naive_kt(k, l1, l2, x, r, pmax):
    return sum(eps(k, p, l1, l2) * math.log(p) * math.exp(-math.log(p / x) ** 2 / r) for p in _PRIMES if p <= pmax)


def naive_bentz(k, l1, l2, x, alpha, scale, pmax):
    return sum(
        eps(k, p, l1, l2) * math.log(p) * p**-alpha * math.exp(-math.log(p) ** 2 / (scale * x))
        for p in _PRIMES
        if p <= pmax
    )


GRID = [
    ("abel", dict(F="psi", r=1.0, k=3, pair=(2, 1))),
    ("abel", dict(F="pi", r=0.05, k=4, pair=(3, 1))),
    ("abel", dict(F="theta", r=0.02, k=5, pair=(2, 1))),
    ("abel", dict(F="Pi", r=0.1, k=8, pair=(3, 1))),
    ("abel", dict(F="psi", r=0.01, k=12, pair=(11, 1))),
    # windows x exp(r/2 + 6.1 sqrt(r/2)) stay below the oracle's 10^5
    ("kt", dict(x=2000.0, r=0.5, k=4, pair=(3, 1))),
    ("kt", dict(x=500.0, r=1.0, k=3, pair=(2, 1))),
    ("kt", dict(x=5000.0, r=0.25, k=8, pair=(5, 1))),
    ("kt", dict(x=100.0, r=1.5, k=12, pair=(7, 1))),
    ("kt", dict(x=50.0, r=0.5, k=5, pair=(3, 4))),
    ("bentz", dict(x=10.0, alpha=0.5, scale=1.0, k=4, pair=(1, 3))),
    ("bentz", dict(x=20.0, alpha=0.25, scale=1.0, k=3, pair=(1, 2))),
    ("bentz", dict(x=5.0, alpha=0.0, scale=4.0, k=4, pair=(1, 3))),
    ("bentz", dict(x=15.0, alpha=0.5, scale=1.0, k=8, pair=(1, 7))),
    ("bentz", dict(x=30.0, alpha=0.4, scale=1.0, k=5, pair=(1, 2))),
    ("cheb", dict(f="one", X=12)),
    ("cheb", dict(f="inv", X=10**5)),
    ("cheb", dict(f="exp", X=5 * 10**4)),
    ("cheb", dict(f="invlog", X=3 * 10**4)),
    ("cheb", dict(f="one", X=4)),
]

FUNCS = {
    "one": lambda x: 1.0,
    "inv": lambda x: 1.0 / x,
    "exp": lambda x: math.exp(-x / 1000.0),
    "invlog": lambda x: 1.0 / math.log(x),
}


def kernel_point(kind, params):
    """(library value, naive value) for one grid point, after checking truncation."""
    if kind == "cheb":
        f = FUNCS[params["f"]]
        want = 0.0
        for p in _PRIMES[1:]:
            if p > params["X"]:
                break
            want += (-1) ** ((p + 1) // 2) * f(p)
        return chebyshev_series(f, params["X"]), want
    k, (l1, l2) = params["k"], params["pair"]
    if kind == "abel":
        res = abel_delta(params["F"], params["r"], k, l1, l2)
        assert res.p_max <= 100_000
        assert res.tail_bound < 1e-12 * abs(res.value) + 1e-300
        return res.value, naive_abel(params["F"], params["r"], k, l1, l2, res.p_max)
    if kind == "kt":
        res = kt_gauss_sum(k, l1, l2, params["x"], params["r"])
        assert not res.truncated and res.p_max <= 100_000
        # the naive sum runs over every prime below 10^5, not just the window
        return res.value, naive_kt(k, l1, l2, params["x"], params["r"], 100_000)
    res = bentz_sum(k, l1, l2, params["x"], params["alpha"], scale=params["scale"], max_prime=100_000)
    return res.value, naive_bentz(k, l1, l2, params["x"], params["alpha"], params["scale"], res.p_max)


def kt_slack(kind, params):
    """Absolute slack for the mass outside the kt window, zero otherwise."""
    return 1e-9 * params["x"] if kind == "kt" else 0.0


@pytest.mark.parametrize("kind,params", GRID)
def test_kernel_matches_naive_sum(kind, params):
    got, want = kernel_point(kind, params)
    assert got == pytest.approx(want, rel=1e-9, abs=kt_slack(kind, params))


def test_abel_examples():
    r5 = abel_delta("pi", 5.0, 4, 3, 1)
    assert r5.value > 0
    assert r5.value == pytest.approx(math.exp(-15), rel=2 * math.exp(-10))
    small = abel_delta("pi", 0.01, 4, 3, 1)
    direct = math.fsum(eps(4, p, 3, 1) * math.exp(-p * 0.01) for p in _PRIMES if p <= 10_000)
    assert abs(small.value - direct) <= small.tail_bound + math.exp(-100) * 10_000 + 1e-12
    psi = abel_delta("psi", 1.0, 3, 2, 1)
    assert psi.value == pytest.approx(naive_abel("psi", 1.0, 3, 2, 1, 50), rel=1e-12)
    with pytest.raises(PrimeRaceError):
        abel_delta("pi", 0.0, 4, 3, 1)


def test_chebyshev_examples():
    assert chebyshev_series(lambda x: 1.0, 12) == 2
    f = lambda x: 1.0 / x  # noqa: E731
    assert chebyshev_series(f, 4) == f(3)
    assert chebyshev_series(lambda x: math.exp(-x / 1000.0), 10**5) > 0


def test_kt_examples():
    with pytest.raises(InvalidRaceError):
        kt_gauss_sum(4, 3, 3, 1e4, 2.0)
    with pytest.raises(PrimeRaceError):
        kt_gauss_sum(4, 3, 1, 1.0, 2.0)
    x = 1e4
    res = kt_gauss_sum(4, 3, 1, x, math.log(x))
    assert res.value > 0
    # small r concentrates on the prime nearest x: 29 = 1 mod 4 outweighs 31
    near = kt_gauss_sum(4, 3, 1, 29.5, 0.001)
    assert near.value < 0
    assert near.value == pytest.approx(naive_kt(4, 3, 1, 29.5, 0.001, 1000), rel=1e-12)
    sharper = kt_gauss_sum(4, 3, 1, 29.5, 1e-5)
    assert sharper.value == pytest.approx(-math.log(29) * math.exp(-math.log(29 / 29.5) ** 2 / 1e-5), rel=1e-9)
    with pytest.warns(RuntimeWarning):
        kt_gauss_sum(4, 3, 1, 100.0, 10.0)


def test_bentz_examples():
    v = bentz_mod4(50.0)
    assert v.value < 0
    for x in (50.0, 80.0, 120.0):
        ratio = bentz_mod4(x).value / -bentz_magnitude(x)
        assert 0.5 <= ratio <= 2.0
    tiny = bentz_mod4(0.05)
    assert tiny.value < 0  # p = 3 dominates with sign -1
    assert tiny.value == pytest.approx(-math.log(3) / math.sqrt(3) * math.exp(-math.log(3) ** 2 / 0.05), rel=1e-3)
    with pytest.raises(PrimeRaceError):
        bentz_sum(4, 1, 3, 50.0, 0.6)


def test_bentz_direction_and_growth():
    xs = np.arange(30, 201, 10)
    vals = [bentz_mod4(float(x)).value for x in xs]
    assert all(v < 0 for v in vals)
    assert all(abs(b) > abs(a) for a, b in zip(vals, vals[1:]))


def test_bentz_chi3_negative():
    assert bentz_chi3(50.0).value < 0


def test_swap_negates():
    assert abel_delta("psi", 0.3, 5, 2, 3).value == -abel_delta("psi", 0.3, 5, 3, 2).value
    assert kt_gauss_sum(8, 3, 5, 500.0, 2.0).value == -kt_gauss_sum(8, 5, 3, 500.0, 2.0).value
    a = bentz_sum(4, 1, 3, 20.0, 0.5, max_prime=10**5).value
    b = bentz_sum(4, 3, 1, 20.0, 0.5, max_prime=10**5).value
    assert a == -b


@pytest.mark.parametrize("x", [30.0, 60.0, 120.0])
def test_alpha_continuity(x):
    a = bentz_sum(4, 1, 3, x, 0.3).value
    b = bentz_sum(4, 1, 3, x, 0.3 + 1e-6).value
    assert abs(a - b) < 1e-3 * abs(a)


def test_truncation_flag():
    res = bentz_mod4(50.0)
    assert res.truncated and res.tail_bound > 0
    small = bentz_sum(4, 1, 3, 0.5, 0.5)
    assert not small.truncated


def test_spec_dispatch():
    spec = KernelSpec("abel", {"F": "pi", "r": 5.0})
    assert evaluate(spec, 4, 3, 1).value == abel_delta("pi", 5.0, 4, 3, 1).value
    with pytest.raises(PrimeRaceError):
        KernelSpec("abel", {"r": -1.0})
    with pytest.raises(PrimeRaceError):
        KernelSpec("bentz_gauss", {"x": 1.0, "alpha": 0.7})
    with pytest.raises(PrimeRaceError):
        KernelSpec("fourier", {})


def test_mod5_growth_disjunction():
    # the claim is for at least one of the classes 2, 3 against 4; only the disjunction is checked
    xs = (30.0, 60.0, 100.0, 150.0, 200.0)

    def grows(l1):
        vals = [bentz_sum(5, l1, 4, x, 0.5, scale=4.0).value for x in xs]
        return all(v > 0 for v in vals) and all(b > a for a, b in zip(vals, vals[1:]))

    assert grows(2) or grows(3)
