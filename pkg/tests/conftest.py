"""Shared independent oracles: trial division only, no sieve code."""
from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np
import pytest

ORACLE_LIMIT = 10**5
MODULI = (3, 4, 5, 8, 12)


def is_prime_td(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factor_td(n: int) -> list[int]:
    """Prime factors of n with multiplicity, by trial division."""
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


class Oracle:
    """Per-integer tables for n <= limit built from trial-division factorizations."""

    def __init__(self, limit: int):
        self.limit = limit
        n = limit + 1
        self.prime = np.zeros(n, dtype=bool)
        self.pp_base = np.zeros(n, dtype=np.int64)  # p if n = p^m else 0
        self.pp_exp = np.zeros(n, dtype=np.int64)
        self.semiprime = np.zeros(n, dtype=bool)
        for m in range(2, n):
            f = factor_td(m)
            if len(f) == 2:
                self.semiprime[m] = True
            if f[0] == f[-1]:
                self.pp_base[m] = f[0]
                self.pp_exp[m] = len(f)
                if len(f) == 1:
                    self.prime[m] = True

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.prime)

    def per_class(self, k: int, f: str) -> dict[int, np.ndarray]:
        """Cumulative value of f(x; k, a) for x = 0..limit, per unit class a."""
        idx = np.arange(self.limit + 1)
        if f == "pi":
            w = self.prime.astype(np.float64)
        elif f == "theta":
            w = np.where(self.prime, np.log(np.maximum(idx, 1)), 0.0)
        elif f == "psi":
            w = np.where(self.pp_base > 0, np.log(np.maximum(self.pp_base, 1)), 0.0)
        elif f == "Pi":
            w = np.where(self.pp_base > 0, 1.0 / np.maximum(self.pp_exp, 1), 0.0)
        elif f == "pi2":
            w = self.semiprime.astype(np.float64)
        else:
            raise ValueError(f)
        out = {}
        for a in range(k):
            if math.gcd(a, k) != 1:
                continue
            wa = np.where(idx % k == a, w, 0.0)
            out[a] = np.cumsum(wa)
        return out


@pytest.fixture(scope="session")
def oracle() -> Oracle:
    return Oracle(ORACLE_LIMIT)


@pytest.fixture(scope="session")
def zero_dir() -> Path:
    from primerace.zeros import default_zero_dir

    return default_zero_dir()


@pytest.fixture(scope="session")
def archive(zero_dir):
    from primerace.zeros import load_archive

    return load_archive(zero_dir)


def long_runs_enabled() -> bool:
    return os.environ.get("PRLB_LONG") == "1"
