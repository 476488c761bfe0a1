"""Weighted prime sums: Abel means, Chebyshev's alternating series and the
Gaussian-log kernels.

All sums are accumulated with :func:`math.fsum` (correctly rounded), which
matters because terms span hundreds of orders of magnitude.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, InvalidRaceError
from .residues import build_residue_system, check_race
from .sieve import higher_powers, merge_prime_powers, primes_between

ABEL_FUNCTIONS = ("psi", "Pi", "theta", "pi")
DEFAULT_MAX_PRIME = 10**8


@dataclass(frozen=True)
class KernelSpec:
    kind: str  # abel | kt_gauss | bentz_gauss | chebyshev_f
    params: dict
    weight: str = "log_p"

    def __post_init__(self):
        if self.kind not in ("abel", "kt_gauss", "bentz_gauss", "chebyshev_f"):
            raise InvalidParameterError(f"unknown kernel kind {self.kind!r}")
        if self.weight not in ("log_p", "lambda", "lambda_over_log", "unit"):
            raise InvalidParameterError(f"unknown weight {self.weight!r}")
        for key in ("r", "x"):
            if key in self.params and not self.params[key] > 0:
                raise InvalidParameterError(f"kernel parameter {key} must be positive")
        if "alpha" in self.params and not 0 <= self.params["alpha"] <= 0.5:
            raise InvalidParameterError("alpha must lie in [0, 1/2]")


@dataclass(frozen=True)
class KernelResult:
    value: float
    tail_bound: float
    p_max: int  # largest integer included in the sum
    n_terms: int
    truncated: bool = False  # the cutoff rule was capped by max_prime


@lru_cache(maxsize=2)
def _primes_upto(hi: int) -> np.ndarray:
    p = primes_between(2, hi + 1)
    p.setflags(write=False)
    return p


def _race_signs(k: int, l1: int, l2: int, n: np.ndarray) -> np.ndarray:
    sys = build_residue_system(k)
    check_race(sys, l1, l2)
    r = n % k
    return np.where(r == l1 % k, 1, np.where(r == l2 % k, -1, 0))


# ---------------------------------------------------------------------------
# Abel-weighted race sums


def _abel_tail(N: int, r: float, F: str) -> float:
    """Bound on sum_{n > N} W(n) e^{-nr} over both classes."""
    if F in ("psi", "theta"):
        # integral of log t e^{-tr} from N, using E1(z) <= e^{-z}/z
        return math.exp(-N * r) * (math.log(N) + 1.0 / (N * r)) / r
    return math.exp(-N * r) / r


def abel_delta(F: str, r: float, k: int, l1: int, l2: int, *, rtol: float = 1e-12) -> KernelResult:
    """Sum over n = l1 minus sum over n = l2 of W_F(n) e^{-nr}.

    ``F`` selects the weight: Lambda(n) for psi, Lambda(n)/log n for Pi,
    log p on primes for theta, 1 on primes for pi.  The series is cut at N
    once the certified tail is below ``rtol`` times the partial sum.
    """
    if F not in ABEL_FUNCTIONS:
        raise InvalidParameterError(f"F must be one of {ABEL_FUNCTIONS}")
    if not r > 0:
        raise InvalidParameterError("Abel rate r must be positive")
    _race_signs(k, l1, l2, np.zeros(0, dtype=np.int64))
    N = max(64, math.ceil(30.0 / r))
    while True:
        value, n_terms = _abel_partial(F, r, k, l1, l2, N)
        tail = _abel_tail(N, r, F)
        if tail < rtol * (abs(value) + 1e-300) or N > 2**40:
            return KernelResult(value, tail, N, n_terms)
        # grow N until e^{-Nr} drops below the needed factor
        N = max(2 * N, math.ceil(N + math.log(max(tail, 1e-300) / (rtol * (abs(value) + 1e-300))) / r) + 1)


def _abel_partial(F, r, k, l1, l2, N):
    primes = primes_between(2, N + 1)
    if F in ("psi", "Pi"):
        batch = merge_prime_powers(primes, higher_powers(2, N + 1))
        n, logp, m = batch.n, batch.log_p, batch.m
        w = logp if F == "psi" else 1.0 / m
    else:
        n = primes
        w = np.log(n.astype(float)) if F == "theta" else np.ones(len(n))
    eps = _race_signs(k, l1, l2, n)
    sel = eps != 0
    terms = eps[sel] * w[sel] * np.exp(-n[sel] * r)
    return math.fsum(terms.tolist()), int(sel.sum())


# ---------------------------------------------------------------------------
# Chebyshev's alternating series


def chebyshev_series(f: Callable, X: float) -> float:
    """f(3) - f(5) + f(7) + f(11) - ... over odd primes p <= X.

    The sign of the p-term is (-1)^((p+1)/2): + for p = 3 (mod 4), - for p = 1 (mod 4).
    """
    if X < 3:
        return 0.0
    p = primes_between(3, int(math.floor(X)) + 1)
    try:
        vals = np.asarray(f(p.astype(float)), dtype=float)
        if vals.shape != p.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([f(float(q)) for q in p], dtype=float)
    sign = np.where(p % 4 == 3, 1.0, -1.0)
    return math.fsum((sign * vals).tolist())


# ---------------------------------------------------------------------------
# Gaussian-log kernels


@dataclass(frozen=True)
class _Window:
    lo: int
    hi: int
    truncated: bool


def _kt_window(x: float, r: float, z: float, max_prime: int) -> _Window:
    # in u = log(p/x) the weighted mass is ~ x exp(u - u^2/r): a Gaussian
    # centred at r/2 with standard deviation sqrt(r/2)
    c, s = r / 2.0, math.sqrt(r / 2.0)
    lo = max(2, math.floor(x * math.exp(c - z * s)))
    hi_f = x * math.exp(c + z * s)
    hi = min(max_prime, math.ceil(hi_f)) if hi_f < 1e18 else max_prime
    return _Window(lo, hi, hi_f > max_prime)


def kt_gauss_sum(
    k: int,
    l1: int,
    l2: int,
    x: float,
    r: float,
    weight: str = "log_p",
    *,
    max_prime: int = DEFAULT_MAX_PRIME,
) -> KernelResult:
    """sum_p eps(k;p,l1,l2) W(p) exp(-(1/r) log^2(p/x))."""
    if not x > 1:
        raise InvalidParameterError("kt_gauss_sum needs x > 1")
    if not r > 0:
        raise InvalidParameterError("kt_gauss_sum needs r > 0")
    check_race(build_residue_system(k), l1, l2)
    if r > math.log(x):
        warnings.warn(f"r = {r} exceeds log x = {math.log(x):.4g}", RuntimeWarning, stacklevel=2)
    # z = 6.1 puts the Gaussian tail mass below 1e-9 of the centre
    win = _kt_window(x, r, 6.1, max_prime)
    p = primes_between(win.lo, win.hi + 1)
    eps = _race_signs(k, l1, l2, p)
    sel = eps != 0
    p, eps = p[sel], eps[sel]
    lp = np.log(p.astype(float))
    w = _prime_weight(weight, lp)
    terms = eps * w * np.exp(-np.log(p / x) ** 2 / r)
    value = math.fsum(terms.tolist())
    tail = _gauss_tail_mass(x, r, win)
    return KernelResult(value, tail, win.hi, len(p), win.truncated)


def _prime_weight(weight: str, lp: np.ndarray) -> np.ndarray:
    if weight in ("log_p", "lambda"):
        return lp
    if weight == "unit":
        return np.ones_like(lp)
    return np.ones_like(lp)  # lambda_over_log on primes


def _gauss_tail_mass(x, r, win: _Window) -> float:
    """Unsigned kernel mass outside the window, by the prime number theorem."""
    c, s = r / 2.0, math.sqrt(r / 2.0)
    scale = x * math.sqrt(math.pi * r) * math.exp(r / 4.0) / 2.0
    u_hi = math.log(win.hi / x) if win.hi > 0 else 0.0
    u_lo = math.log(max(win.lo, 2) / x)
    upper = scale * math.erfc((u_hi - c) / (s * math.sqrt(2)) * 1.0)
    lower = scale * math.erfc((c - u_lo) / (s * math.sqrt(2))) if win.lo > 2 else 0.0
    return upper + lower


def _bentz_cutoff(x: float, alpha: float) -> float:
    # log^2 p / x > 300 + alpha log p  <=>  u^2 - x alpha u - 300 x > 0
    return (x * alpha + math.sqrt((x * alpha) ** 2 + 1200 * x)) / 2.0


def bentz_sum(
    k: int,
    l1: int,
    l2: int,
    x: float,
    alpha: float,
    *,
    scale: float = 1.0,
    max_prime: int = DEFAULT_MAX_PRIME,
) -> KernelResult:
    """sum_p eps(k;p,l1,l2) log p p^{-alpha} exp(-log^2 p / (scale x)).

    ``scale = 4`` gives the variant with exp(-log^2 p / 4x).  The natural
    cutoff (kernel below e^-300) lies far beyond any sieve for moderate x, so
    the sum is capped at ``max_prime`` and the result is flagged truncated;
    ``tail_bound`` is the unsigned mass beyond the cap.
    """
    if not 0 <= alpha <= 0.5:
        raise InvalidParameterError("alpha must lie in [0, 1/2]")
    if not x > 0:
        raise InvalidParameterError("bentz_sum needs x > 0")
    check_race(build_residue_system(k), l1, l2)
    xs = scale * x
    u_cut = _bentz_cutoff(xs, alpha)
    hi_f = math.exp(min(u_cut, 700.0))
    truncated = hi_f > max_prime
    hi = max_prime if truncated else max(3, math.ceil(hi_f))
    p = _primes_upto(hi)
    eps = _race_signs(k, l1, l2, p)
    sel = eps != 0
    p, eps = p[sel], eps[sel]
    lp = np.log(p.astype(float))
    terms = eps * lp * np.exp(-alpha * lp - lp * lp / xs)
    value = math.fsum(terms.tolist())
    tail = _bentz_tail(xs, alpha, math.log(hi)) if truncated else math.exp(-300.0)
    return KernelResult(value, tail, hi, len(p), truncated)


def _bentz_tail(xs: float, alpha: float, u0: float) -> float:
    # sum_{p > e^u0} log p p^-alpha e^{-log^2 p/xs} ~ int_{u0} e^{(1-alpha)u - u^2/xs} du
    b = 1.0 - alpha
    c = b * xs / 2.0
    sig = math.sqrt(xs / 2.0)
    return math.sqrt(math.pi * xs) / 2.0 * math.exp(b * b * xs / 4.0) * math.erfc((u0 - c) / (sig * math.sqrt(2)))


def bentz_mod4(x: float, alpha: float = 0.5, **kw) -> KernelResult:
    """sum_p (-1)^((p-1)/2) log p p^-alpha exp(-log^2 p / x)."""
    return bentz_sum(4, 1, 3, x, alpha, **kw)


def bentz_chi3(x: float, alpha: float = 0.5, **kw) -> KernelResult:
    """sum_p chi_3(p) log p p^-alpha exp(-log^2 p / x), chi_3 the character mod 3."""
    return bentz_sum(3, 1, 2, x, alpha, **kw)


def bentz_magnitude(x: float) -> float:
    """Leading size (1/4) sqrt(pi x) of the alpha = 1/2 divergence."""
    return 0.25 * math.sqrt(math.pi * x)


def evaluate(spec: KernelSpec, k: int | None = None, l1: int | None = None, l2: int | None = None) -> KernelResult:
    """Dispatch a :class:`KernelSpec` to the matching sum."""
    p = spec.params
    if spec.kind == "abel":
        return abel_delta(p.get("F", "psi"), p["r"], k, l1, l2)
    if spec.kind == "kt_gauss":
        return kt_gauss_sum(k, l1, l2, p["x"], p["r"], spec.weight)
    if spec.kind == "bentz_gauss":
        return bentz_sum(k, l1, l2, p["x"], p["alpha"], scale=p.get("scale", 1.0))
    if spec.kind == "chebyshev_f":
        v = chebyshev_series(p["f"], p["X"])
        return KernelResult(v, 0.0, int(p["X"]), 0)
    raise InvalidRaceError(spec.kind)  # pragma: no cover
