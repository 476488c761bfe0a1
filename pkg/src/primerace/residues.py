"""Reduced residue systems, quadratic residues and Dirichlet character tables.

Character values are kept as exact angles: ``chi(a) = exp(2*pi*i * num / order)``
where ``order`` is the exponent of the unit group.  Complex values are only
produced by :meth:`CharacterTable.values`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

import numpy as np

from .errors import InvalidModulusError, InvalidRaceError, InvalidResidueError

MAX_MODULUS = 10**6


def factorize(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _check_modulus(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise InvalidModulusError(f"modulus must be an integer, got {k!r}")
    k = int(k)
    if k < 3 or k > MAX_MODULUS:
        raise InvalidModulusError(f"modulus must lie in [3, {MAX_MODULUS}], got {k}")
    return k


@dataclass(frozen=True)
class ResidueSystem:
    modulus: int
    reduced: tuple[int, ...]
    square_count: np.ndarray = field(repr=False, compare=False)

    @property
    def euler_phi(self) -> int:
        return len(self.reduced)

    def is_unit(self, a: int) -> bool:
        return math.gcd(a % self.modulus, self.modulus) == 1

    def N(self, l: int) -> int:
        """Number of x mod k with x^2 = l (mod k)."""
        return int(self.square_count[l % self.modulus])

    def is_quadratic_residue(self, l: int) -> bool:
        return self.is_unit(l) and self.N(l) > 0

    def quadratic_residues(self) -> tuple[int, ...]:
        return tuple(a for a in self.reduced if self.square_count[a] > 0)

    def non_residues(self) -> tuple[int, ...]:
        return tuple(a for a in self.reduced if self.square_count[a] == 0)

    def inverse(self, a: int) -> int:
        self.require_unit(a)
        return pow(a, -1, self.modulus)

    def require_unit(self, a: int) -> int:
        if not self.is_unit(a):
            raise InvalidResidueError(f"{a} is not a unit modulo {self.modulus}")
        return a % self.modulus

    def race_classification(self, l1: int, l2: int) -> str:
        """Describe a two-class race by quadratic character of its classes.

        Returns ``"nonresidue-vs-residue"`` when ``l1`` is a non-residue and
        ``l2`` a residue (the configuration where ``l1`` is expected to lead),
        ``"residue-vs-nonresidue"`` for the reverse, and ``"same-type"``
        otherwise.  Purely descriptive; nothing downstream relies on it.
        """
        q1, q2 = self.is_quadratic_residue(l1), self.is_quadratic_residue(l2)
        if q1 == q2:
            return "same-type"
        return "residue-vs-nonresidue" if q1 else "nonresidue-vs-residue"


def build_residue_system(k: int) -> ResidueSystem:
    k = _check_modulus(k)
    x = np.arange(k, dtype=np.int64)
    sq = np.bincount((x * x) % k, minlength=k)
    gcds = np.gcd(x, k)
    reduced = tuple(int(a) for a in np.flatnonzero(gcds == 1))
    sq.setflags(write=False)
    return ResidueSystem(k, reduced, sq)


@dataclass(frozen=True)
class BiasConstant:
    modulus: int
    residue: int
    value: int


def bias_constant(sys: ResidueSystem, a: int) -> BiasConstant:
    """``c(q, a) = N_q(a) - 1``, the mean offset of a class in a prime race."""
    a = sys.require_unit(a)
    return BiasConstant(sys.modulus, a, sys.N(a) - 1)


def epsilon(sys: ResidueSystem, n: int, l1: int, l2: int) -> int:
    check_race(sys, l1, l2)
    r = n % sys.modulus
    if r == l1 % sys.modulus:
        return 1
    if r == l2 % sys.modulus:
        return -1
    return 0


def check_race(sys: ResidueSystem, l1: int, l2: int) -> None:
    if not (sys.is_unit(l1) and sys.is_unit(l2)):
        raise InvalidRaceError(f"race classes ({l1}, {l2}) must be units mod {sys.modulus}")
    if (l1 - l2) % sys.modulus == 0:
        raise InvalidRaceError("race classes must be distinct")


# ---------------------------------------------------------------------------
# unit group structure


def _primitive_root(p: int, e: int) -> int:
    """Smallest primitive root modulo the odd prime power p**e."""
    pe = p**e
    order = pe // p * (p - 1)
    qs = [q for q, _ in factorize(order)]
    for g in range(2, pe):
        if g % p == 0:
            continue
        if all(pow(g, order // q, pe) != 1 for q in qs):
            return g
    raise AssertionError("no primitive root")  # pragma: no cover


@dataclass(frozen=True)
class _Component:
    prime_power: int
    generator: int  # element mod k (lifted through CRT)
    order: int


def _crt_lift(residue: int, pe: int, k: int) -> int:
    # x = residue (mod pe), x = 1 (mod k/pe)
    m = k // pe
    if m == 1:
        return residue % k
    return (residue * m * pow(m, -1, pe) + pe * pow(pe, -1, m)) % k


def _dlog_tables(k: int):
    """Component list and the exponent vector of every residue mod k.

    The exponent array has shape (k, n_components); rows of non-units are -1.
    """
    comps: list[_Component] = []
    cols: list[np.ndarray] = []
    x = np.arange(k, dtype=np.int64)
    for p, e in factorize(k):
        pe = p**e
        r = x % pe
        if p == 2:
            if e == 1:
                continue
            # -1 component
            u = np.where(r % 4 == 1, 0, 1)
            comps.append(_Component(pe, _crt_lift(pe - 1, pe, k), 2))
            u = np.where(r % 2 == 1, u, -1)
            cols.append(u)
            if e >= 3:
                order = 2 ** (e - 2)
                log5 = np.full(pe, -1, dtype=np.int64)
                g = 1
                for j in range(order):
                    log5[g] = j
                    log5[pe - g] = j  # -5^j shares the 5-exponent
                    g = g * 5 % pe
                comps.append(_Component(pe, _crt_lift(5, pe, k), order))
                cols.append(log5[r])
        else:
            g0 = _primitive_root(p, e)
            order = pe // p * (p - 1)
            logs = np.full(pe, -1, dtype=np.int64)
            g = 1
            for j in range(order):
                logs[g] = j
                g = g * g0 % pe
            comps.append(_Component(pe, _crt_lift(g0, pe, k), order))
            cols.append(logs[r])
    if cols:
        exps = np.stack(cols, axis=1)
    else:
        exps = np.zeros((k, 0), dtype=np.int64)
    unit = np.gcd(x, k) == 1
    exps[~unit] = -1
    return comps, exps


@dataclass(frozen=True)
class Character:
    """One Dirichlet character, identified by its exponent tuple."""

    table: "CharacterTable" = field(repr=False, compare=False)
    index: int
    exponents: tuple[int, ...]

    def angle(self, a: int) -> Fraction | None:
        """chi(a) as a fraction of a full turn, ``None`` when gcd(a, k) > 1."""
        num = self.table.angle_numerator(self.index, a)
        if num < 0:
            return None
        return Fraction(num, self.table.exponent)

    def __call__(self, a: int) -> complex:
        num = self.table.angle_numerator(self.index, a)
        if num < 0:
            return 0j
        return _root_of_unity(num, self.table.exponent)

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @property
    def is_real(self) -> bool:
        return self.table.is_real[self.index]

    @property
    def conductor(self) -> int:
        return self.table.conductors[self.index]

    @property
    def order(self) -> int:
        return self.table.orders[self.index]

    def conjugate(self) -> "Character":
        return self.table[self.table.conjugate_index(self.index)]

    def fingerprint(self) -> tuple[str, ...]:
        """Values on 0..k-1 as rational-angle tokens, ``"0"`` for non-units."""
        return self.table.fingerprint(self.index)


def _root_of_unity(num: int, den: int) -> complex:
    num %= den
    # exact values at the quarter turns
    if 4 * num % den == 0:
        return (1, 1j, -1, -1j)[4 * num // den]
    t = 2 * math.pi * num / den
    return complex(math.cos(t), math.sin(t))


class CharacterTable:
    """All Dirichlet characters modulo ``k``.

    Canonical order: lexicographic in the exponent tuple ``(t_1, ..., t_m)``
    attached to the cyclic components of (Z/k)^x, components listed by
    increasing prime, with the 2-part split as <-1> x <5>.  Index 0 is the
    principal character.
    """

    def __init__(self, k: int):
        self.modulus = k = _check_modulus(k)
        comps, exps = _dlog_tables(k)
        self.components: tuple[_Component, ...] = tuple(comps)
        self.component_orders = tuple(c.order for c in comps)
        self.exponent = math.lcm(*self.component_orders) if comps else 1
        self._exps = exps
        self._unit = exps[:, 0] >= 0 if comps else np.gcd(np.arange(k), k) == 1
        self.exponent_tuples = tuple(product(*(range(n) for n in self.component_orders)))
        # numerator multiplier per component: t_i * e_i * (L / n_i)
        self._scale = np.array([self.exponent // n for n in self.component_orders], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.exponent_tuples)

    def __getitem__(self, i: int) -> Character:
        return Character(self, i, self.exponent_tuples[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @cached_property
    def units(self) -> np.ndarray:
        return np.flatnonzero(self._unit)

    @cached_property
    def angle_matrix(self) -> np.ndarray:
        """Integer numerators ``num[i, a]`` (mod exponent), -1 for non-units."""
        k = self.modulus
        if not self.component_orders:
            m = np.zeros((1, k), dtype=np.int64)
        else:
            t = np.array(self.exponent_tuples, dtype=np.int64) * self._scale
            e = np.where(self._exps >= 0, self._exps, 0)
            m = (t @ e.T) % self.exponent
        m[:, ~self._unit] = -1
        m.setflags(write=False)
        return m

    def angle_numerator(self, i: int, a: int) -> int:
        a %= self.modulus
        if not self._unit[a]:
            return -1
        if not self.component_orders:
            return 0
        t = np.asarray(self.exponent_tuples[i], dtype=np.int64)
        return int((t * self._exps[a] * self._scale).sum() % self.exponent)

    def values(self, i: int | None = None) -> np.ndarray:
        """Complex values on residues 0..k-1 (one row, or all rows)."""
        m = self.angle_matrix if i is None else self.angle_matrix[i]
        v = np.exp(2j * np.pi * np.where(m >= 0, m, 0) / self.exponent)
        # snap quarter turns so that real characters are exactly real
        q = (4 * m) % self.exponent == 0
        exact = np.array([1, 1j, -1, -1j])[((4 * np.where(m >= 0, m, 0)) // self.exponent) % 4]
        v = np.where(q, exact, v)
        return np.where(m >= 0, v, 0)

    @cached_property
    def orders(self) -> tuple[int, ...]:
        out = []
        for row in self.angle_matrix:
            g = self.exponent
            for v in np.unique(row[row >= 0]):
                g = math.gcd(g, int(v))
            out.append(self.exponent // g)
        return tuple(out)

    @cached_property
    def is_real(self) -> tuple[bool, ...]:
        return tuple(o <= 2 for o in self.orders)

    @cached_property
    def conductors(self) -> tuple[int, ...]:
        k = self.modulus
        divisors = [d for d in range(1, k + 1) if k % d == 0]
        units = self.units
        out = []
        for row in self.angle_matrix:
            for d in divisors:
                sel = units[units % d == 1 % d]
                if np.all(row[sel] == 0):
                    out.append(d)
                    break
        return tuple(out)

    def conjugate_index(self, i: int) -> int:
        t = tuple((-x) % n for x, n in zip(self.exponent_tuples[i], self.component_orders))
        return self.exponent_tuples.index(t)

    @property
    def principal(self) -> Character:
        return self[0]

    def non_principal(self) -> list[Character]:
        return [self[i] for i in range(1, len(self))]

    def fingerprint(self, i: int) -> tuple[str, ...]:
        L = self.exponent
        toks = []
        for num in self.angle_matrix[i]:
            if num < 0:
                toks.append("0")
            else:
                f = Fraction(int(num), L)
                toks.append(f"{f.numerator}/{f.denominator}")
        return tuple(toks)

    def index_of_fingerprint(self, tokens) -> int:
        tokens = tuple(_normalize_token(t) for t in tokens)
        for i in range(len(self)):
            if self.fingerprint(i) == tokens:
                return i
        raise KeyError(f"no character mod {self.modulus} with fingerprint {tokens}")

    def index_of_values(self, values: dict[int, Fraction]) -> int:
        """Index of the character taking the given angles (turns) on given units."""
        for i in range(len(self)):
            row = self.angle_matrix[i]
            if all(Fraction(int(row[a % self.modulus]), self.exponent) == Fraction(v) % 1
                   for a, v in values.items()):
                return i
        raise KeyError(f"no character mod {self.modulus} matching {values}")


def _normalize_token(tok: str) -> str:
    tok = tok.strip()
    if tok == "0":
        return "0"
    f = Fraction(tok) % 1
    return f"{f.numerator}/{f.denominator}"


def build_character_table(k: int) -> CharacterTable:
    return CharacterTable(k)


# ---------------------------------------------------------------------------
# exact sums of roots of unity


def cyclotomic_poly(n: int) -> np.ndarray:
    """Integer coefficients (lowest degree first) of the n-th cyclotomic polynomial."""
    return np.array(_cyclotomic(n), dtype=object).astype(np.int64)


_CYC_CACHE: dict[int, list[int]] = {}


def _cyclotomic(n: int) -> list[int]:
    if n in _CYC_CACHE:
        return _CYC_CACHE[n]
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _polydiv_exact(num, _cyclotomic(d))
    _CYC_CACHE[n] = num
    return num


def _polydiv_exact(a: list[int], b: list[int]) -> list[int]:
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] // b[-1]
        q[i - db] = c
        for j in range(db + 1):
            a[i - db + j] -= c * b[j]
    assert not any(a[:db]), "inexact cyclotomic division"
    return q


def _power_remainders(n: int) -> np.ndarray:
    """Row j holds the coefficients of x^j mod Phi_n(x), j = 0..n-1."""
    phi = _cyclotomic(n)
    d = len(phi) - 1
    R = np.zeros((n, d), dtype=np.int64)
    cur = [0] * d
    if d:
        cur[0] = 1
    for j in range(n):
        R[j] = cur
        # multiply by x and reduce
        top = cur[-1] if d else 0
        cur = [0] + cur[:-1]
        for i in range(d):
            cur[i] -= top * phi[i]
    return R


def root_sums_vanish(nums: np.ndarray, order: int) -> np.ndarray:
    """Exactly decide whether ``sum_a exp(2 pi i nums[..., a] / order)`` is zero.

    ``nums`` is an integer array whose last axis is summed; negative entries
    are skipped.  The sum of roots of unity is zero iff its counting
    polynomial vanishes modulo the ``order``-th cyclotomic polynomial.
    """
    nums = np.asarray(nums, dtype=np.int64)
    flat = nums.reshape(-1, nums.shape[-1])
    counts = np.zeros((flat.shape[0], order), dtype=np.int64)
    rows = np.repeat(np.arange(flat.shape[0]), flat.shape[1])
    vals = flat.ravel()
    keep = vals >= 0
    np.add.at(counts, (rows[keep], vals[keep] % order), 1)
    rem = counts @ _power_remainders(order)
    return (~rem.any(axis=1)).reshape(nums.shape[:-1])
