"""Limiting bias densities of prime races from L-function zeros.

Under GRH and LI the vector of normalized discrepancies has an explicit
characteristic function built from Bessel J0 factors, one per zero.  The
density of the ordering a_1 > ... > a_r is recovered by a multivariate
Fourier inversion with principal-value kernels 1/eta_j.

Conventions used here (checked by the realness and normalization tests):

* ``rho_hat(eta) = exp(i sum_j (c(a_j) - c(a_{j+1})) eta_j)
  * prod_{chi != chi_0} F(|sum_j (chi(a_j) - chi(a_{j+1})) eta_j|, chi)``
* every principal-value integral over R^m is folded onto the positive
  orthant by summing the 2^m sign reflections; the folded integrand is real
  and regular at the coordinate hyperplanes.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BudgetExhaustedError, InvalidRaceError, MissingZeroDataError, PrimeRaceError
from .residues import CharacterTable, build_character_table, build_residue_system
from .zeros import ZeroArchive, ZeroSet, load_archive

# ---------------------------------------------------------------------------
# Bessel J0

_SERIES_MAX = 8.0
_MILLER_MAX = 25.0
_SERIES_COEF = np.array([(-1) ** m / math.factorial(m) ** 2 for m in range(32)])
# Hankel expansion coefficients a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k)
_HANKEL = [1.0]
for _k in range(1, 30):
    _HANKEL.append(_HANKEL[-1] * (2 * _k - 1) ** 2 / (_k * 8))
_HANKEL = np.array(_HANKEL)


def bessel_j0(z):
    """Bessel function of the first kind of order zero.

    Power series for |z| <= 8, Miller's backward recurrence up to 25 and the
    Hankel asymptotic expansion beyond.  Accepts scalars or arrays.
    """
    z = np.asarray(z, dtype=np.float64)
    scalar = z.ndim == 0
    x = np.abs(np.atleast_1d(z))
    out = np.empty_like(x)
    s = x <= _SERIES_MAX
    if s.any():
        out[s] = _j0_series(x[s])
    m = (x > _SERIES_MAX) & (x <= _MILLER_MAX)
    if m.any():
        out[m] = _j0_miller(x[m])
    h = x > _MILLER_MAX
    if h.any():
        out[h] = _j0_hankel(x[h])
    return float(out[0]) if scalar else out.reshape(z.shape)


def _j0_series(x):
    t = (x / 2) ** 2
    acc = np.full_like(x, _SERIES_COEF[-1])
    for c in _SERIES_COEF[-2::-1]:
        acc = acc * t + c
    return acc


def _j0_miller(x, start: int = 80):
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    j0 = None
    for n in range(start, 0, -1):
        jm1 = 2 * n / x * j - jp1
        jp1, j = j, jm1
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2 * j
        big = np.abs(j) > 1e250
        if big.any():
            j = np.where(big, j * 1e-250, j)
            jp1 = np.where(big, jp1 * 1e-250, jp1)
            norm = np.where(big, norm * 1e-250, norm)
    j0 = j
    norm += j0
    return j0 / norm


def _j0_hankel(x):
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    inv = 1.0 / x
    for k, a in enumerate(_HANKEL):
        term = a * inv**k
        if k % 2 == 0:
            p += (-1) ** (k // 2) * term
        else:
            q -= (-1) ** (k // 2) * term
    phase = x - math.pi / 4
    return np.sqrt(2 / (math.pi * x)) * (p * np.cos(phase) - q * np.sin(phase))


# ---------------------------------------------------------------------------
# Bessel-product factors


def zero_tail_sums(H: float, q: int) -> tuple[float, float]:
    """Estimates of sum_{gamma > H} 1/(1/4+gamma^2) and of its square analogue.

    Uses the zero density (1/2pi) log(q t / 2pi) of one half-line.
    """
    L = math.log(q * H / (2 * math.pi))
    s2 = (L + 1.0) / (2 * math.pi * H)
    s4 = (L + 1.0 / 3.0) / (6 * math.pi * H**3)
    return s2, s4


@dataclass
class BesselFactor:
    """F(z, chi) = prod_{gamma > 0} J0(2 z / sqrt(1/4 + gamma^2)) with a tail correction.

    Zeros above the loaded ones are accounted for by
    log J0(w) ~ -w^2/4 - w^4/64 applied to density-estimated zero sums.
    """

    zeros: ZeroSet
    conductor: int
    tail: bool = True
    tail_scale: float = 1.0  # multiplies the estimated tail sums (error probing)
    _scale: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.zeros.usable:
            raise PrimeRaceError(
                f"zero set for character {self.zeros.character} mod {self.zeros.modulus} is empty"
            )
        g = self.zeros.gammas
        self._scale = 2.0 / np.sqrt(0.25 + g * g)
        # cut between the last loaded zero and the next expected one
        last = float(g[-1])
        spacing = 2 * math.pi / max(math.log(self.conductor * last / (2 * math.pi)), 1.0)
        self.height = last + spacing / 2
        self.s2, self.s4 = zero_tail_sums(self.height, self.conductor)
        # one unit of |S(t)| in the zero count, integrated against 1/t^2
        self.s2_uncertainty = 2.0 / self.height**2

    def tabulate(self, zmax: float, step: float = 2e-3) -> None:
        """Precompute F on [0, zmax] for fast cubic-spline evaluation.

        The clamped spline (F'(0) = 0) has error of order step^4 max|F''''|,
        far below the quadrature tolerance.
        """
        n = max(16, math.ceil(zmax / step)) + 1
        z = np.linspace(0.0, zmax, n)
        self._spline = CubicSpline(z, self.exact(z), bc_type=((1, 0.0), "not-a-knot"))
        self._zmax = zmax

    def fast(self, z) -> np.ndarray:
        """F(z) from the spline when tabulated and in range, exact otherwise."""
        z = np.abs(np.asarray(z, dtype=np.float64))
        sp = getattr(self, "_spline", None)
        if sp is None:
            return self.exact(z)
        out = sp(np.minimum(z, self._zmax))
        far = z > self._zmax
        if far.any():
            out[far] = self.exact(z[far])
        return out

    def log_tail(self, z: np.ndarray) -> np.ndarray:
        if not self.tail:
            return np.zeros_like(z)
        z2 = z * z
        return -self.tail_scale * (z2 * self.s2 + z2 * z2 * self.s4 / 4.0)

    def __call__(self, z, chunk: int = 8192) -> np.ndarray:
        return self.exact(z, chunk)

    def exact(self, z, chunk: int = 8192) -> np.ndarray:
        """Direct product over the loaded zeros times the tail factor."""
        z = np.abs(np.asarray(z, dtype=np.float64))
        flat = z.ravel()
        out = np.empty_like(flat)
        for i in range(0, len(flat), chunk):
            zz = flat[i : i + chunk]
            prod = np.prod(bessel_j0(zz[:, None] * self._scale[None, :]), axis=1)
            out[i : i + chunk] = prod * np.exp(self.log_tail(zz))
        return out.reshape(z.shape)

    def tail_bound(self, z) -> np.ndarray:
        """Uncertainty of F(z) caused by the estimated tail."""
        z = np.asarray(z, dtype=np.float64)
        return np.abs(self(z)) * np.expm1(z * z * self.s2_uncertainty)


def bessel_factor(zeros: ZeroSet, z, *, conductor: int | None = None, tail: bool = True):
    """F(z, chi) and its tail-uncertainty bound."""
    if conductor is None:
        conductor = zeros.table[zeros.character].conductor
    bf = BesselFactor(zeros, conductor, tail)
    return bf(z), bf.tail_bound(z)


# ---------------------------------------------------------------------------
# transform


@dataclass
class TransformSpec:
    modulus: int
    classes: tuple[int, ...]
    offsets: np.ndarray  # c(a_j) - c(a_{j+1}), j = 1..r-1
    factors: list[tuple[np.ndarray, BesselFactor]]  # (chi(a_j) - chi(a_{j+1}))_j, F
    fast: bool = False  # use tabulated factors

    @property
    def dim(self) -> int:
        return len(self.classes) - 1

    def tabulate(self, radius: float) -> None:
        """Tabulate every factor for eta in the cube [-radius, radius]^(r-1)."""
        for d, bf in self.factors:
            bf.tabulate(radius * float(np.abs(d).sum()) * 1.001 + 1e-3)
        self.fast = True


def _check_tuple(k: int, classes: Sequence[int]) -> tuple[int, ...]:
    sys = build_residue_system(k)
    cl = tuple(int(a) % k for a in classes)
    if len(cl) < 2:
        raise InvalidRaceError("a race needs at least two classes")
    if len(set(cl)) != len(cl):
        raise InvalidRaceError(f"duplicate classes in {tuple(classes)}")
    for a in cl:
        if not sys.is_unit(a):
            raise InvalidRaceError(f"{a} is not a unit modulo {k}")
    return cl


def transform_spec(
    k: int,
    classes: Sequence[int],
    archive: ZeroArchive,
    *,
    tail: bool = True,
    tail_scale: float = 1.0,
) -> TransformSpec:
    cl = _check_tuple(k, classes)
    sys = build_residue_system(k)
    table = build_character_table(k)
    c = np.array([sys.N(a) - 1 for a in cl], dtype=np.int64)
    sets = archive.require(k)
    factors = []
    for i, zs in sets.items():
        vals = table.values(i)[list(cl)]
        d = vals[:-1] - vals[1:]
        bf = BesselFactor(zs, table[i].conductor, tail, tail_scale)
        factors.append((d, bf))
    return TransformSpec(k, cl, c[:-1] - c[1:], factors)


def rho_hat(spec: TransformSpec, eta) -> np.ndarray:
    """Characteristic function of the successive differences, at ``eta``.

    ``eta`` has shape (..., r-1).
    """
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape[-1] != spec.dim:
        raise InvalidRaceError(f"eta must have {spec.dim} components, got {eta.shape[-1]}")
    out = np.exp(1j * (eta @ spec.offsets.astype(np.float64)))
    for d, bf in spec.factors:
        z = np.abs(eta @ d)
        out = out * (bf.fast(z) if spec.fast else bf(z))
    return out


# ---------------------------------------------------------------------------
# density


@dataclass
class QuadratureOptions:
    nodes: int = 16  # Gauss-Legendre nodes per panel
    panel: float = 0.5  # initial panel width
    excision: float = 1e-4
    cutoff_tol: float = 1e-16
    rtol: float = 1e-6  # stop refining once delta moves less than this
    max_refinements: int = 3
    max_points: int = 2_000_000  # budget per integral dimension product
    tail: bool = True
    error_probe: bool = True


@dataclass
class DensityResult:
    modulus: int
    classes: tuple[int, ...]
    delta: float
    error_estimate: float
    zeros_height: dict[int, float]
    quadrature: dict
    imag_residue: float = 0.0
    terms: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "k": self.modulus,
            "tuple": list(self.classes),
            "delta": self.delta,
            "error_estimate": self.error_estimate,
            "zeros_height": {str(i): h for i, h in self.zeros_height.items()},
            "quadrature": self.quadrature,
        }


def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_nodes(a: float, b: float, width: float, n: int):
    m = max(1, math.ceil((b - a) / width - 1e-12))
    edges = np.linspace(a, b, m + 1)
    x, w = _gl(n)
    h = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def _cutoff(spec: TransformSpec, tol: float) -> float:
    """Radius beyond which |rho_hat| stays below ``tol`` along the box boundary."""
    m = spec.dim
    L = 1.0
    while L < 200:
        # sample the boundary of [-L, L]^m on a coarse lattice
        t = np.linspace(-L, L, 33)
        pts = []
        for j in range(m):
            for sgn in (-L, L):
                grids = np.meshgrid(*[t if i != j else np.array([sgn]) for i in range(m)], indexing="ij")
                pts.append(np.stack([g.ravel() for g in grids], axis=-1))
        pts = np.concatenate(pts)
        if np.max(np.abs(rho_hat(spec, pts))) < tol:
            # confirm decay persists just outside
            if np.max(np.abs(rho_hat(spec, pts * 1.25))) < tol:
                return L
        L *= 1.25
    raise BudgetExhaustedError("transform does not decay below the cutoff tolerance")


def _folded_term(spec: TransformSpec, B: tuple[int, ...], grid: np.ndarray) -> tuple[np.ndarray, float]:
    """Folded integrand over the positive orthant for the subset ``B``.

    Returns (real integrand values, max imaginary residue).
    """
    m = len(B)
    acc = np.zeros(len(grid), dtype=complex)
    for signs in product((1.0, -1.0), repeat=m):
        eta = np.zeros((len(grid), spec.dim))
        eta[:, list(B)] = grid * np.array(signs)
        acc += np.prod(signs) * rho_hat(spec, eta)
    vals = (1j / math.pi) ** m * acc / np.prod(grid, axis=1)
    resid = float(np.max(np.abs(vals.imag))) if len(vals) else 0.0
    return vals.real, resid


def _subset_integral(spec: TransformSpec, B, L: float, width: float, opts: QuadratureOptions):
    m = len(B)
    eps = opts.excision if m == 1 else 0.0
    nodes, weights = _panel_nodes(eps, L, width, opts.nodes)
    if len(nodes) ** m > opts.max_points:
        raise BudgetExhaustedError(f"quadrature grid of {len(nodes) ** m} points exceeds budget")
    mesh = np.meshgrid(*([nodes] * m), indexing="ij")
    wmesh = np.meshgrid(*([weights] * m), indexing="ij")
    grid = np.stack([g.ravel() for g in mesh], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wmesh], axis=-1), axis=1)
    vals, resid = _folded_term(spec, tuple(B), grid)
    total = float(np.dot(w, vals))
    if m == 1:
        # excised band [0, eps]: rho_hat(eta e_j) = 1 + i offset_j eta + O(eta^2),
        # so the folded integrand tends to -2 offset_j / pi
        total += eps * (-2.0 * spec.offsets[B[0]] / math.pi)
    return total, resid


def _assemble(spec: TransformSpec, L: float, width: float, opts: QuadratureOptions):
    r1 = spec.dim
    total = 1.0
    resid = 0.0
    terms = {}
    for m in range(1, r1 + 1):
        for B in combinations(range(r1), m):
            v, res = _subset_integral(spec, B, L, width, opts)
            terms[B] = v
            total += v
            resid = max(resid, res)
    return total / 2**r1, resid, terms


def density(
    k: int,
    classes: Sequence[int],
    archive: ZeroArchive | None = None,
    options: QuadratureOptions | None = None,
) -> DensityResult:
    """delta_{k; a_1, ..., a_r}: limiting logarithmic density of a_1 > ... > a_r."""
    opts = options or QuadratureOptions()
    cl = _check_tuple(k, classes)
    if len(cl) > 3:
        warnings.warn(f"r = {len(cl)} needs {len(cl) - 1}-dimensional quadrature; expect long run times",
                      RuntimeWarning, stacklevel=2)
    archive = archive if archive is not None else default_archive()
    spec = transform_spec(k, cl, archive, tail=opts.tail)
    L = _cutoff(spec, opts.cutoff_tol)
    spec.tabulate(L)
    width = opts.panel
    prev = None
    history = []
    for level in range(opts.max_refinements + 1):
        delta, resid, terms = _assemble(spec, L, width, opts)
        history.append(float(delta))
        if prev is not None and abs(delta - prev) < opts.rtol:
            break
        prev = delta
        width /= 2
    else:
        raise BudgetExhaustedError(
            f"density did not settle to {opts.rtol} after {opts.max_refinements} refinements: {history}"
        )
    quad_err = abs(history[-1] - history[-2]) if len(history) > 1 else float("nan")
    tail_err = 0.0
    if opts.tail and opts.error_probe:
        # shift each tail sum by its uncertainty and re-evaluate on the final grid
        probe = transform_spec(k, cl, archive, tail=True)
        for _, bf in probe.factors:
            bf.tail_scale = 1.0 + bf.s2_uncertainty / bf.s2
        probe.tabulate(L)
        d2, _, _ = _assemble(probe, L, width, opts)
        tail_err = abs(d2 - delta)
    heights = {bf.zeros.character: bf.zeros.max_height for _, bf in spec.factors}
    return DensityResult(
        modulus=k,
        classes=cl,
        delta=delta,
        error_estimate=quad_err + tail_err,
        zeros_height=heights,
        quadrature={
            "cutoff": L,
            "panel_width": width,
            "nodes_per_panel": opts.nodes,
            "excision": opts.excision,
            "refinements": len(history) - 1,
            "history": history,
            "tail_correction": opts.tail,
            "quadrature_error": quad_err,
            "tail_error": tail_err,
        },
        imag_residue=resid,
        terms={"+".join(map(str, B)): v for B, v in terms.items()},
    )


@lru_cache(maxsize=4)
def _cached_archive(path: str | None) -> ZeroArchive:
    return load_archive(path)


def default_archive() -> ZeroArchive:
    return _cached_archive(None)


# ---------------------------------------------------------------------------
# structural checks


def unbiased_check(k: int, classes: Sequence[int]) -> tuple[bool, str]:
    """Whether the race is unbiased in the limit, with the reason.

    Two classes are unbiased exactly when their square counts agree; three
    are unbiased exactly when they form an orbit a, a rho, a rho^2 of a
    nontrivial cube root of unity rho.
    """
    cl = _check_tuple(k, classes)
    sys = build_residue_system(k)
    c = [sys.N(a) - 1 for a in cl]
    if len(cl) == 2:
        if c[0] == c[1]:
            return True, f"r=2 with c({k},{cl[0]}) = c({k},{cl[1]}) = {c[0]}"
        return False, f"r=2 with c({k},{cl[0]}) = {c[0]} != c({k},{cl[1]}) = {c[1]}"
    if len(cl) == 3:
        a1, a2, a3 = cl
        for rho in sys.reduced:
            if rho != 1 and pow(rho, 3, k) == 1 and a2 == a1 * rho % k and a3 == a1 * rho * rho % k:
                return True, f"r=3 orbit of cube root of unity {rho}: a2 = a1*{rho}, a3 = a1*{rho}^2"
        return False, "r=3 and no cube root of unity rho with a2 = a1 rho, a3 = a1 rho^2"
    return False, f"r={len(cl)}: only r in (2, 3) can be unbiased"


@dataclass
class SymmetryEntry:
    item: str
    transform: str
    classes: tuple[int, ...]
    delta: float | None = None
    deviation: float | None = None
    skipped: str | None = None


@dataclass
class SymmetryReport:
    modulus: int
    classes: tuple[int, ...]
    delta: float
    entries: list[SymmetryEntry]

    @property
    def max_deviation(self) -> float:
        devs = [e.deviation for e in self.entries if e.deviation is not None]
        return max(devs, default=0.0)


def fm_symmetry_suite(
    k: int,
    classes: Sequence[int],
    archive: ZeroArchive | None = None,
    options: QuadratureOptions | None = None,
    *,
    max_multipliers: int | None = None,
) -> SymmetryReport:
    """Evaluate the density at every tuple the symmetry rules relate to ``classes``."""
    cl = _check_tuple(k, classes)
    sys = build_residue_system(k)
    c = lambda a: sys.N(a) - 1  # noqa: E731
    squares = set(sys.quadratic_residues())
    cache: dict[tuple[int, ...], float] = {}

    def dens(t):
        if t not in cache:
            cache[t] = density(k, t, archive, options).delta
        return cache[t]

    base = dens(cl)
    entries: list[SymmetryEntry] = []

    def add(item, name, t, complement=False):
        d = dens(t)
        dev = abs((1 - d) - base) if complement else abs(d - base)
        entries.append(SymmetryEntry(item, name, t, d, dev))

    add("inverse", "a -> a^-1", tuple(pow(a, -1, k) for a in cl))

    mults = [b for b in sys.reduced if b != 1]
    if max_multipliers is not None:
        mults = mults[:max_multipliers]
    any2 = False
    for b in mults:
        if all(c(a) == c(b * a % k) for a in cl):
            any2 = True
            add("translate", f"a -> {b}a", tuple(b * a % k for a in cl))
    if not any2:
        entries.append(SymmetryEntry("translate", "a -> ba", cl, skipped="no b with c(a_j) = c(b a_j) for all j"))

    if all(a in squares for a in cl):
        for b in mults:
            add("translate-squares", f"a -> {b}a", tuple(b * a % k for a in cl))
    else:
        entries.append(SymmetryEntry("translate-squares", "a -> ba", cl, skipped="classes are not all squares"))

    if all(a in squares for a in cl) or not any(a in squares for a in cl):
        add("reverse", "reverse order", cl[::-1])
    else:
        entries.append(SymmetryEntry("reverse", "reverse order", cl, skipped="classes mix squares and non-squares"))

    any5 = False
    for b in mults:
        if all(c(a) != c(b * a % k) for a in cl):
            any5 = True
            add("translate-reverse", f"a -> {b}a reversed", tuple(b * a % k for a in cl[::-1]))
    if not any5:
        entries.append(SymmetryEntry("translate-reverse", "a -> ba reversed", cl, skipped="no b with c(a_j) != c(b a_j) for all j"))

    if len(cl) == 2:
        add("complement", "swap (sums to 1)", cl[::-1], complement=True)
    return SymmetryReport(k, cl, base, entries)


def gaussian_fit_quality(k: int, a: int, archive: ZeroArchive | None = None, n: int = 61) -> float:
    """Max gap between the one-class transform and its matching Gaussian.

    The one-class transform is prod_chi F(eta, chi) (|chi(a)| = 1); the
    Gaussian exp(-sigma^2 eta^2 / 2) uses the variance implied by the zeros.
    Compared on eta in [0, 3/sigma].
    """
    archive = archive if archive is not None else default_archive()
    sys = build_residue_system(k)
    sys.require_unit(a)
    table = build_character_table(k)
    sets = archive.require(k)
    var = 0.0
    factors = []
    for i, zs in sets.items():
        bf = BesselFactor(zs, table[i].conductor)
        var += 2 * (np.sum(1.0 / (0.25 + zs.gammas**2)) + bf.s2)
        factors.append(bf)
    sigma = math.sqrt(var)
    eta = np.linspace(0, 3 / sigma, n)
    phi = np.ones_like(eta)
    for bf in factors:
        phi = phi * bf(eta)
    return float(np.max(np.abs(phi - np.exp(-var * eta**2 / 2))))
