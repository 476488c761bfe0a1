"""Critical-line zeros of Dirichlet L-functions: file format, archive, checks.

File format (text)::

    # modulus: 8
    # character: 0,0/1,0,1/2,0,1/2,0,0/1
    # source: <free text>
    6.0209489046975967
    10.243770304166555
    ...

The character line lists chi(a) for a = 0..k-1 as fractions of a full turn,
``0`` marking non-units.  Files are matched to the canonical character table
by this fingerprint, never by external labels.  Extra ``# key: value``
header lines are kept as metadata.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import loggamma

from .errors import MissingZeroDataError, UnsupportedCharacterError, ZeroDataError
from .residues import CharacterTable, build_character_table

ENV_ZERO_DIR = "PRLB_ZERO_DIR"
PACKAGED_ZERO_DIR = Path(__file__).parent / "data" / "zeros"


@lru_cache(maxsize=None)
def _table(k: int) -> CharacterTable:
    return build_character_table(k)


@dataclass
class ZeroSet:
    modulus: int
    character: int
    gammas: np.ndarray
    source: str = ""
    decimals: tuple[str, ...] = field(default=(), repr=False)
    headers: dict[str, str] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=np.float64)
        if g.ndim != 1:
            raise ZeroDataError("zero ordinates must form a flat list")
        if len(g) and not np.all(g > 0):
            raise ZeroDataError("zero ordinates must be positive")
        if len(g) > 1 and not np.all(np.diff(g) > 0):
            bad = int(np.flatnonzero(np.diff(g) <= 0)[0])
            kind = "duplicate" if g[bad + 1] == g[bad] else "non-ascending"
            raise ZeroDataError(f"{kind} entries at position {bad + 1}: {g[bad]} then {g[bad + 1]}")
        self.gammas = g
        if not self.decimals:
            self.decimals = tuple(repr(float(x)) for x in g)

    @property
    def max_height(self) -> float:
        return float(self.gammas[-1]) if len(self.gammas) else 0.0

    @property
    def usable(self) -> bool:
        """At least one zero, the minimum needed by the density code."""
        return len(self.gammas) > 0

    @property
    def table(self) -> CharacterTable:
        return _table(self.modulus)

    def count_below(self, H: float) -> int:
        return int(np.searchsorted(self.gammas, H, side="right"))

    def digest(self) -> str:
        body = "".join(d + "\n" for d in self.decimals)
        return hashlib.sha256(body.encode()).hexdigest()


def parse_zero_text(text: str, *, name: str = "<string>") -> ZeroSet:
    headers: dict[str, str] = {}
    decimals: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                headers[key.strip().lower()] = value.strip()
            continue
        try:
            float(line)
        except ValueError:
            raise ZeroDataError(f"{name}:{lineno}: not a number: {line!r}") from None
        decimals.append(line)
    for key in ("modulus", "character"):
        if key not in headers:
            raise ZeroDataError(f"{name}: missing '# {key}:' header")
    try:
        k = int(headers["modulus"])
        table = _table(k)
    except ValueError as exc:
        raise ZeroDataError(f"{name}: bad modulus header: {exc}") from None
    tokens = [t for t in headers["character"].split(",")]
    if len(tokens) != k:
        raise ZeroDataError(f"{name}: character fingerprint has {len(tokens)} values, modulus is {k}")
    try:
        index = table.index_of_fingerprint(tokens)
    except (KeyError, ValueError, ZeroDivisionError):
        raise ZeroDataError(f"{name}: fingerprint matches no character mod {k}") from None
    gammas = np.array([float(d) for d in decimals], dtype=np.float64)
    return ZeroSet(k, index, gammas, headers.get("source", ""), tuple(decimals), headers)


def load_zero_file(path) -> ZeroSet:
    path = Path(path)
    return parse_zero_text(path.read_text(), name=str(path))


def format_zero_file(zs: ZeroSet) -> str:
    lines = [f"# modulus: {zs.modulus}", f"# character: {','.join(zs.table.fingerprint(zs.character))}"]
    lines.append(f"# source: {zs.source}")
    for key, value in zs.headers.items():
        if key not in ("modulus", "character", "source"):
            lines.append(f"# {key}: {value}")
    return "\n".join(lines + list(zs.decimals)) + "\n"


def write_zero_file(zs: ZeroSet, path) -> Path:
    path = Path(path)
    path.write_text(format_zero_file(zs))
    return path


class ZeroArchive:
    """Zero sets keyed by (modulus, canonical character index)."""

    def __init__(self, sets=(), manifest: dict | None = None):
        self.sets: dict[tuple[int, int], ZeroSet] = {}
        self.manifest = manifest or {}
        for zs in sets:
            self.add(zs)

    def add(self, zs: ZeroSet) -> None:
        self.sets[(zs.modulus, zs.character)] = zs

    def get(self, k: int, index: int) -> ZeroSet:
        try:
            return self.sets[(k, index)]
        except KeyError:
            raise MissingZeroDataError(k, [index]) from None

    def moduli(self) -> list[int]:
        return sorted({k for k, _ in self.sets})

    def missing(self, k: int) -> list[int]:
        return [i for i in range(1, len(_table(k))) if (k, i) not in self.sets]

    def is_partial(self, k: int) -> bool:
        return bool(self.missing(k))

    def require(self, k: int) -> dict[int, ZeroSet]:
        """Zero sets of every non-principal character mod k, or raise."""
        absent = self.missing(k)
        if absent:
            raise MissingZeroDataError(k, absent)
        return {i: self.sets[(k, i)] for i in range(1, len(_table(k)))}

    def __len__(self) -> int:
        return len(self.sets)


def load_archive(directory=None) -> ZeroArchive:
    directory = Path(directory) if directory else default_zero_dir()
    if not directory.is_dir():
        raise ZeroDataError(f"zero archive {directory} is not a directory")
    manifest = {}
    mpath = directory / "manifest.json"
    if mpath.exists():
        manifest = json.loads(mpath.read_text())
    arch = ZeroArchive(manifest=manifest)
    for path in sorted(directory.glob("*.txt")):
        zs = load_zero_file(path)
        entry = manifest.get("files", {}).get(path.name)
        if entry and entry.get("sha256") and entry["sha256"] != zs.digest():
            raise ZeroDataError(f"{path.name}: content does not match manifest hash")
        arch.add(zs)
    return arch


def default_zero_dir() -> Path:
    env = os.environ.get(ENV_ZERO_DIR)
    return Path(env) if env else PACKAGED_ZERO_DIR


# ---------------------------------------------------------------------------
# L-function evaluation (Hurwitz decomposition + Euler-Maclaurin)

# B_{2j} / (2j)!
_BERN = np.array([
    1 / 12, -1 / 720, 1 / 30240, -1 / 1209600, 1 / 47900160,
    -691 / 1307674368000, 1 / 74724249600, -3617 / 10670622842880000,
])


def _hurwitz_tail(s: complex, a: np.ndarray, N: int) -> np.ndarray:
    """sum_{n >= N} (n + a)^{-s} by Euler-Maclaurin, vectorized over a."""
    x = N + a
    out = x ** (1 - s) / (s - 1) + 0.5 * x ** (-s)
    fac = s  # rising factorial s (s+1) ... (s+2j-2)
    xp = x ** (-s - 1)
    for j, b in enumerate(_BERN, 1):
        out = out + b * fac * xp
        fac = fac * (s + 2 * j - 1) * (s + 2 * j)
        xp = xp / (x * x)
    return out


def dirichlet_L(s: complex, values: np.ndarray, terms: int = 10_000) -> complex:
    """L(s, chi) for a character given by its values on 0..k-1.

    Uses L = k^{-s} sum_a chi(a) zeta(s, a/k) with ``terms`` explicit terms in
    total, split over the k residue classes, and an Euler-Maclaurin tail.
    """
    values = np.asarray(values, dtype=complex)
    k = len(values)
    units = np.flatnonzero(values != 0)
    a = units / k
    N = max(1, terms // k, int(abs(s.imag) / (2 * math.pi * k)) + 10)
    n = np.arange(N)[:, None]
    head = ((n + a[None, :]) ** (-s)).sum(axis=0)
    hz = head + _hurwitz_tail(s, a, N)
    return complex(k ** (-s) * (values[units] * hz).sum())


def validate_zeros(zs: ZeroSet, terms: int = 10_000, tol: float = 1e-6) -> "ValidationReport":
    """|L(1/2 + i gamma, chi)| for every loaded ordinate."""
    table = zs.table
    if zs.character == 0 or table[zs.character].is_principal:
        raise UnsupportedCharacterError("validation needs a non-principal character")
    if len(zs.gammas) and zs.gammas[0] <= 0:
        raise ZeroDataError("zero ordinates must be positive")
    vals = table.values(zs.character)
    res = np.array([abs(dirichlet_L(complex(0.5, g), vals, terms)) for g in zs.gammas])
    return ValidationReport(zs.modulus, zs.character, zs.gammas.copy(), res, tol)


@dataclass
class ValidationReport:
    modulus: int
    character: int
    gammas: np.ndarray
    residuals: np.ndarray
    tolerance: float

    @property
    def flagged(self) -> np.ndarray:
        return self.gammas[self.residuals > self.tolerance]

    @property
    def ok(self) -> bool:
        return not len(self.flagged)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0


def primitive_values(table: CharacterTable, index: int) -> np.ndarray:
    """Values of the primitive character inducing ``table[index]``, on 0..q-1."""
    chi = table[index]
    q, k = chi.conductor, table.modulus
    full = table.values(index)
    out = np.zeros(q, dtype=complex)
    for n in range(q):
        if math.gcd(n, q) != 1:
            continue
        a = n
        while math.gcd(a, k) != 1:
            a += q
        out[n] = full[a % k]
    return out


def hardy_rotation(values: np.ndarray):
    """Return t -> Z(t), the real rotation of L(1/2 + it, chi) for primitive chi."""
    q = len(values)
    a = 0 if abs(values[q - 1] - 1) < 1e-12 else 1
    tau = (values * np.exp(2j * np.pi * np.arange(q) / q)).sum()
    root = np.sqrt(tau / (1j**a * math.sqrt(q)))

    def Z(t: float, terms: int = 2_000) -> complex:
        s = complex(0.5, t)
        theta = t / 2 * math.log(q / math.pi) + loggamma((s + a) / 2).imag
        return np.exp(1j * theta) * dirichlet_L(s, values, terms) / root

    return Z


def scan_zero_count(k: int, index: int, H: float, step: float = 1e-2, t0: float = 0.05) -> int:
    """Count sign changes of the rotated L-function on [t0, H] with a fixed grid."""
    table = _table(k)
    if table[index].is_principal:
        raise UnsupportedCharacterError("zero scan needs a non-principal character")
    Z = hardy_rotation(primitive_values(table, index))
    ts = np.arange(t0, H + step / 2, step)
    zs = np.array([Z(t).real for t in ts])
    return int(np.count_nonzero(np.signbit(zs[1:]) != np.signbit(zs[:-1])))
