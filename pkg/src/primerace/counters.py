"""Per-class prime counting functions and empirical race statistics.

A single :class:`Sweep` walks the prime (and prime-power, semiprime) stream
once and updates every requested counter and race.  Discrepancies are step
functions of x, so everything is evaluated exactly at the event points where
some counter changes.

Sign changes are counted between consecutive *non-zero* values of the
discrepancy: a run ``+ 0 0 -`` is one change, ``+ 0 +`` is none.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import InvalidRaceError, InvalidResidueError, PrimeRaceError
from .residues import ResidueSystem, build_residue_system
from .sieve import (
    DEFAULT_SEGMENT_BYTES,
    CheckpointState,
    PrimePowerBatch,
    higher_powers,
    iter_segments,
    merge_prime_powers,
    primes_between,
    restore,
)
from .sieve import checkpoint as write_checkpoint

FUNCTIONS = ("pi", "theta", "psi", "Pi", "pi2")
MAX_POWER = 64


@dataclass(frozen=True)
class Race:
    """Race between two sets of classes: sum over ``lead`` minus sum over ``trail``.

    An ordinary two-class race has singleton sets.
    """

    modulus: int
    f: str
    lead: tuple[int, ...]
    trail: tuple[int, ...]

    @classmethod
    def pair(cls, k: int, f: str, l1: int, l2: int) -> "Race":
        return cls(k, f, (l1 % k,), (l2 % k,))

    def validate(self, sys: ResidueSystem) -> None:
        if self.f not in FUNCTIONS:
            raise InvalidRaceError(f"unknown counting function {self.f!r}")
        if not self.lead or not self.trail:
            raise InvalidRaceError("both sides of a race need at least one class")
        for a in self.lead + self.trail:
            if not sys.is_unit(a):
                raise InvalidRaceError(f"{a} is not a unit modulo {sys.modulus}")
        if len(set(self.lead + self.trail)) != len(self.lead) + len(self.trail):
            raise InvalidRaceError("race classes must be distinct")

    @property
    def name(self) -> str:
        side = lambda s: "+".join(map(str, s))  # noqa: E731
        return f"{self.f}({self.modulus};{side(self.lead)},{side(self.trail)})"

    def weights(self) -> np.ndarray:
        w = np.zeros(self.modulus, dtype=np.int64)
        w[list(self.lead)] = 1
        w[list(self.trail)] = -1
        return w

    def to_json(self) -> dict:
        return {"k": self.modulus, "f": self.f, "lead": list(self.lead), "trail": list(self.trail)}


@dataclass
class RaceSeries:
    race: Race
    T: int = 1
    delta: float = 0
    checkpoints: list[tuple[int, float]] = field(default_factory=list)
    sign_changes: int = 0
    first_negative: int | None = None
    first_positive: int | None = None
    crossings: list[int] = field(default_factory=list)
    # measures of {delta > 0} on [1, T], set by close()
    positive_count: int = 0
    log_positive: float = 0.0
    # running state, up to the last event
    last_sign: int = 0
    last_x: int = 1
    run_count: int = 0
    run_log: float = 0.0

    @property
    def is_integral(self) -> bool:
        return self.race.f in ("pi", "pi2")

    # -- accumulation -----------------------------------------------------
    def feed(self, xs: np.ndarray, incs: np.ndarray, grid: np.ndarray) -> None:
        """Consume ascending events ``xs`` with discrepancy increments ``incs``.

        ``grid`` holds the storage checkpoints falling in the current batch.
        """
        keep = incs != 0
        xs, incs = xs[keep], incs[keep]
        if len(xs):
            dt = np.int64 if self.is_integral else np.float64
            vals = np.cumsum(np.concatenate(([self.delta], incs)).astype(dt))
            before = vals[:-1]
            after = vals[1:]
            self._grid_samples(grid, xs, vals)
            # integer and logarithmic measure of {delta > 0}
            starts = np.concatenate(([self.last_x], xs[:-1]))
            pos = before > 0
            self.run_count += int((xs[pos] - starts[pos]).sum())
            lo = np.maximum(starts, 2).astype(np.float64)
            hi = xs.astype(np.float64)
            seg = np.where(pos & (hi > lo), np.log(hi / np.where(lo > 0, lo, 1)), 0.0)
            self.run_log = float(np.cumsum(np.concatenate(([self.run_log], seg)))[-1])
            # signs
            s = np.sign(after).astype(np.int8)
            nz = s[s != 0]
            xnz = xs[s != 0]
            if len(nz):
                prev = np.concatenate(([self.last_sign], nz[:-1]))
                flips = (prev != 0) & (prev != nz)
                self.sign_changes += int(flips.sum())
                self.crossings.extend(int(x) for x in xnz[flips])
                self.last_sign = int(nz[-1])
            if self.first_negative is None:
                neg = np.flatnonzero(after < 0)
                if len(neg):
                    self.first_negative = int(xs[neg[0]])
            if self.first_positive is None:
                p = np.flatnonzero(after > 0)
                if len(p):
                    self.first_positive = int(xs[p[0]])
            self.delta = after[-1].item()
            self.last_x = int(xs[-1])
        else:
            self._grid_samples(grid, xs, np.array([self.delta]))

    def _grid_samples(self, grid, xs, vals) -> None:
        if not len(grid):
            return
        idx = np.searchsorted(xs, grid, side="right")
        self.checkpoints.extend(zip(grid.tolist(), vals[idx].tolist()))

    def close(self, T: int) -> None:
        """Totals up to T, adding the constant stretch after the last event.

        The running state is left untouched so the series can be fed further.
        """
        self.positive_count, self.log_positive = self.run_count, self.run_log
        if self.delta > 0:
            self.positive_count += T + 1 - self.last_x
            lo = max(self.last_x, 2)
            if T > lo:
                self.log_positive += math.log(T / lo)
        self.T = T

    # -- serialization ----------------------------------------------------
    def to_state(self) -> dict:
        d = {
            "race": self.race.to_json(),
            "T": self.T,
            "delta": self.delta,
            "checkpoints": self.checkpoints,
            "sign_changes": self.sign_changes,
            "first_negative": self.first_negative,
            "first_positive": self.first_positive,
            "crossings": self.crossings,
            "last_sign": self.last_sign,
            "last_x": self.last_x,
            "positive_count": self.positive_count,
            "log_positive": self.log_positive,
            "run_count": self.run_count,
            "run_log": self.run_log,
        }
        return d

    @classmethod
    def from_state(cls, d: dict) -> "RaceSeries":
        r = d["race"]
        race = Race(r["k"], r["f"], tuple(r["lead"]), tuple(r["trail"]))
        s = cls(race)
        for key in ("T", "delta", "sign_changes", "first_negative", "first_positive",
                    "last_sign", "last_x", "positive_count", "log_positive", "run_count", "run_log"):
            setattr(s, key, d[key])
        s.checkpoints = [tuple(c) for c in d["checkpoints"]]
        s.crossings = list(d["crossings"])
        return s

    def report(self) -> dict:
        return {
            "race": self.race.name,
            "first_negative": self.first_negative,
            "first_positive": self.first_positive,
            "w": self.sign_changes,
            "T": self.T,
        }


@dataclass
class CountVector:
    modulus: int
    x: int
    pi: dict[int, int]
    theta: dict[int, float]
    psi: dict[int, float]
    Pi: dict[int, float]
    pi2: dict[int, int]
    pi_total: int
    pi_dividing: int
    pi2_total: int


def geometric_grid(T: int, rho: float = 1e-3, start: int = 2, *, include_end: bool = True) -> np.ndarray:
    """Storage points start, ceil(start (1+rho)), ... up to T.

    With ``include_end`` T itself is appended when it is not a grid point.
    Sweeps leave it out so a run to T1 and then T2 stores the same points
    as a single run to T2.
    """
    xs = [start]
    x = start
    while True:
        nxt = max(x + 1, math.ceil(x * (1 + rho)))
        if nxt > T:
            break
        xs.append(nxt)
        x = nxt
    if include_end and xs[-1] != T and T >= start:
        xs.append(T)
    return np.array(xs, dtype=np.int64)


def semiprimes_between(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    """Products p*q (p <= q primes) in [lo, hi), ascending.

    ``primes`` must contain every prime up to (hi - 1) // 2.
    """
    out = []
    root = math.isqrt(hi - 1)
    for p in primes[: np.searchsorted(primes, root, side="right")].tolist():
        qlo = max(p, -(-lo // p))
        qhi = (hi - 1) // p
        a, b = np.searchsorted(primes, [qlo, qhi], side="left")[0], np.searchsorted(primes, qhi, side="right")
        if b > a:
            out.append(p * primes[a:b])
    if not out:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(out), kind="stable")


class Sweep:
    """One pass over [2, T] maintaining per-class counters and races.

    Parameters
    ----------
    k : modulus
    races : races to track (each a :class:`Race`)
    functions : which per-class counters to maintain (subset of FUNCTIONS)
    rho : ratio of the geometric storage grid
    e_classes, e_points : classes and sample points for the normalized
        discrepancy vector ``(log x / sqrt x) (phi(k) pi(x;k,a) - pi(x))``
    """

    def __init__(
        self,
        k: int,
        races: Sequence[Race] = (),
        *,
        functions: Iterable[str] = ("pi",),
        rho: float = 1e-3,
        e_classes: Sequence[int] = (),
        e_points: Sequence[int] = (),
        trajectory: bool = False,
    ):
        self.sys = build_residue_system(k)
        self.k = self.sys.modulus
        self.races = [RaceSeries(r) for r in races]
        for r in races:
            if r.modulus != self.k:
                raise InvalidRaceError(f"race {r.name} does not use modulus {self.k}")
            r.validate(self.sys)
        fs = set(functions) | {r.f for r in races}
        bad = fs - set(FUNCTIONS)
        if bad:
            raise InvalidRaceError(f"unknown counting functions {sorted(bad)}")
        self.functions = tuple(f for f in FUNCTIONS if f in fs)
        self.rho = rho
        for a in e_classes:
            if not self.sys.is_unit(a):
                raise InvalidResidueError(f"{a} is not a unit modulo {self.k}")
        if any(x < 2 for x in e_points):
            raise PrimeRaceError("E-vector sample points must be >= 2")
        self.e_classes = tuple(int(a) % self.k for a in e_classes)
        self.e_points = np.array(sorted(set(int(x) for x in e_points)), dtype=np.int64)
        self.e_samples: list[tuple[int, list[float]]] = []
        self.trajectory_enabled = trajectory
        self.trajectory: list[tuple[int, str, int, float]] = []

        k = self.k
        self.position = 2
        self.pi = np.zeros(k, dtype=np.int64)
        self.pi2 = np.zeros(k, dtype=np.int64)
        self.theta = np.zeros(k)
        self.psi = np.zeros(k)
        self.powers = np.zeros((MAX_POWER + 1, k), dtype=np.int64)  # count of p^m per class
        self.pi_total = 0
        self.pi2_total = 0
        self._pi2_primes: np.ndarray | None = None

    # -- main loop ----------------------------------------------------------
    def run(
        self,
        T: int,
        *,
        segment_bytes: int = DEFAULT_SEGMENT_BYTES,
        workers: int = 1,
        checkpoint_path=None,
        checkpoint_every: int = 0,
    ) -> "Sweep":
        if T < 2:
            raise PrimeRaceError("sweep bound T must be >= 2")
        if T + 1 <= self.position:
            return self
        grid = geometric_grid(T, self.rho, include_end=False)
        grid = grid[grid >= self.position]
        need_powers = any(f in self.functions for f in ("psi", "Pi"))
        powers = higher_powers(self.position, T + 1) if need_powers else None
        if "pi2" in self.functions:
            self._pi2_primes = primes_between(2, T // 2 + 1, segment_bytes=segment_bytes)
        n_seg = 0
        for seg in iter_segments(self.position, T + 1, segment_bytes=segment_bytes, workers=workers):
            g = grid[(grid >= seg.lo) & (grid < seg.hi)]
            self._segment(seg.lo, seg.hi, seg.primes, powers, g)
            self.position = seg.hi
            n_seg += 1
            if checkpoint_path and checkpoint_every and n_seg % checkpoint_every == 0:
                self.save(checkpoint_path)
        for r in self.races:
            r.close(T)
        self.T = T
        if checkpoint_path:
            self.save(checkpoint_path)
        return self

    def _segment(self, lo, hi, primes, powers, grid) -> None:
        k = self.k
        res = primes % k
        # E-vector samples need the state before this batch
        if len(self.e_points):
            sel = self.e_points[(self.e_points >= lo) & (self.e_points < hi)]
            for x in sel.tolist():
                j = int(np.searchsorted(primes, x, side="right"))
                tot = self.pi_total + j
                cls = np.bincount(res[:j], minlength=k)
                phi = self.sys.euler_phi
                scale = math.log(x) / math.sqrt(x)
                vec = [scale * (phi * int(self.pi[a] + cls[a]) - tot) for a in self.e_classes]
                self.e_samples.append((x, vec))
        if self.trajectory_enabled and len(grid):
            self._trajectory(primes, res, grid)

        self.pi += np.bincount(res, minlength=k)
        self.pi_total += len(primes)
        logs = None
        if "theta" in self.functions or "psi" in self.functions:
            logs = np.log(primes.astype(np.float64))
            self.theta = _class_cumsum(self.theta, res, logs, k)
        batch = None
        if powers is not None:
            a, b = np.searchsorted(powers.n, [lo, hi])
            hp_n, hp_p, hp_m = powers.n[a:b], powers.p[a:b], powers.m[a:b]
            if "psi" in self.functions:
                # psi = theta + sum over higher powers, accumulated in event order
                batch = merge_prime_powers(primes, PrimePowerBatch(hp_n, hp_p, hp_m, np.log(hp_p.astype(float))))
                self.psi = _class_cumsum(self.psi, batch.n % k, batch.log_p, k)
            if len(hp_n):
                np.add.at(self.powers, (hp_m, hp_n % k), 1)
        semis = None
        if "pi2" in self.functions:
            semis = semiprimes_between(lo, hi, self._pi2_primes)
            self.pi2 += np.bincount(semis % k, minlength=k)
            self.pi2_total += len(semis)

        for series in self.races:
            xs, incs = self._race_events(series.race, primes, res, logs, powers, lo, hi, semis, batch)
            series.feed(xs, incs, grid)

    def _race_events(self, race, primes, res, logs, powers, lo, hi, semis, batch):
        w = race.weights()
        f = race.f
        if f == "pi":
            return primes, w[res]
        if f == "theta":
            return primes, w[res] * logs
        if f == "pi2":
            return semis, w[semis % self.k]
        if batch is None:
            a, b = np.searchsorted(powers.n, [lo, hi])
            batch = merge_prime_powers(primes, PrimePowerBatch(powers.n[a:b], powers.p[a:b], powers.m[a:b], powers.log_p[a:b]))
        cls = w[batch.n % self.k]
        if f == "psi":
            return batch.n, cls * batch.log_p
        return batch.n, cls / batch.m  # Pi

    def _trajectory(self, primes, res, grid) -> None:
        idx = np.searchsorted(primes, grid, side="right")
        for x, j in zip(grid.tolist(), idx.tolist()):
            cls = np.bincount(res[:j], minlength=self.k)
            for a in self.sys.reduced:
                self.trajectory.append((x, "pi", a, int(self.pi[a] + cls[a])))

    # -- queries ----------------------------------------------------------
    @property
    def x(self) -> int:
        return self.position - 1

    def counts(self) -> CountVector:
        units = self.sys.reduced
        Pi = {}
        for a in units:
            extra = sum(Fraction(int(self.powers[m, a]), m) for m in range(2, MAX_POWER + 1) if self.powers[m, a])
            Pi[a] = float(int(self.pi[a]) + extra)
        dividing = self.pi_total - int(sum(self.pi[a] for a in units))
        return CountVector(
            modulus=self.k,
            x=self.x,
            pi={a: int(self.pi[a]) for a in units},
            theta={a: float(self.theta[a]) for a in units},
            psi={a: float(self.psi[a]) for a in units},
            Pi=Pi,
            pi2={a: int(self.pi2[a]) for a in units},
            pi_total=self.pi_total,
            pi_dividing=dividing,
            pi2_total=self.pi2_total,
        )

    def series(self, race: Race) -> RaceSeries:
        for s in self.races:
            if s.race == race:
                return s
        raise KeyError(race.name)

    # -- checkpointing ----------------------------------------------------
    def to_checkpoint(self) -> CheckpointState:
        meta = {
            "k": self.k,
            "functions": list(self.functions),
            "rho": self.rho,
            "e_classes": list(self.e_classes),
            "e_points": self.e_points.tolist(),
            "e_samples": self.e_samples,
            "trajectory_enabled": self.trajectory_enabled,
            "trajectory": self.trajectory,
            "races": [s.to_state() for s in self.races],
        }
        ints = self.pi.tolist() + self.pi2.tolist() + self.powers.ravel().tolist() + [self.pi_total, self.pi2_total]
        floats = self.theta.tolist() + self.psi.tolist()
        return CheckpointState(self.position, meta, ints, floats)

    def save(self, path) -> Path:
        return write_checkpoint(self.to_checkpoint(), path)

    @classmethod
    def from_checkpoint(cls, state: CheckpointState | str | Path) -> "Sweep":
        if not isinstance(state, CheckpointState):
            state = restore(state)
        m = state.metadata
        if not m:
            raise PrimeRaceError("checkpoint carries no sweep state")
        races = [RaceSeries.from_state(d) for d in m["races"]]
        sw = cls(
            m["k"],
            [s.race for s in races],
            functions=m["functions"],
            rho=m["rho"],
            e_classes=m["e_classes"],
            e_points=m["e_points"],
            trajectory=m["trajectory_enabled"],
        )
        sw.races = races
        sw.e_samples = [(x, list(v)) for x, v in m["e_samples"]]
        sw.trajectory = [tuple(t) for t in m["trajectory"]]
        k = sw.k
        ints = state.ints
        sw.pi = np.array(ints[:k], dtype=np.int64)
        sw.pi2 = np.array(ints[k : 2 * k], dtype=np.int64)
        n = (MAX_POWER + 1) * k
        sw.powers = np.array(ints[2 * k : 2 * k + n], dtype=np.int64).reshape(MAX_POWER + 1, k)
        sw.pi_total, sw.pi2_total = ints[2 * k + n :]
        sw.theta = np.array(state.floats[:k])
        sw.psi = np.array(state.floats[k:])
        sw.position = state.position
        return sw

    def result_json(self) -> str:
        """Deterministic JSON of everything accumulated so far."""
        c = self.counts()
        doc = {
            "k": self.k,
            "x": self.x,
            "pi": c.pi,
            "theta": c.theta,
            "psi": c.psi,
            "Pi": c.Pi,
            "pi2": c.pi2,
            "races": [dict(s.report(), checkpoints=s.checkpoints, crossings=s.crossings,
                           positive_count=s.positive_count, log_positive=s.log_positive)
                      for s in self.races],
            "e_samples": self.e_samples,
        }
        return dumps(doc)


def _class_cumsum(acc: np.ndarray, res: np.ndarray, vals: np.ndarray, k: int) -> np.ndarray:
    """Add ``vals`` to per-class accumulators in sequential order.

    Sequential (not pairwise) summation makes the result independent of how
    the stream is cut into batches.
    """
    acc = acc.copy()
    order = np.argsort(res, kind="stable")
    r, v = res[order], vals[order]
    bounds = np.flatnonzero(np.diff(r)) + 1
    for grp_r, grp_v in zip(np.split(r, bounds), np.split(v, bounds)):
        if len(grp_r):
            a = int(grp_r[0])
            acc[a] = np.cumsum(np.concatenate(([acc[a]], grp_v)))[-1]
    return acc


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        return super().default(o)


def _fmt(obj):
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {str(k): _fmt(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_fmt(v) for v in obj]
    return obj


def dumps(doc) -> str:
    return json.dumps(_fmt(doc), sort_keys=True, cls=_Encoder)


# ---------------------------------------------------------------------------
# operations


def sweep(k: int, T: int, races: Sequence[Race] = (), **options) -> Sweep:
    run_opts = {key: options.pop(key) for key in ("segment_bytes", "workers", "checkpoint_path", "checkpoint_every") if key in options}
    return Sweep(k, races, **options).run(T, **run_opts)


def race_series(k: int, f: str, l1: int, l2: int, T: int, **options) -> RaceSeries:
    race = Race.pair(k, f, l1, l2)
    return sweep(k, T, [race], **options).series(race)


def sign_changes(series: RaceSeries) -> int:
    return series.sign_changes


@dataclass(frozen=True)
class LeadDensity:
    count: int
    total: int

    @property
    def value(self) -> float:
        return self.count / self.total

    def as_fraction(self) -> Fraction:
        return Fraction(self.count, self.total)


def lead_density(k: int, l1: int, l2: int, T: int, *, f: str = "pi", **options) -> LeadDensity:
    """Fraction of integers n in [1, T] with delta_f(n; k, l1, l2) > 0."""
    if T < 2:
        return LeadDensity(0, max(T, 1))
    s = race_series(k, f, l1, l2, T, **options)
    return LeadDensity(s.positive_count, T)


@dataclass(frozen=True)
class LogDensity:
    X: int
    measure: float  # integral of dt/t over {t in [2, X] : delta(t) > 0}
    literal: float  # measure / X
    standard: float  # measure / log X
    lower: float
    upper: float


def log_density_from_series(series: RaceSeries) -> LogDensity:
    X = series.T
    if X < 2:
        raise PrimeRaceError("logarithmic density needs X >= 2")
    meas = series.log_positive
    std = meas / math.log(X) if X > 2 else 0.0
    # running standard density over the upper half of log-scale
    run = _running_log_density(series)
    tail = [v for x, v in run if x * x >= X]
    lower = min(tail, default=std)
    upper = max(tail, default=std)
    return LogDensity(X, meas, meas / X, std, min(lower, std), max(upper, std))


def _running_log_density(series: RaceSeries) -> list[tuple[int, float]]:
    """Standard log density at each storage checkpoint, from the checkpoint log."""
    out = []
    acc = 0.0
    prev_x, prev_d = None, 0
    for x, d in series.checkpoints:
        if prev_x is not None and prev_d > 0:
            acc += math.log(x / prev_x)
        if x > 2:
            out.append((x, acc / math.log(x)))
        prev_x, prev_d = x, d
    return out


def log_density(k: int, l1: int, l2: int, X: int, *, f: str = "pi", **options) -> LogDensity:
    if X < 2:
        raise PrimeRaceError("logarithmic density needs X >= 2")
    return log_density_from_series(race_series(k, f, l1, l2, X, **options))


def find_ordering(k: int, classes: Sequence[int], x_start: int, x_end: int, *, segment_bytes: int = DEFAULT_SEGMENT_BYTES) -> int | None:
    """Smallest m in [x_start, x_end] with pi(m;k,a_1) > ... > pi(m;k,a_r)."""
    sys = build_residue_system(k)
    classes = [int(a) % k for a in classes]
    if len(classes) > sys.euler_phi:
        raise InvalidRaceError(f"ordering of {len(classes)} classes exceeds phi({k}) = {sys.euler_phi}")
    if len(set(classes)) != len(classes) or not all(sys.is_unit(a) for a in classes):
        raise InvalidRaceError("ordering classes must be distinct units")
    if x_end < x_start:
        return None
    lookup = np.full(k, -1, dtype=np.int64)
    lookup[classes] = np.arange(len(classes))
    counts = np.zeros(len(classes), dtype=np.int64)
    if x_start > 2:
        pre = primes_between(2, x_start + 1)
        idx = lookup[pre % k]
        counts += np.bincount(idx[idx >= 0], minlength=len(classes))
    if np.all(np.diff(counts) < 0):
        return max(x_start, 1)
    lo = x_start + 1
    if lo > x_end:
        return None
    for seg in iter_segments(lo, x_end + 1, segment_bytes=segment_bytes):
        p = seg.primes
        idx = lookup[p % k]
        hit = idx >= 0
        p, idx = p[hit], idx[hit]
        if not len(p):
            continue
        onehot = np.zeros((len(p), len(classes)), dtype=np.int64)
        onehot[np.arange(len(p)), idx] = 1
        traj = counts + np.cumsum(onehot, axis=0)
        ok = np.all(np.diff(traj, axis=1) < 0, axis=1)
        w = np.flatnonzero(ok)
        if len(w):
            return int(p[w[0]])
        counts = traj[-1]
    return None


def orderings_census(k: int, classes: Sequence[int], x_end: int) -> dict[tuple[int, ...], int | None]:
    """First occurrence of every strict ordering of ``classes`` up to x_end."""
    return {perm: find_ordering(k, perm, 2, x_end) for perm in permutations(classes)}


def pi2_sweep(k: int, T: int, **options) -> Sweep:
    if T < 4:
        raise PrimeRaceError("semiprime sweep needs T >= 4")
    return sweep(k, T, functions=("pi2",), **options)


@dataclass
class EVector:
    modulus: int
    classes: tuple[int, ...]
    samples: list[tuple[int, list[float]]]


def e_vector(k: int, classes: Sequence[int], checkpoints: Sequence[int], **options) -> EVector:
    if not checkpoints:
        return EVector(k, tuple(classes), [])
    if min(checkpoints) < 2:
        raise PrimeRaceError("E-vector sample points must be >= 2")
    sw = sweep(k, max(checkpoints), e_classes=classes, e_points=checkpoints, **options)
    return EVector(sw.k, sw.e_classes, sw.e_samples)


# ---------------------------------------------------------------------------
# logarithmic integral


def li(x: float, *, epsrel: float = 1e-12) -> float:
    """Principal value of the integral of 1/log t from 0 to x.

    The singularity at t = 1 is excised symmetrically: on [1-h, 1+h] the
    integrand is folded into 1/log(1+s) + 1/log(1-s), which is regular.
    """
    if x < 0:
        raise ValueError("li(x) needs x >= 0")
    if x == 0:
        return 0.0
    if x == 1:
        return -math.inf
    opts = dict(epsabs=0.0, epsrel=epsrel, limit=500)
    if x < 1:
        val, _ = integrate.quad(lambda t: 1.0 / math.log(t), 0.0, x, **opts)
        return val
    h = min(0.5, x - 1.0)

    def folded(s):
        if s < 1e-4:
            # series of 1/log(1+s) + 1/log(1-s) about 0
            return 1.0 + s * s / 12.0
        return 1.0 / math.log1p(s) + 1.0 / math.log1p(-s)

    left, _ = integrate.quad(lambda t: 1.0 / math.log(t), 0.0, 1.0 - h, **opts)
    mid, _ = integrate.quad(folded, 0.0, h, **opts)
    right = 0.0
    if x > 1.0 + h:
        # substitute t = e^u on the smooth part
        right, _ = integrate.quad(lambda u: math.exp(u) / u, math.log1p(h), math.log(x), **opts)
    return left + mid + right
