"""Command-line entry point: ``primerace race|kernel|density``.

Exit codes: 0 success, 2 usage or invalid input, 3 missing zero data,
4 numeric budget exhausted, 1 any other library error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .density import QuadratureOptions, density as compute_density, unbiased_check
from .counters import FUNCTIONS, Race, Sweep, dumps
from .errors import (
    BudgetExhaustedError,
    InvalidModulusError,
    InvalidRaceError,
    InvalidResidueError,
    MissingZeroDataError,
    PrimeRaceError,
)
from .residues import build_residue_system
from .zeros import default_zero_dir, load_archive

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_MISSING, EXIT_BUDGET = 0, 1, 2, 3, 4


class UsageError(PrimeRaceError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    modulus: int
    classes: tuple[int, ...] = ()
    T: int | None = None
    grid: dict[str, list[float]] = field(default_factory=dict)
    kernel: dict = field(default_factory=dict)
    zeros: str | None = None
    output: str = "json"
    checkpoint: str | None = None
    resume: str | None = None
    threads: int = 1

    def validate(self) -> None:
        sys_ = build_residue_system(self.modulus)
        for a in self.classes:
            if not sys_.is_unit(a):
                raise InvalidResidueError(f"{a} is not a unit modulo {self.modulus}")
        if self.threads < 1:
            raise UsageError("--threads must be at least 1")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def parse_classes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive of b when reached), ``a,b,c`` or a single value."""
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise UsageError(f"grid must be lo:hi:step with step > 0, got {text!r}")
            lo, hi, step = parts
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + i * step for i in range(n)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None


def _num(v: float):
    return int(v) if float(v).is_integer() else v


# ---------------------------------------------------------------------------
# race


def cmd_race(cfg: RunConfig, f: str, out, plot_data: str | None = None, checkpoint_every: int = 0) -> int:
    l1, l2 = cfg.classes
    race = Race.pair(cfg.modulus, f, l1, l2)
    if cfg.resume and Path(cfg.resume).exists():
        sw = Sweep.from_checkpoint(cfg.resume)
        if sw.k != cfg.modulus or [s.race for s in sw.races] != [race]:
            raise UsageError(f"checkpoint {cfg.resume} was written for a different race")
    else:
        sw = Sweep(cfg.modulus, [race], functions=(f,))
    sw.run(cfg.T, workers=cfg.threads, checkpoint_path=cfg.checkpoint or cfg.resume,
           checkpoint_every=checkpoint_every)
    s = sw.series(race)
    counts = sw.counts()
    per_class = getattr(counts, f)
    doc = dict(s.report(), k=cfg.modulus, f=f, pair=[l1 % cfg.modulus, l2 % cfg.modulus],
               counts={str(l1 % cfg.modulus): per_class[l1 % cfg.modulus],
                       str(l2 % cfg.modulus): per_class[l2 % cfg.modulus]},
               delta=s.delta, crossings=s.crossings, positive_count=s.positive_count)
    if cfg.output == "json":
        out.write(dumps(doc) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for key in ("race", "T", "first_negative", "first_positive", "w", "delta", "positive_count"):
            w.writerow([key, _fmt(doc[key])])
        for a, v in doc["counts"].items():
            w.writerow([f"count_{a}", _fmt(v)])
    if plot_data:
        with open(plot_data, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "delta"])
            for x, d in s.checkpoints:
                w.writerow([x, _fmt(d)])
            if not s.checkpoints or s.checkpoints[-1][0] != s.T:
                w.writerow([s.T, _fmt(s.delta)])
    return EXIT_OK


# ---------------------------------------------------------------------------
# kernel


def _kernel_rows(kind: str, cfg: RunConfig):
    p = cfg.kernel
    k = cfg.modulus
    l1, l2 = cfg.classes
    names = sorted(cfg.grid)
    mesh = np.meshgrid(*[cfg.grid[n] for n in names], indexing="ij") if names else []
    points = zip(*[m.ravel() for m in mesh]) if names else [()]
    for vals in points:
        params = dict(zip(names, vals))
        label = ";".join(f"{n}={_fmt(_num(float(v)))}" for n, v in params.items())
        if kind == "abel":
            res = kernels.abel_delta(p["F"], params["r"], k, l1, l2)
        elif kind == "kt":
            res = kernels.kt_gauss_sum(k, l1, l2, params["x"], params["r"], p["weight"], max_prime=p["max_prime"])
        else:
            res = kernels.bentz_sum(k, l1, l2, params["x"], params["alpha"], scale=p["scale"], max_prime=p["max_prime"])
        yield label, res


def cmd_kernel(cfg: RunConfig, kind: str, out) -> int:
    rows = list(_kernel_rows(kind, cfg))
    if cfg.output == "json":
        doc = [{"parameter": lab, "value": r.value, "tail_bound": r.tail_bound,
                "p_max": r.p_max, "truncated": r.truncated} for lab, r in rows]
        out.write(dumps(doc) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["parameter", "value", "tail_bound"])
        for lab, r in rows:
            w.writerow([lab, _fmt(r.value), _fmt(r.tail_bound)])
    return EXIT_OK


# ---------------------------------------------------------------------------
# density


def cmd_density(cfg: RunConfig, out, options: QuadratureOptions | None = None) -> int:
    if len(set(c % cfg.modulus for c in cfg.classes)) != len(cfg.classes):
        raise InvalidRaceError(f"duplicate classes in {cfg.classes}")
    archive = load_archive(cfg.zeros or default_zero_dir())
    res = compute_density(cfg.modulus, cfg.classes, archive, options)
    doc = res.to_json()
    ok, reason = unbiased_check(cfg.modulus, cfg.classes)
    doc["unbiased"] = ok
    doc["unbiased_reason"] = reason
    if cfg.output == "json":
        out.write(dumps(doc) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for key in ("k", "delta", "error_estimate", "unbiased"):
            w.writerow([key, _fmt(doc[key])])
        w.writerow(["tuple", ",".join(map(str, doc["tuple"]))])
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="primerace", description="Prime race computations.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("race", help="sweep a two-class race up to T")
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--f", choices=FUNCTIONS, default="pi")
    r.add_argument("--pair", required=True, help="l1,l2")
    r.add_argument("--T", type=int, required=True)
    r.add_argument("--checkpoint", help="write checkpoints to this file")
    r.add_argument("--checkpoint-every", type=int, default=0, help="segments between checkpoints")
    r.add_argument("--resume", help="resume from this checkpoint file if it exists")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--plot-data", help="write (x, delta) checkpoint CSV here")

    kp = sub.add_parser("kernel", help="evaluate a weighted prime sum over a grid")
    kp.add_argument("--kind", choices=("abel", "kt", "bentz"), required=True)
    kp.add_argument("--k", type=int, required=True)
    kp.add_argument("--pair", help="l1,l2 (default 1,3 for k=4 and 1,2 for k=3)")
    kp.add_argument("--F", choices=kernels.ABEL_FUNCTIONS, default="psi")
    kp.add_argument("--r", help="Abel rate or kt width; value, list or lo:hi:step")
    kp.add_argument("--x", help="value, list or lo:hi:step")
    kp.add_argument("--alpha", default="0.5")
    kp.add_argument("--scale", type=float, default=1.0)
    kp.add_argument("--weight", choices=("log_p", "lambda", "lambda_over_log", "unit"), default="log_p")
    kp.add_argument("--max-prime", type=int, default=kernels.DEFAULT_MAX_PRIME)
    kp.add_argument("--format", choices=("csv", "json"), default="csv")

    d = sub.add_parser("density", help="limiting density of an ordering (needs zero data)")
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--tuple", required=True, help="a1,a2[,a3]")
    d.add_argument("--zeros", help="zero archive directory (default: $PRLB_ZERO_DIR or packaged data)")
    d.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def _default_pair(k: int) -> tuple[int, int]:
    sys_ = build_residue_system(k)
    nr = sys_.non_residues()
    if not nr:
        raise UsageError(f"--pair is required for k = {k}")
    return (1, nr[0])


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "race":
            pair = parse_classes(args.pair)
            if len(pair) != 2:
                raise UsageError("--pair needs exactly two classes")
            cfg = RunConfig("race", args.k, pair, T=args.T, output=args.format,
                            checkpoint=args.checkpoint, resume=args.resume, threads=args.threads)
            cfg.validate()
            return cmd_race(cfg, args.f, out, args.plot_data, args.checkpoint_every)
        if args.command == "kernel":
            pair = parse_classes(args.pair) if args.pair else _default_pair(args.k)
            if len(pair) != 2:
                raise UsageError("--pair needs exactly two classes")
            grid = {}
            need = {"abel": ("r",), "kt": ("x", "r"), "bentz": ("x", "alpha")}[args.kind]
            for name in need:
                text = getattr(args, name)
                if text is None:
                    raise UsageError(f"--{name} is required for --kind {args.kind}")
                grid[name] = parse_grid(text)
            cfg = RunConfig("kernel", args.k, pair, grid=grid, output=args.format,
                            kernel={"F": args.F, "scale": args.scale, "weight": args.weight,
                                    "max_prime": args.max_prime})
            cfg.validate()
            return cmd_kernel(cfg, args.kind, out)
        cfg = RunConfig("density", args.k, parse_classes(args.tuple), zeros=args.zeros, output=args.format)
        cfg.validate()
        return cmd_density(cfg, out)
    except MissingZeroDataError as exc:
        print(f"primerace: missing zero data for modulus {exc.modulus}: characters {exc.missing}",
              file=sys.stderr)
        return EXIT_MISSING
    except BudgetExhaustedError as exc:
        print(f"primerace: numeric budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, InvalidModulusError, InvalidResidueError, InvalidRaceError, ValueError) as exc:
        print(f"primerace: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrimeRaceError as exc:
        print(f"primerace: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
