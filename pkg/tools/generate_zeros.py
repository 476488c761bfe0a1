"""Generate the shipped zero datasets with mpmath.

For every non-principal character mod k the critical-line zeros coincide with
those of the inducing primitive character chi* mod q.  We scan the real
rotation Z(t) = e^{i theta(t)} L(1/2+it, chi*) / sqrt(eps) for sign changes,
refine each bracket with mpmath's findroot, and write one file per
character in the format read by :mod:`primerace.zeros`.

Run:  python tools/generate_zeros.py --out src/primerace/data/zeros --count 150
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import mpmath as mp

from primerace.residues import build_character_table


def primitive_values(table, i):
    """Values list of the inducing primitive character on 0..q-1 (mpmath form)."""
    chi = table[i]
    q, k = chi.conductor, table.modulus
    vals = []
    for n in range(q):
        if math.gcd(n, q) != 1:
            vals.append(0)
            continue
        a = n
        while math.gcd(a, k) != 1:
            a += q
        v = chi(a)
        vals.append(mp.mpc(v.real, v.imag))
    return q, vals


def make_Z(q, vals):
    a = 0 if abs(vals[q - 1] - 1) < 1e-9 else 1  # parity from chi(-1)
    tau = mp.fsum(vals[n] * mp.expjpi(2 * mp.mpf(n) / q) for n in range(q))
    eps = tau / (mp.mpc(0, 1) ** a * mp.sqrt(q))
    root = mp.sqrt(eps)

    def Z(t):
        t = mp.mpf(t)
        s = mp.mpc(0.5, t)
        theta = t / 2 * mp.log(q / mp.pi) + mp.im(mp.loggamma((s + a) / 2))
        v = mp.expj(theta) * mp.dirichlet(s, vals) / root
        return v

    return Z


def scan(Z, count, step, t0=0.1, max_height=1000.0):
    zeros = []
    t = mp.mpf(t0)
    first = Z(t)
    worst_imag = abs(mp.im(first))
    window = [(t, mp.re(first))]  # last three samples
    while len(zeros) < count and t < max_height:
        t2 = t + step
        cur = Z(t2)
        worst_imag = max(worst_imag, abs(mp.im(cur)) / (1 + abs(cur)))
        cur_r = mp.re(cur)
        prev_r = window[-1][1]
        if cur_r == 0 or prev_r * cur_r < 0:
            zeros.append(mp.findroot(lambda u: mp.re(Z(u)), (t, t2), solver="anderson"))
            window = [(t2, cur_r)]
        else:
            window = (window + [(t2, cur_r)])[-3:]
            if len(window) == 3:
                (ta, ra), (_, rb), (tc, rc) = window
                # |Z| dips without a sign change: look for a close pair
                if abs(rb) < abs(ra) and abs(rb) < abs(rc):
                    found = refine_dip(Z, ta, tc)
                    if found:
                        zeros.extend(found)
                        window = [(t2, cur_r)]
        t = t2
    return sorted(zeros), worst_imag


def refine_dip(Z, a, b, n=40):
    ts = [a + (b - a) * j / n for j in range(n + 1)]
    vs = [mp.re(Z(t)) for t in ts]
    out = []
    for (t1, v1), (t2, v2) in zip(zip(ts, vs), zip(ts[1:], vs[1:])):
        if v1 * v2 < 0:
            out.append(mp.findroot(lambda u: mp.re(Z(u)), (t1, t2), solver="anderson"))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="src/primerace/data/zeros")
    ap.add_argument("--moduli", default="3,4,5,8,12")
    ap.add_argument("--count", type=int, default=150)
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--dps", type=int, default=25)
    args = ap.parse_args(argv)
    mp.mp.dps = args.dps
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {"files": {}}
    cache: dict[tuple, list] = {}
    for k in map(int, args.moduli.split(",")):
        table = build_character_table(k)
        for i in range(1, len(table)):
            chi = table[i]
            q, vals = primitive_values(table, i)
            key = (q, tuple(complex(v) for v in vals))
            t_start = time.time()
            if key not in cache:
                Z = make_Z(q, vals)
                cache[key] = scan(Z, args.count, args.step)
            zeros, worst = cache[key]
            source = (
                f"mpmath {mp.__version__} dirichlet(); primitive conductor {q}; "
                f"Z(t) sign-change scan step {args.step}; findroot refinement; dps {args.dps}"
            )
            body = "".join(f"{mp.nstr(z, 17, strip_zeros=False)}\n" for z in zeros)
            header = (
                f"# modulus: {k}\n"
                f"# character: {','.join(chi.fingerprint())}\n"
                f"# source: {source}\n"
            )
            name = f"k{k}_chi{i}.txt"
            (out / name).write_text(header + body)
            manifest["files"][name] = {
                "modulus": k,
                "character_index": i,
                "conductor": q,
                "count": len(zeros),
                "max_height": float(zeros[-1]) if zeros else 0.0,
                "sha256": hashlib.sha256(body.encode()).hexdigest(),
                "source": source,
                "max_rotation_imag": float(worst),
            }
            manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
            print(f"k={k} chi={i} q={q} zeros={len(zeros)} H={float(zeros[-1]):.2f} "
                  f"imag={float(worst):.1e} {time.time() - t_start:.0f}s", flush=True)


if __name__ == "__main__":
    sys.exit(main())
