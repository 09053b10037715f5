"""Freeze high-precision Mittag-Leffler reference values to tests/data/ml_oracle.csv.

The reference is the plain power series summed in mpmath at 160 digits until a
term drops below 1e-30. Gamma values along the series use the recurrence
Gamma(x + p) = Gamma(x) (x)(x+1)...(x+p-1) for rational alpha = p/q, which
keeps small-alpha sums (thousands of terms) affordable. Takes a few minutes.
"""

from __future__ import annotations

import argparse
import csv
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np

ALPHAS = (0.3, 0.5, 0.6, 0.9, 1.0, 1.5)
PER_ALPHA = 84  # 504 samples in all
RADIUS = 5.0


def ml_series(alpha: float, z: complex, dps: int = 160, cutoff: float = 1e-30) -> complex:
    frac = Fraction(alpha).limit_denominator(100)
    p, q = frac.numerator, frac.denominator
    with mp.workdps(dps):
        z = mp.mpc(z)
        a = mp.mpf(p) / q
        last = {}  # Gamma(a n + 1) for the latest n in each residue class mod q
        total, zn, n = mp.mpc(0), mp.mpc(1), 0
        while True:
            r = n % q
            if n < q:
                g = mp.gamma(a * n + 1)
            else:
                x = a * (n - q) + 1
                g = last[r]
                for k in range(p):
                    g *= x + k
            last[r] = g
            term = zn / g
            total += term
            if n > 5 and abs(term) < cutoff:
                return complex(total)
            n += 1
            zn *= z


def samples(rng: np.random.Generator) -> list[tuple[float, complex]]:
    out = []
    for alpha in ALPHAS:
        real = np.concatenate([[-RADIUS, RADIUS, -1.0, 1.0, -0.5],
                               rng.uniform(-RADIUS, RADIUS, 19)])
        r = RADIUS * np.sqrt(rng.uniform(0, 1, PER_ALPHA - len(real)))
        th = rng.uniform(-np.pi, np.pi, len(r))
        cplx = r * np.exp(1j * th)
        out += [(alpha, complex(x, 0.0)) for x in real]
        out += [(alpha, complex(z)) for z in cplx]
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                         / "tests" / "data" / "ml_oracle.csv"))
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    rows = []
    for k, (alpha, z) in enumerate(samples(rng)):
        e = ml_series(alpha, z)
        rows.append((alpha, z.real, z.imag, e.real, e.imag))
        if k % 50 == 0:
            print(f"{k} alpha={alpha} z={z:.3f}", flush=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "z_re", "z_im", "e_re", "e_im"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
