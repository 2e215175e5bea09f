#!/usr/bin/env python3
"""Generate a table of zeta-zero ordinates with the Riemann-Siegel formula.

Data preparation only: the C++ library never computes zeros, it loads the
plain-text tables this script writes (one ordinate per line, ascending).

Method
  * Z(t) via Riemann-Siegel with correction terms C0..C4. The correction
    functions are evaluated from a Taylor series of
    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) about p = 1/2,
    computed once with mpmath.
  * Zeros are bracketed between Gram points. Each block between two good
    Gram points must hold exactly as many sign changes as Gram intervals
    (Rosser's rule, which holds far beyond the heights used here); short
    blocks are subdivided until the count matches.
  * Brackets are refined by vectorised bisection to below 1e-12.
  * Ordinates below --polish-below are polished with mpmath.siegelz, where
    the truncated asymptotic series is least accurate.
  * --check samples random indices and compares against mpmath.zetazero.

Usage
  python3 scripts/generate_zero_table.py --count 100000 --out data/zeros_100k.txt
"""

import argparse
import math
import sys

import mpmath
import numpy as np

TAYLOR_TERMS = 48


def psi_taylor():
    mpmath.mp.dps = 60

    def psi(p):
        return mpmath.cos(2 * mpmath.pi * (p * p - p - mpmath.mpf(1) / 16)) / mpmath.cos(2 * mpmath.pi * p)

    coeffs = mpmath.taylor(psi, mpmath.mpf(1) / 2, TAYLOR_TERMS)
    return [float(c) for c in coeffs]


def derivative_coeffs(coeffs, order):
    out = list(coeffs)
    for _ in range(order):
        out = [k * out[k] for k in range(1, len(out))]
    return out


def build_corrections():
    c = psi_taylor()
    d = [np.array(derivative_coeffs(c, k)) for k in range(13)]
    pi2 = math.pi ** 2
    pi4 = pi2 * pi2
    pi6 = pi4 * pi2
    pi8 = pi4 * pi4

    def pad(*terms):
        n = max(len(a) for _, a in terms)
        out = np.zeros(n)
        for w, a in terms:
            out[: len(a)] += w * a
        return out

    return [
        d[0],
        pad((-1.0 / (96 * pi2), d[3])),
        pad((1.0 / (64 * pi2), d[2]), (1.0 / (18432 * pi4), d[6])),
        pad((-1.0 / (64 * pi2), d[1]), (-1.0 / (3840 * pi4), d[5]), (-1.0 / (5308416 * pi6), d[9])),
        pad((1.0 / (128 * pi2), d[0]), (19.0 / (24576 * pi4), d[4]),
            (11.0 / (5898240 * pi6), d[8]), (1.0 / (2038431744 * pi8), d[12])),
    ]


CORRECTIONS = None


def theta(t):
    t = np.asarray(t, dtype=np.float64)
    return (t / 2 * np.log(t / (2 * math.pi)) - t / 2 - math.pi / 8
            + 1 / (48 * t) + 7 / (5760 * t ** 3) + 31 / (80640 * t ** 5))


def theta_prime(t):
    return 0.5 * np.log(np.asarray(t) / (2 * math.pi))


def siegel_z(t):
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    a = np.sqrt(t / (2 * math.pi))
    n_max = np.floor(a).astype(np.int64)
    p = a - n_max
    th = theta(t)
    total = np.zeros_like(t)
    top = int(n_max.max())
    chunk = 4096
    for lo in range(0, t.size, chunk):
        hi = min(lo + chunk, t.size)
        tt = t[lo:hi, None]
        n = np.arange(1, top + 1, dtype=np.float64)[None, :]
        mask = n <= n_max[lo:hi, None]
        terms = np.cos(th[lo:hi, None] - tt * np.log(n)) / np.sqrt(n)
        total[lo:hi] = 2 * np.where(mask, terms, 0.0).sum(axis=1)
    x = p - 0.5
    rem = np.zeros_like(t)
    for k, coeffs in enumerate(CORRECTIONS):
        rem += np.polynomial.polynomial.polyval(x, coeffs) * a ** (-k)
    sign = np.where((n_max - 1) % 2 == 0, 1.0, -1.0)
    return total + sign * rem / np.sqrt(a)


def gram_points(first, last):
    idx = np.arange(first, last + 1, dtype=np.float64)
    # initial guess from the leading term of theta
    g = 2 * math.pi * np.exp(1 + np.vectorize(lambda v: float(mpmath.lambertw((8 * v + 1) / (8 * math.e)).real))(idx))
    for _ in range(8):
        g -= (theta(g) - idx * math.pi) / theta_prime(g)
    return g


def sign_changes(values):
    return np.nonzero(np.signbit(values[:-1]) != np.signbit(values[1:]))[0]


def bracket_zeros(count):
    last = count + 64
    idx = np.arange(-1, last + 1)
    g = gram_points(-1, last)
    zg = siegel_z(g)
    good = ((-1.0) ** idx) * zg > 0
    good_pos = np.nonzero(good)[0]
    brackets = []
    for a, b in zip(good_pos[:-1], good_pos[1:]):
        expected = b - a
        grid = g[a:b + 1]
        vals = zg[a:b + 1]
        refine = 1
        while True:
            cross = sign_changes(vals)
            if cross.size >= expected:
                break
            refine *= 4
            if refine > 4096:
                raise RuntimeError(f"could not separate zeros in Gram block [{g[a]}, {g[b]}]")
            grid = np.concatenate([np.linspace(grid_lo, grid_hi, refine, endpoint=False)
                                   for grid_lo, grid_hi in zip(g[a:b], g[a + 1:b + 1])] + [g[b:b + 1]])
            vals = siegel_z(grid)
        if cross.size != expected:
            raise RuntimeError(f"extra sign changes in Gram block [{g[a]}, {g[b]}]")
        for c in cross:
            brackets.append((grid[c], grid[c + 1]))
        if len(brackets) >= count:
            break
    if len(brackets) < count:
        raise RuntimeError("not enough Gram points")
    return np.array(brackets[:count])


def refine(brackets):
    lo = brackets[:, 0].copy()
    hi = brackets[:, 1].copy()
    zlo = siegel_z(lo)
    while np.max(hi - lo) > 1e-12 * np.max(hi):
        mid = 0.5 * (lo + hi)
        zm = siegel_z(mid)
        left = np.signbit(zm) == np.signbit(zlo)
        lo = np.where(left, mid, lo)
        zlo = np.where(left, zm, zlo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def polish(zeros, below):
    mpmath.mp.dps = 25
    out = zeros.copy()
    for i, z in enumerate(zeros):
        if z >= below:
            break
        out[i] = float(mpmath.findroot(mpmath.siegelz, mpmath.mpf(z)))
    return out


def main():
    global CORRECTIONS
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=100000)
    ap.add_argument("--out", required=True)
    ap.add_argument("--polish-below", type=float, default=200.0)
    ap.add_argument("--check", type=int, default=40, help="random indices compared with mpmath.zetazero")
    args = ap.parse_args()

    CORRECTIONS = build_corrections()
    zeros = refine(bracket_zeros(args.count))
    zeros = polish(zeros, args.polish_below)
    if np.any(np.diff(zeros) <= 0):
        raise RuntimeError("ordinates not strictly increasing")

    rng = np.random.default_rng(12345)
    picks = sorted(set([1, 2, 10, 100, args.count] + list(rng.integers(1, args.count + 1, args.check))))
    mpmath.mp.dps = 20
    worst = 0.0
    for n in picks:
        ref = float(mpmath.zetazero(int(n)).imag)
        err = abs(ref - zeros[n - 1])
        worst = max(worst, err)
        if err > 1e-8:
            raise RuntimeError(f"zero {n}: {zeros[n - 1]!r} vs mpmath {ref!r}")
    print(f"checked {len(picks)} indices against mpmath, max abs error {worst:.2e}", file=sys.stderr)

    with open(args.out, "w") as f:
        for z in zeros:
            f.write(f"{z:.12f}\n")


if __name__ == "__main__":
    main()
