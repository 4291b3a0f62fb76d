#!/usr/bin/env python3
"""Frozen Mittag-Leffler reference table for the C++ tests.

E_{a,b}(-x) is summed from its power series in high-precision arithmetic
(working digits sized to the largest term).  Where the series is too
expensive, the value is obtained by numerically inverting the Laplace
transform s^{a-b}/(s^a + x) at t = 1 (Talbot contour).  Points reachable by
both routes are cross-checked.

usage: gen_ml_oracle.py > ml_oracle.csv
"""
import sys
import mpmath as mp

ALPHAS = [mp.mpf(3) / 10, mp.mpf(1) / 2, mp.mpf(4) / 5]
NX = 34          # x-values per (alpha, beta), x in [0, 50]
SERIES_MAX = 300  # bound on x^{1/alpha} for the series route


def series(a, b, x):
    y = x ** (1 / a)
    mp.mp.dps = int(y / mp.log(10)) + 40
    s, k = mp.mpf(0), 0
    while True:
        t = (-x) ** k * mp.rgamma(a * k + b)
        s += t
        if a * k > y + 10 and abs(t) < mp.mpf(10) ** (-mp.mp.dps + 5):
            return s
        k += 1


def talbot(a, b, x):
    mp.mp.dps = 40
    return mp.invertlaplace(lambda s: s ** (a - b) / (s ** a + x), 1, method="talbot")


def main():
    out = sys.stdout
    out.write("alpha,beta,z,value\n")
    for a in ALPHAS:
        for b in (mp.mpf(1), a):
            for i in range(NX):
                x = mp.mpf(50) * (mp.mpf(i) / (NX - 1)) ** 2
                if x == 0:
                    v = mp.rgamma(b)
                elif x ** (1 / a) <= SERIES_MAX:
                    v = series(a, b, x)
                    if i % 5 == 1:
                        w = talbot(a, b, x)
                        assert abs(v - w) <= mp.mpf(10) ** -25 * abs(v), (a, b, x, v, w)
                else:
                    v = talbot(a, b, x)
                mp.mp.dps = 30
                out.write("%s,%s,%s,%s\n" % (mp.nstr(a, 17), mp.nstr(b, 17), mp.nstr(-x, 25),
                                             mp.nstr(v, 25)))
                out.flush()


if __name__ == "__main__":
    main()
