"""Recompute the frozen oracle numbers used by the tests with 50-digit arithmetic.

    python scripts/oracle_values.py

g_n(0) = Gamma(n, n)/Gamma(n) by direct summation, and Delta log g_n(0) from
the exact derivatives of log(n Q(n, n r^2)) at r = 1:
  d/dr log R = -2 n^n r^(2n-1) e^(-n r^2) / (Gamma(n) Q),  Delta = (f'' + f'/r)/4.
"""
import mpmath

mpmath.mp.dps = 50


def edge_oracle(n):
    n = mpmath.mpf(n)
    q = mpmath.gammainc(n, n, mpmath.inf, regularized=True)

    def logR(r):
        return mpmath.log(mpmath.gammainc(n, n * r * r, mpmath.inf, regularized=True))

    d1 = mpmath.diff(logR, 1)
    d2 = mpmath.diff(logR, 1, 2)
    return q, (d2 + d1) / 4 / n


if __name__ == "__main__":
    print("n      g_n(0)              Delta log g_n(0)   rel. to -2/pi")
    for n in (64, 100, 256, 1024, 4096):
        g, lap = edge_oracle(n)
        rel = (lap + 2 / mpmath.pi) / (2 / mpmath.pi)
        print(f"{n:<6} {mpmath.nstr(g, 15):<19} {mpmath.nstr(lap, 12):<18} {mpmath.nstr(rel, 4)}")
