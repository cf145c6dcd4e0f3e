"""Two-tailed Pearson p-values used to freeze tests/data/pearson_p.json.

Values come from mpmath's regularized incomplete beta at 50 digits and are
cross-checked against scipy.stats.t.
Run: python3 pearson_oracle.py > ../data/pearson_p.json
"""
import json

import mpmath
from scipy import stats

mpmath.mp.dps = 50

RS = [-0.95, -0.5, -0.1, 0.0, 0.05, 0.2, 0.3, 0.5, 0.7, 0.99]
NS = [3, 5, 10, 30, 100]


def p_mpmath(r, n):
    r = mpmath.mpf(r)
    df = n - 2
    return mpmath.betainc(mpmath.mpf(df) / 2, mpmath.mpf(1) / 2, 0, 1 - r * r, regularized=True)


def p_scipy(r, n):
    df = n - 2
    if abs(r) == 1.0:
        return 0.0
    t = r * (df / (1 - r * r)) ** 0.5
    return 2 * stats.t.sf(abs(t), df)


def main():
    rows = []
    for n in NS:
        for r in RS:
            exact = float(p_mpmath(r, n))
            assert abs(exact - p_scipy(r, n)) < 1e-12, (r, n)
            rows.append({"r": r, "n": n, "p": exact})
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
