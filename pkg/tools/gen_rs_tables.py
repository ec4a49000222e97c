"""Regenerate the Riemann-Siegel correction tables in ``hardyz/_rs_tables.py``.

Taylor coefficients of C_0..C_3 in x = p - 1/2, built from the power
series of Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) by exact
series arithmetic at 60 digits.

    python tools/gen_rs_tables.py > src/hardyz/_rs_tables.py
"""
import mpmath as mp

mp.mp.dps = 60
DEG = 90
DROP = mp.mpf("1e-19")  # coefficients below this after scaling by 2**-k are dropped


def cos_series(scale, shift_deg, deg):
    # series of cos(scale * x**shift_deg) / sin(...) in x
    c = [mp.mpf(0)] * (deg + 1)
    s = [mp.mpf(0)] * (deg + 1)
    k = 0
    while k * shift_deg <= deg:
        term = scale ** k / mp.factorial(k)
        if k % 4 == 0:
            c[k * shift_deg] = term
        elif k % 4 == 1:
            s[k * shift_deg] = term
        elif k % 4 == 2:
            c[k * shift_deg] = -term
        else:
            s[k * shift_deg] = -term
        k += 1
    return c, s


def psi_series(deg):
    pi = mp.pi
    c2, s2 = cos_series(2 * pi, 2, deg)
    a = -5 * pi / 8
    num = [mp.cos(a) * c2[i] - mp.sin(a) * s2[i] for i in range(deg + 1)]
    c1, _ = cos_series(2 * pi, 1, deg)
    den = [-v for v in c1]
    out = [mp.mpf(0)] * (deg + 1)
    for i in range(deg + 1):
        acc = num[i] - sum(out[j] * den[i - j] for j in range(i))
        out[i] = acc / den[0]
    return out


def deriv(series, k):
    return [series[i + k] * mp.factorial(i + k) / mp.factorial(i) for i in range(len(series) - k)]


def combine(terms, n):
    out = [mp.mpf(0)] * n
    for coef, ser in terms:
        for i in range(min(n, len(ser))):
            out[i] += coef * ser[i]
    return out


def main():
    pi = mp.pi
    psi = psi_series(DEG)
    d = lambda k: deriv(psi, k)
    n = DEG - 12
    tables = [
        combine([(1, psi)], n),
        combine([(-1 / (96 * pi**2), d(3))], n),
        combine([(1 / (64 * pi**2), d(2)), (1 / (18432 * pi**4), d(6))], n),
        combine([(-1 / (64 * pi**2), d(1)), (-1 / (3840 * pi**4), d(5)),
                 (-1 / (5308416 * pi**6), d(9))], n),
    ]
    print('"""Taylor coefficients of the Riemann-Siegel corrections C_0..C_3 in x = p - 1/2.')
    print()
    print("Generated by tools/gen_rs_tables.py; do not edit by hand.")
    print('"""')
    print()
    print("RS_COEFFS = (")
    for tab in tables:
        last = max(i for i, v in enumerate(tab) if abs(v) * mp.mpf(2) ** -i > DROP)
        print("    (")
        for v in tab[: last + 1]:
            print(f"        {mp.nstr(v, 20, min_fixed=1, max_fixed=0)},")
        print("    ),")
    print(")")


if __name__ == "__main__":
    main()
