"""Double-double helpers for phase arguments t*log(n) and n**(2/k)."""
import functools

import mpmath
import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1

# 2*pi as three doubles of 26 significant bits each (Cody-Waite reduction)
with mpmath.workdps(60):
    _mp2pi = 2 * mpmath.pi
    TWO_PI_1 = float(mpmath.nint(_mp2pi * 2**23) / 2**23)
    TWO_PI_2 = float(mpmath.nint((_mp2pi - TWO_PI_1) * 2**49) / 2**49)
    TWO_PI_3 = float(_mp2pi - TWO_PI_1 - TWO_PI_2)
    del _mp2pi


def split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@functools.lru_cache(maxsize=8)
def _log_table(n_max):
    hi = np.empty(n_max + 1)
    lo = np.empty(n_max + 1)
    hi[0] = lo[0] = 0.0
    with mpmath.workdps(40):
        for n in range(1, n_max + 1):
            v = mpmath.log(n)
            h = float(v)
            hi[n] = h
            lo[n] = float(v - h)
    hi.flags.writeable = False
    lo.flags.writeable = False
    return hi, lo


def log_table(n_max):
    """(hi, lo) with log(n) = hi[n] + lo[n] to ~32 digits, for 0 <= n <= n_max."""
    size = 1024
    while size < n_max:
        size *= 2
    return _log_table(size)


def reduce_2pi(p, e):
    """Reduce the double-double phase p + e to r in about [-pi, pi]; returns r."""
    k = np.rint(p / (TWO_PI_1 + TWO_PI_2))
    r = ((p - k * TWO_PI_1) - k * TWO_PI_2) - k * TWO_PI_3
    return r + e


def phase_tlogn(t, n_max):
    """t*log(n) mod 2*pi for n = 1..n_max-1 (index 0 of the result is n = 1)."""
    hi, lo = log_table(n_max)
    p, e = two_prod(float(t), hi[1:n_max])
    e = e + float(t) * lo[1:n_max]
    return reduce_2pi(p, e)


def pow_two_thirds(n):
    """n**(2/3) as a double-double (hi, lo) for integer-valued n < 2**26, one Newton step on y**3 = n**2."""
    n = np.asarray(n, dtype=np.float64)
    n2 = n * n  # exact below 2**26
    y = np.cbrt(n2)
    a, b = two_prod(y, y)
    c, d = two_prod(a, y)
    cube_err = d + b * y
    resid = (n2 - c) - cube_err
    return y, resid / (3.0 * y * y)


def scaled_mod2(scale, hi, lo):
    """(scale * (hi + lo)) mod 2 in [0, 2) for a small positive integer scale."""
    p, e = two_prod(float(scale), hi)
    r = np.fmod(p, 2.0)
    r = r + (e + scale * lo)
    return np.mod(r, 2.0)
