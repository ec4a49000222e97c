"""Pure numpy/Python kernels; the fallback used when ``_ckernels`` is not built.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Summation orders match the compiled versions term by term, but libm and
numpy transcendental functions may differ in the last ulp, so results are
only guaranteed bitwise-stable within one backend.
"""
import numpy as np

NAME = "python"


def rs_main_sum(t, theta, nterms, logn, rsqrt, out):
    """out[i] = 2 * sum_{n=1}^{nterms[i]} rsqrt[n] * cos(theta[i] - t[i]*logn[n]).

    ``nterms`` must be nondecreasing (callers pass ascending t).
    """
    acc = np.zeros(t.shape[0])
    if t.shape[0]:
        nmax = int(nterms[-1])
        for n in range(1, nmax + 1):
            lo = int(np.searchsorted(nterms, n, side="left"))
            acc[lo:] += rsqrt[n] * np.cos(theta[lo:] - t[lo:] * logn[n])
    out[:] = 2.0 * acc


def simpson_cumsum(f, h, s0, c0):
    """Kahan-compensated running composite Simpson sums over consecutive panels.

    Returns (sums, comps) of length npanels + 1 starting from state (s0, c0).
    """
    npan = (f.shape[0] - 1) // 2
    sums = np.empty(npan + 1)
    comps = np.empty(npan + 1)
    panels = (h / 3.0) * (f[0:2 * npan:2] + 4.0 * f[1:2 * npan:2] + f[2:2 * npan + 1:2])
    s = float(s0)
    c = float(c0)
    sums[0] = s
    comps[0] = c
    for j, p in enumerate(panels.tolist(), 1):
        y = p - c
        tt = s + y
        c = (tt - s) - y
        s = tt
        sums[j] = s
        comps[j] = c
    return sums, comps


def kahan_sum(x, s0, c0):
    s = float(s0)
    c = float(c0)
    for v in np.asarray(x, dtype=np.float64).tolist():
        y = v - c
        tt = s + y
        c = (tt - s) - y
        s = tt
    return s, c


_SERIES_SWITCH = 1.0


def filon_sweep(va, vc, center, fa, fb, fc, omegas, out):
    """Filon quadrature of piecewise-quadratic data against exp(-i*omega*u).

    Panel j has nodes center[j] + (va[j], 0, vc[j]) with values (fa, fb, fc);
    out[m] = sum_j integral over the panel of q_j(u) * exp(-i*omegas[m]*u).
    """
    da = fa - fb
    dc = fc - fb
    gam = (dc / vc - da / va) / (vc - va)
    bet = da / va - gam * va
    vmax = np.maximum(np.abs(va), vc)
    d1 = vc - va
    d2 = vc * vc - va * va
    d3 = vc ** 3 - va ** 3
    base0 = fb * d1 + bet * d2 / 2.0 + gam * d3 / 3.0
    for m in range(omegas.shape[0]):
        w = float(omegas[m])
        if w == 0.0:
            out[m] = complex(base0.sum(), 0.0)
            continue
        x = np.abs(w) * vmax
        small = x <= _SERIES_SWITCH
        res = np.empty(va.shape[0], dtype=np.complex128)
        if small.any():
            res[small] = _series_panel(va[small], vc[small], fb[small], bet[small], gam[small], w)
        big = ~small
        if big.any():
            res[big] = _closed_panel(va[big], vc[big], fb[big], bet[big], gam[big], w)
        res *= np.exp(-1j * w * center)
        out[m] = res.sum()


def _series_terms(x):
    # smallest M with x**M / M! below 1e-17 (x <= 1 here)
    m, term = 0, 1.0
    while term >= 1e-17:
        m += 1
        term *= x / m
    return m


def _series_panel(va, vc, fb, bet, gam, w):
    # sum_m (-i w)^m / m! * [fb D(m+1)/(m+1) + bet D(m+2)/(m+2) + gam D(m+3)/(m+3)],
    # D(p) = vc**p - va**p
    nterms = _series_terms(abs(w) * float(np.max(np.maximum(np.abs(va), vc))))
    pa = [np.ones_like(va)]
    pc = [np.ones_like(vc)]
    for _ in range(nterms + 3):
        pa.append(pa[-1] * va)
        pc.append(pc[-1] * vc)
    re = np.zeros(va.shape[0])
    im = np.zeros(va.shape[0])
    coef = 1.0
    for m in range(nterms + 1):
        term = (fb * ((pc[m + 1] - pa[m + 1]) / (m + 1))
                + bet * ((pc[m + 2] - pa[m + 2]) / (m + 2))
                + gam * ((pc[m + 3] - pa[m + 3]) / (m + 3)))
        r = m % 4
        if r == 0:
            re += coef * term
        elif r == 1:
            im -= coef * term
        elif r == 2:
            re -= coef * term
        else:
            im += coef * term
        coef *= w / (m + 1)
    return re + 1j * im


def _closed_panel(va, vc, fb, bet, gam, w):
    a = -1j * w
    ec = np.exp(a * vc)
    ea = np.exp(a * va)
    mu0 = (ec - ea) / a
    mu1 = (vc * ec - va * ea) / a - mu0 / a
    mu2 = (vc * vc * ec - va * va * ea) / a - 2.0 * mu1 / a
    return fb * mu0 + bet * mu1 + gam * mu2


def dirichlet_one_convolve(prev, out):
    """out[n] = sum_{m | n} prev[m] for 1 <= n < len(prev); index 0 unused."""
    n = prev.shape[0]
    out[:] = 0
    for m in range(1, n):
        v = prev[m]
        if v:
            out[m::m] += v


_CRC_POLY = 0xC96C5795D7870F42
_CRC_TABLE = []
for _i in range(256):
    _c = _i
    for _ in range(8):
        _c = (_c >> 1) ^ _CRC_POLY if _c & 1 else _c >> 1
    _CRC_TABLE.append(_c)
del _i, _c


def crc64(data, crc=0):
    """CRC-64/XZ (ECMA-182 polynomial, reflected, init/xorout all ones)."""
    table = _CRC_TABLE
    c = crc ^ 0xFFFFFFFFFFFFFFFF
    for b in bytes(data):
        c = table[(c ^ b) & 0xFF] ^ (c >> 8)
    return c ^ 0xFFFFFFFFFFFFFFFF
