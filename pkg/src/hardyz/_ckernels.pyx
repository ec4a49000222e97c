# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; see ``_pykernels`` for the reference semantics."""
from libc.math cimport cos, sin, fabs, exp
from libc.stdint cimport uint64_t, int64_t
import numpy as np

NAME = "cython"


def rs_main_sum(const double[::1] t, const double[::1] theta, const int64_t[::1] nterms,
                const double[::1] logn, const double[::1] rsqrt, double[::1] out):
    cdef Py_ssize_t i, n, m = t.shape[0]
    cdef double acc, ti, th
    with nogil:
        for i in range(m):
            acc = 0.0
            ti = t[i]
            th = theta[i]
            for n in range(1, nterms[i] + 1):
                acc = acc + rsqrt[n] * cos(th - ti * logn[n])
            out[i] = 2.0 * acc


def simpson_cumsum(const double[::1] f, double h, double s0, double c0):
    cdef Py_ssize_t npan = (f.shape[0] - 1) // 2
    sums_arr = np.empty(npan + 1)
    comps_arr = np.empty(npan + 1)
    cdef double[::1] sums = sums_arr
    cdef double[::1] comps = comps_arr
    cdef double s = s0, c = c0, p, y, tt, w = h / 3.0
    cdef Py_ssize_t j
    sums[0] = s
    comps[0] = c
    with nogil:
        for j in range(npan):
            p = w * (f[2 * j] + 4.0 * f[2 * j + 1] + f[2 * j + 2])
            y = p - c
            tt = s + y
            c = (tt - s) - y
            s = tt
            sums[j + 1] = s
            comps[j + 1] = c
    return sums_arr, comps_arr


def kahan_sum(x, double s0, double c0):
    cdef const double[::1] v = np.ascontiguousarray(x, dtype=np.float64)
    cdef double s = s0, c = c0, y, tt
    cdef Py_ssize_t i
    with nogil:
        for i in range(v.shape[0]):
            y = v[i] - c
            tt = s + y
            c = (tt - s) - y
            s = tt
    return s, c


cdef inline void _series(double va, double vc, double fb, double bet, double gam,
                         double w, double* re, double* im) noexcept nogil:
    cdef double x = fabs(w) * (fabs(va) if fabs(va) > vc else vc)
    cdef int nterms = 0
    cdef double tmp = 1.0
    while tmp >= 1e-17:
        nterms += 1
        tmp *= x / nterms
    cdef double pa1 = va, pc1 = vc
    cdef double pa2 = va * va, pc2 = vc * vc
    cdef double pa3 = pa2 * va, pc3 = pc2 * vc
    cdef double coef = 1.0, term, r = 0.0, i = 0.0
    cdef int m
    for m in range(nterms + 1):
        term = (fb * ((pc1 - pa1) / (m + 1)) + bet * ((pc2 - pa2) / (m + 2))
                + gam * ((pc3 - pa3) / (m + 3)))
        if m % 4 == 0:
            r += coef * term
        elif m % 4 == 1:
            i -= coef * term
        elif m % 4 == 2:
            r -= coef * term
        else:
            i += coef * term
        coef *= w / (m + 1)
        pa1 = pa2
        pc1 = pc2
        pa2 = pa3
        pc2 = pc3
        pa3 = pa3 * va
        pc3 = pc3 * vc
    re[0] = r
    im[0] = i


def filon_sweep(const double[::1] va, const double[::1] vc, const double[::1] center,
                const double[::1] fa, const double[::1] fb, const double[::1] fc,
                const double[::1] omegas, double complex[::1] out):
    cdef Py_ssize_t j, m, npan = va.shape[0]
    cdef double w, da, dc, gam, bet, vmax, re, im, ph, cr, ci
    cdef double ecr, eci, ear, eai, ar, mu0r, mu0i, mu1r, mu1i, mu2r, mu2i, tr, ti
    cdef double sr, si
    with nogil:
        for m in range(omegas.shape[0]):
            w = omegas[m]
            sr = 0.0
            si = 0.0
            for j in range(npan):
                da = fa[j] - fb[j]
                dc = fc[j] - fb[j]
                gam = (dc / vc[j] - da / va[j]) / (vc[j] - va[j])
                bet = da / va[j] - gam * va[j]
                vmax = fabs(va[j]) if fabs(va[j]) > vc[j] else vc[j]
                if w == 0.0:
                    re = (fb[j] * (vc[j] - va[j]) + bet * (vc[j] * vc[j] - va[j] * va[j]) / 2.0
                          + gam * (vc[j] * vc[j] * vc[j] - va[j] * va[j] * va[j]) / 3.0)
                    sr = sr + re
                    continue
                if fabs(w) * vmax <= 1.0:
                    _series(va[j], vc[j], fb[j], bet, gam, w, &re, &im)
                else:
                    # a = -i w; mu_j = [v^j e^{a v}]/a - (j/a) mu_{j-1}; 1/a = i/w
                    ecr = cos(w * vc[j])
                    eci = -sin(w * vc[j])
                    ear = cos(w * va[j])
                    eai = -sin(w * va[j])
                    ar = 1.0 / w
                    # z / a = i*z/w
                    mu0r = -(eci - eai) * ar
                    mu0i = (ecr - ear) * ar
                    tr = vc[j] * ecr - va[j] * ear
                    ti = vc[j] * eci - va[j] * eai
                    mu1r = -ti * ar - (-mu0i * ar)
                    mu1i = tr * ar - (mu0r * ar)
                    tr = vc[j] * vc[j] * ecr - va[j] * va[j] * ear
                    ti = vc[j] * vc[j] * eci - va[j] * va[j] * eai
                    mu2r = -ti * ar - 2.0 * (-mu1i * ar)
                    mu2i = tr * ar - 2.0 * (mu1r * ar)
                    re = fb[j] * mu0r + bet * mu1r + gam * mu2r
                    im = fb[j] * mu0i + bet * mu1i + gam * mu2i
                ph = w * center[j]
                cr = cos(ph)
                ci = -sin(ph)
                sr = sr + (re * cr - im * ci)
                si = si + (re * ci + im * cr)
            out[m] = sr + 1j * si


def dirichlet_one_convolve(const int64_t[::1] prev, int64_t[::1] out):
    cdef Py_ssize_t n = prev.shape[0], m, j
    cdef int64_t v
    with nogil:
        for j in range(n):
            out[j] = 0
        for m in range(1, n):
            v = prev[m]
            if v:
                j = m
                while j < n:
                    out[j] += v
                    j += m


cdef uint64_t _TABLE[256]


cdef void _init_table() noexcept:
    cdef uint64_t c
    cdef int i, k
    for i in range(256):
        c = i
        for k in range(8):
            if c & 1:
                c = (c >> 1) ^ 0xC96C5795D7870F42ULL
            else:
                c = c >> 1
        _TABLE[i] = c


_init_table()


def crc64(data, uint64_t crc=0):
    cdef const unsigned char[::1] buf = memoryview(data).cast("B")
    cdef uint64_t c = crc ^ 0xFFFFFFFFFFFFFFFFULL
    cdef Py_ssize_t i
    with nogil:
        for i in range(buf.shape[0]):
            c = _TABLE[(c ^ buf[i]) & 0xFF] ^ (c >> 8)
    return c ^ 0xFFFFFFFFFFFFFFFFULL
