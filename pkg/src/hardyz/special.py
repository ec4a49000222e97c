"""Foundation evaluators: log-Gamma, theta, chi, zeta, Hardy's Z and d_k(n).

Two evaluation routes for Z(t) are provided and selected by :class:`EvalConfig`:

* ``euler_maclaurin_oracle`` -- zeta(1/2 + it) by Euler-Maclaurin summation with
  double-double phases and exactly rounded accumulation, rotated by exp(i theta).
  Its truncation error is bounded a priori and kept below ``target_abs_error``.
* ``riemann_siegel_fast`` -- the Riemann-Siegel main sum plus up to four
  correction terms C_0..C_3, vectorized over t. Below t = 10 it falls back to
  the oracle.
"""
from __future__ import annotations

import cmath
import dataclasses
import functools
import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import _dd, kernels
from ._rs_tables import RS_COEFFS
from .errors import DomainError, PoleError, PrecisionError, RangeError, ConfigurationError

EULER_GAMMA = 0.57721566490153286061
LOG_2PI = math.log(2.0 * math.pi)
LOG_PI = math.log(math.pi)
HALF_LOG_2PI = 0.5 * LOG_2PI

FAST_SWITCHOVER_T = 10.0
MAX_ABS_T = 1.0e6
ORACLE = "euler_maclaurin_oracle"
FAST = "riemann_siegel_fast"


@functools.lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2) as an exact fraction."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    # Akiyama-Tanigawa yields B_1 = +1/2
    return -a[0] if n == 1 else a[0]


@dataclass(frozen=True)
class EvalConfig:
    """Precision and method policy for evaluating zeta and Z."""

    method: str = FAST
    target_abs_error: float = 1e-10
    rs_correction_terms: int = 4
    em_terms: int = 20

    def __post_init__(self):
        if self.method not in (ORACLE, FAST):
            raise ConfigurationError(f"unknown method {self.method!r}")
        if not (self.target_abs_error > 0 and math.isfinite(self.target_abs_error)):
            raise ConfigurationError("target_abs_error must be positive and finite")
        if not (0 <= self.rs_correction_terms <= 4):
            raise ConfigurationError("rs_correction_terms must lie in 0..4")
        if self.em_terms < 10:
            raise ConfigurationError("em_terms must be at least 10")

    def fingerprint(self) -> str:
        """Stable hex digest of the fields plus the kernel backend in use."""
        payload = dataclasses.asdict(self)
        payload["kernel_backend"] = kernels.BACKEND
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def em_remainder_bound(self, s: complex, n: int) -> float:
        """Standard bound on the Euler-Maclaurin remainder after ``em_terms`` corrections."""
        return math.exp(_em_log_bound(complex(s), self.em_terms, n))


DEFAULT_CONFIG = EvalConfig()
ORACLE_CONFIG = EvalConfig(method=ORACLE)


# ----------------------------------------------------------------------------
# log Gamma

_STIRLING_R = 15.0
_STIRLING_COEFFS = [float(bernoulli(2 * k)) / (2 * k * (2 * k - 1)) for k in range(1, 11)]


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex scalars or arrays.

    Recurrence-shifted Stirling series; continuous off the negative real axis.
    """
    arr = np.asarray(z, dtype=np.complex128)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    bad = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if bad.any():
        raise PoleError(f"log_gamma has a pole at {arr[bad][0].real:g}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("log_gamma argument must be finite")
    r2 = _STIRLING_R * _STIRLING_R
    reach = np.sqrt(np.maximum(r2 - arr.imag**2, 0.0))
    shift = np.where(np.abs(arr) < _STIRLING_R, np.ceil(reach - arr.real), 0.0)
    shift = np.maximum(shift, 0.0).astype(np.int64)
    acc = np.zeros_like(arr)
    top = int(shift.max()) if shift.size else 0
    for k in range(top):
        m = shift > k
        acc[m] += np.log(arr[m] + k)
    w = arr + shift
    res = (w - 0.5) * np.log(w) - w + HALF_LOG_2PI
    winv = 1.0 / w
    w2 = winv * winv
    series = np.zeros_like(w)
    for c in reversed(_STIRLING_COEFFS):
        series = series * w2 + c
    res = res + series * winv - acc
    return complex(res[0]) if scalar else res


def theta(t):
    """Riemann-Siegel theta: continuous arg of pi^(-it/2) Gamma(1/4 + it/2), theta(0) = 0."""
    arr = np.asarray(t, dtype=np.float64)
    lg = log_gamma(0.25 + 0.5j * np.atleast_1d(arr))
    out = lg.imag - 0.5 * np.atleast_1d(arr) * LOG_PI
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


# ----------------------------------------------------------------------------
# chi


def _log_sin(w: complex) -> complex:
    # log sin w modulo 2*pi*i, overflow-free for large |Im w|
    if w.imag >= 0:
        return -1j * w + cmath.log(1j / 2) + cmath.log(1 - cmath.exp(2j * w))
    return 1j * w + cmath.log(-1j / 2) + cmath.log(1 - cmath.exp(-2j * w))


def _log_cos(w: complex) -> complex:
    return _log_sin(w + math.pi / 2)


def chi(s) -> complex:
    """Functional-equation factor chi(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s)."""
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise DomainError("chi argument must be finite")
    if s.imag == 0 and s.real == round(s.real):
        n = int(round(s.real))
        if n >= 1 and n % 2 == 1:
            raise PoleError(f"chi has a pole at s = {n}")
        if n <= 0 and n % 2 == 0:
            return 0j
    if s.real > 0.5:
        # reflected form: sin(pi s/2) Gamma(1-s) = pi / (2 cos(pi s/2) Gamma(s))
        lg = s * LOG_2PI - math.log(2.0) - _log_cos(math.pi * s / 2) - log_gamma(s)
    else:
        lg = s * math.log(2.0) + (s - 1) * LOG_PI + _log_sin(math.pi * s / 2) + log_gamma(1 - s)
    return cmath.exp(lg)


# ----------------------------------------------------------------------------
# zeta oracle


@functools.lru_cache(maxsize=None)
def _bernoulli_floats(m: int) -> tuple:
    return tuple(float(bernoulli(2 * k)) / math.factorial(2 * k) for k in range(1, m + 2))


def _em_log_bound(s: complex, m: int, n: int) -> float:
    sigma = s.real
    expo = sigma + 2 * m + 1
    if expo <= 0:
        return math.inf
    log_poch = sum(math.log(abs(s + j)) if s + j != 0 else -math.inf for j in range(2 * m + 2))
    b = abs(_bernoulli_floats(m)[m])  # |B_{2m+2}| / (2m+2)!
    return log_poch + math.log(b) - math.log(expo) - expo * math.log(n)


def _em_cutoff(s: complex, m: int, target: float) -> int:
    sigma = s.real
    expo = sigma + 2 * m + 1
    if expo <= 0:
        raise PrecisionError(f"Euler-Maclaurin depth {m} cannot reach sigma = {sigma}")
    lb = _em_log_bound(s, m, 1)
    n = max(2, math.ceil(math.exp((lb - math.log(0.5 * target)) / expo)))
    while _em_log_bound(s, m, n) > math.log(0.5 * target):
        n += 1
    return n


_EM_MAX_N = 5_000_000
_EPS = 2.0**-52


def _npow_neg_s(sigma: float, t: float, n_max: int):
    """n^{-s} for n = 1..n_max-1 as (real, imag) arrays, phases in double-double."""
    hi, _ = _dd.log_table(n_max)
    mag = np.exp(-sigma * hi[1:n_max])
    ph = _dd.phase_tlogn(t, n_max)
    return mag * np.cos(ph), -mag * np.sin(ph)


def zeta_oracle(s, cfg: EvalConfig | None = None) -> complex:
    """Riemann zeta by Euler-Maclaurin with an a priori remainder bound.

    Raises PoleError at s = 1 and PrecisionError when the configured depth
    cannot certify ``cfg.target_abs_error``.
    """
    cfg = cfg or DEFAULT_CONFIG
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if abs(s.imag) > MAX_ABS_T or not math.isfinite(s.real):
        raise DomainError(f"|Im s| must not exceed {MAX_ABS_T:g}")
    m = cfg.em_terms
    n = _em_cutoff(s, m, cfg.target_abs_error)
    if n > _EM_MAX_N:
        raise PrecisionError(
            f"Euler-Maclaurin needs N = {n} > {_EM_MAX_N} terms for target "
            f"{cfg.target_abs_error:g} at s = {s}; raise em_terms")
    sigma, t = s.real, s.imag
    pr, pi_ = _npow_neg_s(sigma, t, n + 1)
    head_re = math.fsum(pr[:-1].tolist())
    head_im = math.fsum(pi_[:-1].tolist())
    nmag_sum = float(np.sum(np.hypot(pr, pi_)))
    if 8 * _EPS * nmag_sum > cfg.target_abs_error:
        raise PrecisionError(
            f"rounding estimate {8 * _EPS * nmag_sum:.2e} exceeds target {cfg.target_abs_error:g}")
    ns = complex(pr[-1], pi_[-1])  # N^{-s}
    tail = n * ns / (s - 1) + 0.5 * ns
    bcoef = _bernoulli_floats(m)
    term = s * ns / n  # (s)_1 N^{-s-1}
    corr_terms = []
    for k in range(1, m + 1):
        corr_terms.append(bcoef[k - 1] * term)
        term = term * (s + 2 * k - 1) * (s + 2 * k) / (n * n)
    corr_re = math.fsum([c.real for c in corr_terms] + [tail.real])
    corr_im = math.fsum([c.imag for c in corr_terms] + [tail.imag])
    return complex(head_re + corr_re, head_im + corr_im)


# ----------------------------------------------------------------------------
# Hardy's Z


class ZValue(NamedTuple):
    value: float
    method: str
    imag_residue: float


def _z_oracle(t: float, cfg: EvalConfig) -> ZValue:
    at = abs(t)
    z = cmath.exp(1j * theta(at)) * zeta_oracle(complex(0.5, at), cfg)
    return ZValue(z.real, ORACLE, z.imag)


@functools.lru_cache(maxsize=8)
def _rsqrt_table(size: int):
    n = np.arange(size + 1, dtype=np.float64)
    n[0] = 1.0
    out = 1.0 / np.sqrt(n)
    out[0] = 0.0
    out.flags.writeable = False
    return out


def rs_corrections(t, depth: int):
    """Sum of the first ``depth`` Riemann-Siegel correction terms (array in t)."""
    t = np.asarray(t, dtype=np.float64)
    tau = t / (2.0 * math.pi)
    a = np.sqrt(tau)
    n = np.floor(a)
    x = (a - n) - 0.5
    sign = np.where(n.astype(np.int64) % 2 == 1, 1.0, -1.0)
    out = np.zeros_like(t)
    scale = tau ** -0.25
    step = 1.0 / a
    x2 = x * x
    for j in range(depth):
        coeffs = RS_COEFFS[j]
        # C_0, C_2 even and C_1, C_3 odd in x
        acc = np.zeros_like(t)
        for c in reversed(coeffs[j % 2::2]):
            acc = acc * x2 + c
        if j % 2:
            acc = acc * x
        out += acc * scale
        scale = scale * step
    return sign * out


def _z_fast_sorted(t: np.ndarray, depth: int) -> np.ndarray:
    n = np.floor(np.sqrt(t / (2.0 * math.pi))).astype(np.int64)
    size = max(1024, int(n[-1]) + 1) if t.size else 1024
    size = 1 << (size - 1).bit_length()
    logn, _ = _dd.log_table(size)
    rsq = _rsqrt_table(size)
    th = np.ascontiguousarray(theta(t))
    out = np.empty_like(t)
    kernels.rs_main_sum(np.ascontiguousarray(t), th, np.ascontiguousarray(n), logn, rsq, out)
    if depth:
        out += rs_corrections(t, depth)
    return out


def hardy_Z_array(ts, cfg: EvalConfig | None = None) -> np.ndarray:
    """Z(t) on an array of ordinates; elementwise results independent of batching."""
    cfg = cfg or DEFAULT_CONFIG
    t = np.abs(np.asarray(ts, dtype=np.float64))
    if t.size and not np.all(np.isfinite(t)):
        raise DomainError("Z requires finite t")
    if t.size and t.max() > MAX_ABS_T:
        raise DomainError(f"|t| must not exceed {MAX_ABS_T:g}")
    flat = t.ravel()
    out = np.empty_like(flat)
    if cfg.method == FAST:
        fast = flat >= FAST_SWITCHOVER_T
    else:
        fast = np.zeros(flat.shape, dtype=bool)
    idx = np.nonzero(fast)[0]
    if idx.size:
        order = idx[np.argsort(flat[idx], kind="stable")]
        out[order] = _z_fast_sorted(flat[order], cfg.rs_correction_terms)
    for i in np.nonzero(~fast)[0]:
        out[i] = _z_oracle(float(flat[i]), cfg).value
    return out.reshape(t.shape)


def hardy_Z_detail(t: float, cfg: EvalConfig | None = None) -> ZValue:
    """Z(t) with the route actually used and, for the oracle, the imaginary residue."""
    cfg = cfg or DEFAULT_CONFIG
    t = float(t)
    if cfg.method == FAST and abs(t) >= FAST_SWITCHOVER_T:
        return ZValue(float(hardy_Z_array(np.array([t]), cfg)[0]), FAST, 0.0)
    return _z_oracle(t, cfg)


def hardy_Z(t: float, cfg: EvalConfig | None = None) -> float:
    return hardy_Z_detail(t, cfg).value


# ----------------------------------------------------------------------------
# divisor functions


@dataclass(frozen=True)
class DivisorTable:
    """d_k(n) for 1 <= n <= n_max; ``values[0]`` is an unused 0."""

    k: int
    n_max: int
    values: np.ndarray

    def __getitem__(self, n):
        if isinstance(n, (int, np.integer)) and not (1 <= n <= self.n_max):
            raise RangeError(f"n = {n} outside 1..{self.n_max}")
        return self.values[n]


_INT64_SAFE = float(2**62)


def divisor_table(k: int, n_max: int) -> DivisorTable:
    """Exact d_k(n) by k-1 rounds of Dirichlet convolution with the constant 1."""
    if k not in (1, 2, 3, 4, 5):
        raise DomainError("k must be one of 1..5")
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    cur = np.ones(n_max + 1, dtype=np.int64)
    cur[0] = 0
    for _ in range(k - 1):
        # d_{j+1}(n) <= sum_{m <= n} d_j(m)
        if float(cur.sum(dtype=np.float64)) >= _INT64_SAFE:
            raise RangeError(f"d_{k}(n) may overflow int64 for n_max = {n_max}")
        nxt = np.empty_like(cur)
        kernels.dirichlet_one_convolve(cur, nxt)
        cur = nxt
    cur.flags.writeable = False
    return DivisorTable(k, n_max, cur)
