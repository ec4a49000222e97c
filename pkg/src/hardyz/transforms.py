"""Mellin and Laplace transforms of powers of Z(x) over a sampled grid.

Oscillatory integrals are evaluated by Filon quadrature: on each Simpson
panel the non-oscillatory factor is replaced by its quadratic interpolant and
integrated exactly against exp(-i*omega*u). For Mellin transforms u = log x
and the factor is Z^k(x) x^(1-sigma); for Laplace transforms u = x and the
factor is Z^k(x) exp(-sigma*x).
"""
from __future__ import annotations

import concurrent.futures
import functools
import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import (ConfigurationError, ConvergenceError, CoverageError, DomainError,
                     PreconditionError)
from .moments import (A4_LEADING, CumulativeSeries, MomentPolynomial, ZSampleGrid, build_grid,
                      default_threads, max_admissible_step)
from .special import DEFAULT_CONFIG, EULER_GAMMA, EvalConfig, hardy_Z_array, log_gamma

GEOMETRIC = "geometric_extrapolation"
ANALYTIC = "analytic_bound"
TAIL_MODES = (GEOMETRIC, ANALYTIC)

HEAD_STEP = 1e-3
PARSEVAL_T_STEP = 0.25
INVERSION_T_STEP = 0.1


def convergence_floor(k: int) -> float:
    """Smallest admissible Re s for M_k at desk scale: 1, 1, 5/4, 3/2, 7/4."""
    if not 1 <= k <= 5:
        raise ConfigurationError("k must be one of 1..5")
    return max(1.0, 1.0 + (k - 2) / 4.0)


@dataclass(frozen=True)
class TruncationSpec:
    x_max: float
    t_max: float
    tail_estimate_mode: str = GEOMETRIC

    def __post_init__(self):
        if not self.x_max >= 10:
            raise ConfigurationError("x_max must be >= 10")
        if not self.t_max >= 10:
            raise ConfigurationError("t_max must be >= 10")
        if self.tail_estimate_mode not in TAIL_MODES:
            raise ConfigurationError(f"tail_estimate_mode must be one of {TAIL_MODES}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TransformValue:
    value: complex
    tail_bound: float
    spec: TruncationSpec
    x_used: float

    def to_json(self) -> str:
        return json.dumps({
            "value": [self.value.real, self.value.imag],
            "tail_bound": self.tail_bound,
            "x_used": self.x_used,
            "spec": self.spec.to_dict(),
        }, sort_keys=True)


# ----------------------------------------------------------------------------
# quadrature helpers


def simpson(y: np.ndarray, h: float) -> float:
    """Composite Simpson over an odd number of equally spaced samples."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape[0] < 3 or y.shape[0] % 2 == 0:
        raise PreconditionError("Simpson needs an odd number (>= 3) of samples")
    sums, _ = kernels.simpson_cumsum(y, h, 0.0, 0.0)
    return float(sums[-1])


def simpson_complex(y: np.ndarray, h: float) -> complex:
    return complex(simpson(y.real, h), simpson(y.imag, h))


def filon(u: np.ndarray, F: np.ndarray, omegas: Sequence[float],
          threads: int | None = None) -> np.ndarray:
    """integral of F(u) exp(-i omega u) du over [u[0], u[-1]] for each omega.

    ``u`` must hold an odd number of increasing nodes; consecutive triples
    form the panels.
    """
    u = np.asarray(u, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    if u.shape[0] < 3 or u.shape[0] % 2 == 0 or F.shape != u.shape:
        raise PreconditionError("Filon needs matching arrays with an odd number (>= 3) of nodes")
    center = np.ascontiguousarray(u[1::2])
    va = np.ascontiguousarray(u[0:-2:2] - center)
    vc = np.ascontiguousarray(u[2::2] - center)
    fa = np.ascontiguousarray(F[0:-2:2])
    fb = np.ascontiguousarray(F[1::2])
    fc = np.ascontiguousarray(F[2::2])
    om = np.ascontiguousarray(omegas, dtype=np.float64)
    out = np.empty(om.shape[0], dtype=np.complex128)
    threads = threads or default_threads()
    if threads <= 1 or om.shape[0] < 2 * threads:
        kernels.filon_sweep(va, vc, center, fa, fb, fc, om, out)
        return out
    # disjoint omega blocks; each output slot is written by exactly one block
    bounds = np.linspace(0, om.shape[0], threads + 1).astype(int)

    def run(i):
        a, b = bounds[i], bounds[i + 1]
        kernels.filon_sweep(va, vc, center, fa, fb, fc, om[a:b], out[a:b])

    with concurrent.futures.ThreadPoolExecutor(threads) as pool:
        list(pool.map(run, range(threads)))
    return out


def _check_sigma(k: int, sigma: float):
    floor = convergence_floor(k)
    if not sigma > floor:
        raise ConvergenceError(f"sigma = {sigma} is at or below the convergence floor {floor} for k = {k}")


def _span(grid: ZSampleGrid, lo: float, hi: float) -> tuple[int, int]:
    """Grid indices (i, j), j - i even and positive, with t_i = lo and t_j the last point <= hi."""
    i = int(round((lo - grid.t_min) / grid.step))
    if i < 0 or abs(grid.t_min + grid.step * i - lo) > 1e-9 * max(1.0, lo):
        raise PreconditionError(f"x = {lo} is not a grid point")
    if grid.t_last < hi * (1 - 1e-12):
        raise CoverageError(f"grid ends at {grid.t_last:g}, below the requested cutoff {hi:g}")
    j = min(int(math.floor((hi - grid.t_min) / grid.step + 1e-9)), grid.n - 1)
    if (j - i) % 2:
        j -= 1
    if j - i < 2:
        raise CoverageError("cutoff leaves no complete panel")
    return i, j


def _local_abs_mean(grid: ZSampleGrid, k: int, lo: float, hi: float) -> float:
    a, b = _span(grid, grid.t_min, hi)
    a = max(a, int((lo - grid.t_min) / grid.step))
    return float(np.mean(np.abs(grid.values[a:b + 1]) ** k))


def _mellin_pieces(k: int, sigma: float, grid: ZSampleGrid, x_lo: float, x_hi: float):
    i, j = _span(grid, x_lo, x_hi)
    x = grid.t[i:j + 1]
    F = grid.values[i:j + 1] ** k * x ** (1.0 - sigma)
    return np.log(x), F, float(x[-1])


def _dyadic_tail(blocks: Sequence[float], sigma: float, mode: str, analytic: float) -> float:
    if mode == ANALYTIC:
        return analytic
    b1, b2, b3 = blocks
    floor_ratio = 2.0 ** (1.0 - sigma)
    r = max(b2 / b1 if b1 > 0 else 1.0, b3 / b2 if b2 > 0 else 1.0, floor_ratio)
    if r >= 0.9:
        return analytic
    return b3 * r / (1.0 - r)


# ----------------------------------------------------------------------------
# Mellin transform


def mellin_many(k: int, sigma: float, ts: Sequence[float], grid: ZSampleGrid, x_max: float,
                threads: int | None = None) -> tuple[np.ndarray, float]:
    """integral_1^X Z^k(x) x^(-sigma-it) dx for every t, with X the last grid node <= x_max."""
    u, F, X = _mellin_pieces(k, sigma, grid, 1.0, x_max)
    return filon(u, F, ts, threads), X


def mellin_Mk(k: int, s: complex, grid: ZSampleGrid, trunc: TruncationSpec) -> TransformValue:
    """Modified Mellin transform integral_1^x_max Z^k(x) x^(-s) dx with a tail estimate."""
    s = complex(s)
    _check_sigma(k, s.real)
    if grid.t_min != 1.0:
        raise PreconditionError("Mellin transforms need a grid starting at x = 1")
    u, F, X = _mellin_pieces(k, s.real, grid, 1.0, trunc.x_max)
    value = complex(filon(u, F, [s.imag], 1)[0])
    blocks = []
    for lo, hi in ((X / 8, X / 4), (X / 4, X / 2), (X / 2, X)):
        lo = grid.t_min + grid.step * math.ceil((lo - grid.t_min) / grid.step)
        ub, Fb, _ = _mellin_pieces(k, s.real, grid, lo, hi)
        blocks.append(abs(filon(ub, Fb, [s.imag], 1)[0]))
    m = _local_abs_mean(grid, k, X / 2, X)
    analytic = 2.0 * m * X ** (1.0 - s.real) / (s.real - 1.0)
    tail = _dyadic_tail(blocks, s.real, trunc.tail_estimate_mode, analytic)
    return TransformValue(value, float(tail), trunc, X)


def mellin_by_parts(s: float, series: CumulativeSeries, P: MomentPolynomial, x_max: float) -> float:
    """integral_1^X Z^(2m)(x) x^(-s) dx rebuilt from I_m = x P(log x) + E_m by parts.

    With m = P.k the value is
    integral_0^(log X) (P + P')(u) e^((1-s)u) du + X^(-s) E_m(X) - E_m(1) + s integral_1^X E_m x^(-s-1) dx,
    where only the E_m integral is numerical. Compare with mellin_Mk(2m, s) truncated at X.
    """
    if series.kind != "I_k" or series.k != P.k:
        raise PreconditionError("needs an I_m series and the matching moment polynomial")
    T, I = series.window(1.0, x_max)
    if T.size % 2 == 0:
        T, I = T[:-1], I[:-1]
    X = float(T[-1])
    h = float(T[1] - T[0])
    E = I - T * P(np.log(T))
    E[0] = -P.coeffs[0] if T[0] == 1.0 else E[0]
    c = list(P.coeffs)
    for j in range(1, len(c)):
        c[j - 1] += j * P.coeffs[j]
    main = _poly_exp_integral(c, 1.0 - s, math.log(X))
    rest = s * simpson(E * T ** (-s - 1.0), h)
    return main + X ** (-s) * float(E[-1]) - float(E[0]) + rest


def poly_exp_antiderivative(coeffs: Sequence[float], a: float, u: float) -> float:
    """Antiderivative of (sum_j c_j u^j) e^(a u), a != 0, vanishing at u = +inf when a < 0."""
    # integral u^j e^(au) du = e^(au) sum_{i=0}^j (-1)^i j!/(j-i)! u^(j-i) / a^(i+1)
    tot = 0.0
    for j, c in enumerate(coeffs):
        acc = 0.0
        fall = 1.0
        for i in range(j + 1):
            acc += (-1) ** i * fall * u ** (j - i) / a ** (i + 1)
            fall *= j - i
        tot += c * acc
    return tot * math.exp(a * u)


def _poly_exp_integral(coeffs: Sequence[float], a: float, U: float) -> float:
    """integral_0^U (sum_j c_j u^j) e^(a u) du in closed form (a != 0)."""
    return poly_exp_antiderivative(coeffs, a, U) - poly_exp_antiderivative(coeffs, a, 0.0)


# ----------------------------------------------------------------------------
# Laplace transforms


def _check_re_positive(s: complex):
    if not complex(s).real > 0:
        raise DomainError("Laplace transforms need Re s > 0")


def modified_laplace(k: int, s: complex, grid: ZSampleGrid, trunc: TruncationSpec) -> TransformValue:
    """integral_1^x_max Z^k(x) exp(-s x) dx with tail bound exp(-sigma X) * mean|Z|^k / sigma."""
    s = complex(s)
    _check_re_positive(s)
    if grid.t_min != 1.0:
        raise PreconditionError("the modified Laplace transform needs a grid starting at x = 1")
    i, j = _span(grid, 1.0, trunc.x_max)
    x = grid.t[i:j + 1]
    F = grid.values[i:j + 1] ** k * np.exp(-s.real * (x - 1.0))
    value = complex(filon(x - 1.0, F, [s.imag], 1)[0]) * complex(math.exp(-s.real), 0) \
        * np.exp(-1j * s.imag)
    X = float(x[-1])
    m = _local_abs_mean(grid, k, X / 2, X)
    tail = math.exp(-s.real * X) * max(m, 1.0) / s.real
    return TransformValue(complex(value), float(tail), trunc, X)


@functools.lru_cache(maxsize=4)
def _head_samples(cfg: EvalConfig) -> tuple[np.ndarray, np.ndarray]:
    n = int(round(1.0 / HEAD_STEP))
    x = np.linspace(0.0, 1.0, n + 1)
    return x, hardy_Z_array(x, cfg)


def classical_laplace(k: int, s: complex, trunc: TruncationSpec, grid: ZSampleGrid | None = None,
                      cfg: EvalConfig | None = None) -> TransformValue:
    """L_k(s) = integral_0^x_max Z^k(x) exp(-s x) dx; the [0, 1] head uses a 10^-3 Simpson grid."""
    s = complex(s)
    _check_re_positive(s)
    cfg = cfg or DEFAULT_CONFIG
    if grid is None:
        step = min(0.05, max_admissible_step(trunc.x_max))
        grid = build_grid(1.0, trunc.x_max, step, cfg)
    x, z = _head_samples(cfg)
    head = simpson_complex(z ** k * np.exp(-s * x), HEAD_STEP)
    body = modified_laplace(k, s, grid, trunc)
    return TransformValue(head + body.value, body.tail_bound, trunc, body.x_used)


def laplace_cutoff(sigma: float, digits: float = 40.0) -> float:
    """x_max making exp(-sigma x_max) negligible (exp(-digits))."""
    return max(10.0, digits / sigma)


def kober_residual(sigma: float, grid: ZSampleGrid, cfg: EvalConfig | None = None) -> float:
    """R(sigma) = L_2(2 sigma) - (gamma - log(4 pi sigma)) / (2 sin sigma)."""
    trunc = TruncationSpec(min(laplace_cutoff(2 * sigma), grid.t_last), 10.0)
    L2 = classical_laplace(2, 2 * sigma, trunc, grid, cfg).value.real
    return L2 - (EULER_GAMMA - math.log(4 * math.pi * sigma)) / (2 * math.sin(sigma))


class AtkinsonFit(NamedTuple):
    coeffs: tuple  # A, B, C, D, E: coefficients of log^4 .. log^0 of 1/sigma
    sigmas: tuple
    values: tuple  # sigma * L_4(sigma)
    rms_residual: float

    @property
    def leading(self) -> float:
        return self.coeffs[0]

    @property
    def leading_rel_error(self) -> float:
        return abs(self.coeffs[0] - A4_LEADING) / A4_LEADING


def atkinson_fit(grid: ZSampleGrid, sigmas: Sequence[float] | None = None,
                 cfg: EvalConfig | None = None) -> AtkinsonFit:
    """Quartic least-squares fit of sigma*L_4(sigma) in log(1/sigma)."""
    if sigmas is None:
        sigmas = np.geomspace(0.005, 0.05, 25)
    sig = np.asarray(sigmas, dtype=np.float64)
    vals = []
    for sg in sig:
        trunc = TruncationSpec(min(laplace_cutoff(sg), grid.t_last), 10.0)
        if trunc.x_max < laplace_cutoff(sg) * (1 - 1e-12):
            raise CoverageError(f"grid too short for sigma = {sg}")
        vals.append(sg * classical_laplace(4, sg, trunc, grid, cfg).value.real)
    vals = np.array(vals)
    L = np.log(1.0 / sig)
    poly = np.polynomial.Polynomial.fit(L, vals, 4).convert()
    c = list(poly.coef) + [0.0] * (5 - len(poly.coef))
    resid = vals - poly(L)
    return AtkinsonFit(tuple(float(v) for v in c[::-1]), tuple(sig.tolist()), tuple(vals.tolist()),
                       float(np.sqrt(np.mean(resid**2))))


# ----------------------------------------------------------------------------
# Parseval / mean-square sides


class ParsevalSides(NamedTuple):
    lhs: float
    rhs: float
    budgets: dict
    x_used: float


def stationary_x(t: float) -> float:
    """x solving (x/2) log(x / 2 pi) = t, where Z(x) x^(-it) has a stationary phase."""
    x = max(2 * t / max(math.log(max(t, 10.0) / math.pi), 1.0), 2 * math.pi * math.e)
    for _ in range(60):
        f = 0.5 * x * math.log(x / (2 * math.pi)) - t
        fp = 0.5 * math.log(x / (2 * math.pi)) + 0.5
        x = max(x - f / fp, 2 * math.pi * 1.0001)
    return x


def spectral_integral(k: int, sigma: float, grid: ZSampleGrid, trunc: TruncationSpec,
                      t_step: float = PARSEVAL_T_STEP, threads: int | None = None,
                      weight=None) -> dict:
    """(1/pi) integral_0^t_max w(t) |M_k,X(sigma+it)|^2 dt at step t_step and t_step/2.

    M_k,X is truncated at X = x_max. Returns both Simpson values plus the
    endpoint-tail estimate for t > t_max.
    """
    n = int(math.ceil(trunc.t_max / t_step))
    n += n % 2
    fine = np.linspace(0.0, n * t_step, 2 * n + 1)
    M, X = mellin_many(k, sigma, fine, grid, trunc.x_max, threads)
    y = np.abs(M) ** 2
    if weight is not None:
        y = y * weight(fine)
    coarse = simpson(y[::2], t_step) / math.pi
    refined = simpson(y, t_step / 2) / math.pi
    f1 = float(grid.values[0]) ** k
    fX = float(grid.values[grid.index_of(X)]) ** k * X ** (1 - sigma)
    t_end = float(fine[-1])
    endpoint = (f1 * f1 + fX * fX) / (math.pi * t_end) if weight is None else 0.0
    return {"coarse": coarse, "fine": refined, "endpoint_tail": endpoint, "t_end": t_end, "X": X}


def direct_x_integral(k: int, sigma: float, grid: ZSampleGrid, x_lo: float, x_hi: float) -> float:
    """integral_{x_lo}^{x_hi} Z^(2k)(x) x^(1 - 2 sigma) dx by Simpson on the grid."""
    i, j = _span(grid, x_lo, x_hi)
    x = grid.t[i:j + 1]
    return simpson(grid.values[i:j + 1] ** (2 * k) * x ** (1 - 2 * sigma), grid.step)


def _x_tail(k: int, sigma: float, grid: ZSampleGrid, X: float) -> float:
    m = _local_abs_mean(grid, 2 * k, X / 2, X)
    return 2.0 * m * X ** (2 - 2 * sigma) / (2 * sigma - 2)


def parseval_sides(k: int, sigma: float, grid: ZSampleGrid, trunc: TruncationSpec,
                   t_step: float = PARSEVAL_T_STEP, threads: int | None = None) -> ParsevalSides:
    """(1/pi) integral_0^inf |M_k(sigma+it)|^2 dt against integral_1^inf Z^(2k) x^(1-2 sigma) dx."""
    floor = convergence_floor(k) + 0.5
    if not sigma > floor - 1e-12:
        raise ConvergenceError(f"sigma = {sigma} must exceed {floor} for k = {k}")
    if grid.t_min != 1.0:
        raise PreconditionError("needs a grid starting at x = 1")
    spec = spectral_integral(k, sigma, grid, trunc, t_step, threads)
    X = spec["X"]
    x_t = stationary_x(spec["t_end"])
    missing = direct_x_integral(k, sigma, grid, _grid_ceil(grid, x_t), X) if x_t < X / 1.5 else 0.0
    x_tail = _x_tail(k, sigma, grid, X)
    lhs_X = spec["fine"] + spec["endpoint_tail"] + missing
    rhs_X = direct_x_integral(k, sigma, grid, 1.0, X)
    budgets = {
        "t_quadrature": abs(spec["fine"] - spec["coarse"]),
        "t_tail": 0.5 * (spec["endpoint_tail"] + missing),
        "x_tail": x_tail,
    }
    return ParsevalSides(lhs_X + x_tail, rhs_X + x_tail, budgets, X)


def _grid_ceil(grid: ZSampleGrid, x: float) -> float:
    i = int(math.ceil((x - grid.t_min) / grid.step))
    i += i % 2
    return grid.t_min + grid.step * i


class LadderRow(NamedTuple):
    T: float
    lhs: float
    bound: float


def lemma3_ladder(grid: ZSampleGrid, sigma: float = 1.0, a: float = 2.0, b: float = 100.0,
                  ladder: Sequence[float] = (5, 10, 20, 40, 80, 160, 320),
                  t_step: float = 0.125) -> list[LadderRow]:
    """integral_0^T |integral_a^b Z(x) x^(-s) dx|^2 dt against 2 pi integral_a^b Z^2 x^(1-2 sigma) dx."""
    i, j = _span(grid, a, b)
    x = grid.t[i:j + 1]
    g = grid.values[i:j + 1]
    bound = 2 * math.pi * simpson(g * g * x ** (1 - 2 * sigma), grid.step)
    T_top = max(ladder)
    n = int(math.ceil(T_top / t_step))
    n += n % 2
    ts = np.linspace(0.0, n * t_step, n + 1)
    y = np.abs(filon(np.log(x), g * x ** (1 - sigma), ts)) ** 2
    sums, _ = kernels.simpson_cumsum(np.ascontiguousarray(y), t_step, 0.0, 0.0)
    nodes = ts[::2]
    return [LadderRow(float(T), float(np.interp(T, nodes, sums)), bound) for T in sorted(ladder)]


# ----------------------------------------------------------------------------
# Mellin inversion


class InversionResult(NamedTuple):
    value: float
    imag: float
    U: float
    X: float


def mellin_invert_Zk(k: int, x: float, c: float, U: float, grid: ZSampleGrid, trunc: TruncationSpec,
                     t_step: float = INVERSION_T_STEP, threads: int | None = None) -> InversionResult:
    """(1/2 pi i) integral_{c-iU}^{c+iU} x^(s-1) M_k(s) ds by Simpson along the segment."""
    _check_sigma(k, c)
    if not x > 1:
        raise DomainError("inversion needs x > 1")
    if U < x:
        raise PreconditionError("U must be at least x")
    n = int(math.ceil(U / t_step))
    ts = np.linspace(-U, U, 2 * n + 1)
    M, X = mellin_many(k, c, ts, grid, trunc.x_max, threads)
    integrand = x ** (c - 1.0) * np.exp(1j * ts * math.log(x)) * M
    total = simpson_complex(integrand, ts[1] - ts[0]) / (2 * math.pi)
    return InversionResult(total.real, total.imag, U, X)


# ----------------------------------------------------------------------------
# Gamma relation between the Laplace and Mellin transforms


class GammaRelation(NamedTuple):
    mellin_side: float
    laplace_side: float
    lower: float
    laplace_tail: float


def _laplace_real_many(k: int, vs: np.ndarray, grid: ZSampleGrid) -> np.ndarray:
    """integral_1^X Z^k(y) exp(-v y) dy for real v, by Simpson on the grid."""
    x = grid.t
    n = x.shape[0] if x.shape[0] % 2 else x.shape[0] - 1
    x, f = x[:n], grid.values[:n] ** k
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    wf = w * f * grid.step / 3.0
    out = np.empty(vs.shape[0])
    for i, v in enumerate(vs):
        out[i] = float(np.dot(wf, np.exp(-v * (x - 1.0)))) * math.exp(-v)
    return out


def gamma_relation_sides(k: int, s: float, grid: ZSampleGrid, trunc: TruncationSpec,
                         lower: float = 1.0, nodes_per_unit: int = 40) -> GammaRelation:
    """Gamma(s) M_k(s) against integral_lower^inf L_k(1/x) x^(-1-s) dx for real s.

    With v = 1/x the Laplace side is integral_0^(1/lower) L_k(v) v^(s-1) dv
    (lower = 0 means the whole half-line).
    """
    s = float(s)
    mel = mellin_Mk(k, s, grid, trunc)
    gs = math.exp(log_gamma(complex(s)).real)
    v_min = 40.0 / grid.t_last
    v_max = 40.0 if lower == 0 else 1.0 / lower
    n = int(math.ceil(math.log(v_max / v_min) * nodes_per_unit))
    n += n % 2
    lv = np.linspace(math.log(v_min), math.log(v_max), n + 1)
    v = np.exp(lv)
    L = _laplace_real_many(k, v, grid)
    side = simpson(L * v ** s, lv[1] - lv[0])
    # below v_min the transform grows at most like v^-1 log^(k^2) (1/v)
    tail = abs(L[0]) * v_min ** s / s
    return GammaRelation(gs * mel.value.real, side, lower, tail)


def laplace_spectral_sides(k: int, sigma: float, grid: ZSampleGrid, trunc: TruncationSpec,
                           experimental: bool = False) -> tuple[float, float]:
    """Both sides of the Gamma-weighted mean-square relation (experimental).

    integral_1^inf L_k(1/x)^2 x^(-1-2 sigma) dx against
    (1/pi) integral_0^inf |Gamma(sigma+it)|^2 |M_k(sigma+it)|^2 dt.
    """
    if not experimental:
        raise ConfigurationError("this comparison has no established range of validity; "
                                 "pass experimental=True to run it")
    _check_sigma(k, sigma)
    v_min = 40.0 / grid.t_last
    n = int(math.ceil(math.log(1.0 / v_min) * 40))
    n += n % 2
    lv = np.linspace(math.log(v_min), 0.0, n + 1)
    v = np.exp(lv)
    L = _laplace_real_many(k, v, grid)
    left = simpson(L * L * v ** (2 * sigma), lv[1] - lv[0])

    def gamma_sq(t):
        return np.exp(2 * log_gamma(sigma + 1j * np.asarray(t)).real)

    spec = spectral_integral(k, sigma, grid, TruncationSpec(trunc.x_max, 40.0), 0.05,
                             weight=gamma_sq)
    return left, spec["fine"]
