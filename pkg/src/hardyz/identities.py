"""End-to-end numerical checks of the mean-square identities for M_1 and M_2,
the exponential-sum approximation of F_k(2T) - F_k(T), the V_1 series, and a
scanner for zeros and small extrema of Z(t).
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _dd
from .errors import (ConfigurationError, ConvergenceError, CoverageError, DomainError,
                     PreconditionError)
from .moments import (CumulativeSeries, MomentPolynomial, P1, ZSampleGrid, build_grid,
                      cumulative_F, cumulative_moment, e1_series, e2_series, fit_P4, g_series,
                      max_admissible_step, z_with_oracle_head)
from .special import (DEFAULT_CONFIG, EULER_GAMMA, LOG_2PI, DivisorTable, EvalConfig,
                      hardy_Z, hardy_Z_array)
from .transforms import (TruncationSpec, direct_x_integral, poly_exp_antiderivative, simpson,
                         spectral_integral, stationary_x)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
C5_EXACT = 3.0 / (8.0 * math.pi**2)


@dataclass(frozen=True)
class Tolerances:
    parseval: float = 0.02
    theorem1: float = 0.05
    theorem2: float = 0.10
    safety: float = 10.0


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class IdentityReport:
    name: str
    lhs: float
    rhs: float
    abs_diff: float
    rel_diff: float
    budgets: dict
    tolerance: float
    verdict: str
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name: str, lhs: float, rhs: float, budgets: dict, tolerance: float,
              safety: float = DEFAULT_TOLERANCES.safety, extra: dict | None = None) -> "IdentityReport":
        """Verdict: inconclusive if the budgets alone exceed the tolerance; pass if the
        relative difference is within the tolerance and within ``safety`` times the
        budgets; fail otherwise."""
        abs_diff = abs(lhs - rhs)
        scale = abs(rhs) if rhs != 0 else 1.0
        rel_diff = abs_diff / scale
        budget_rel = sum(abs(v) for v in budgets.values()) / scale
        if budget_rel > tolerance:
            verdict = INCONCLUSIVE
        elif rel_diff <= tolerance and rel_diff <= safety * budget_rel:
            verdict = PASS
        else:
            verdict = FAIL
        return cls(name, float(lhs), float(rhs), float(abs_diff), float(rel_diff),
                   {k: float(v) for k, v in budgets.items()}, tolerance, verdict, extra or {})

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=float)


def reports_to_csv(reports: Sequence[IdentityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "lhs", "rhs", "rel_diff", "verdict"])
    for r in reports:
        w.writerow([r.name, repr(r.lhs), repr(r.rhs), repr(r.rel_diff), r.verdict])
    return buf.getvalue()


class MomentData:
    """A Z grid from t = 1 together with the series derived from it, computed on demand."""

    def __init__(self, grid: ZSampleGrid):
        if grid.t_min != 1.0:
            raise PreconditionError("moment data needs a grid starting at t = 1")
        self.grid = grid

    @classmethod
    def build(cls, t_max: float, step: float = 0.05, cfg: EvalConfig | None = None) -> "MomentData":
        return cls(build_grid(1.0, t_max, min(step, max_admissible_step(t_max)), cfg))

    @functools.cached_property
    def I1(self) -> CumulativeSeries:
        return cumulative_moment(1, self.grid)

    @functools.cached_property
    def I2(self) -> CumulativeSeries:
        return cumulative_moment(2, self.grid)

    @functools.cached_property
    def E(self) -> CumulativeSeries:
        return e1_series(self.I1)

    @functools.cached_property
    def G(self) -> CumulativeSeries:
        return g_series(self.E)

    @functools.cached_property
    def P4(self) -> MomentPolynomial:
        return fit_P4(self.I2)

    @functools.cached_property
    def E2(self) -> CumulativeSeries:
        return e2_series(self.I2, self.P4)

    @functools.lru_cache(maxsize=8)
    def F(self, k: int) -> CumulativeSeries:
        return cumulative_F(k, self.grid)


# ----------------------------------------------------------------------------
# theorem constants


@dataclass(frozen=True)
class TheoremConstants:
    c: tuple
    C_rhs_components: dict


def theorem1_components(sigma: float) -> dict:
    """Closed-form terms of the M_1 identity at sigma."""
    d = 2 * sigma - 2
    return {
        "(2gamma-log2pi)/(2sigma-2)": (2 * EULER_GAMMA - LOG_2PI) / d,
        "1/(2sigma-2)^2": 1.0 / d**2,
        "2gamma-1-log2pi": 2 * EULER_GAMMA - 1 - LOG_2PI,
        "2pi*sigma": 2 * math.pi * sigma,
    }


def theorem2_constants(P4: MomentPolynomial) -> TheoremConstants:
    """c_0 = A_0, c_j = (A_(j-1) (j-1)! + A_j j!) 2^-j for j = 1..4, c_5 = 3/(8 pi^2)."""
    if P4.k != 2 or len(P4.coeffs) != 5:
        raise PreconditionError("theorem 2 constants need a quartic P_4")
    A = P4.coeffs
    c = [A[0]]
    for j in range(1, 5):
        c.append((A[j - 1] * math.factorial(j - 1) + A[j] * math.factorial(j)) / 2.0**j)
    c.append(C5_EXACT)
    return TheoremConstants(tuple(c), {f"c{j}": v for j, v in enumerate(c)})


def theorem2_singular(consts: TheoremConstants, sigma: float) -> float:
    return sum(cj / (sigma - 1.0) ** j for j, cj in enumerate(consts.c))


# ----------------------------------------------------------------------------
# shared pieces


def _window_simpson(series: CumulativeSeries, weight, lo: float, hi: float) -> tuple[float, float, float]:
    """Simpson of series*weight over the nodes in [lo, hi], Richardson-corrected with the
    half-resolution rule; returns (value, error estimate, last node used)."""
    T, v = series.window(lo, hi)
    m = (T.size - 1) // 4
    T, v = T[: 4 * m + 1], v[: 4 * m + 1]
    h = float(T[1] - T[0])
    y = v * weight(T)
    full = simpson(y, h)
    half = simpson(y[::2], 2 * h)
    return full + (full - half) / 15.0, abs(full - half) / 15.0, float(T[-1])


def _linear_tail(series: CumulativeSeries, X: float, power: float) -> tuple[float, float]:
    """integral_X^inf f(x) x^(-power) dx with f fitted as a + b x on [X/2, X]; plus a budget."""
    T, v = series.window(X / 2, X)
    b, a = np.polyfit(T, v, 1)
    resid = float(np.max(np.abs(v - (a + b * T))))
    tail = a * X ** (1 - power) / (power - 1) + b * X ** (2 - power) / (power - 2)
    budget = resid * X ** (1 - power) / (power - 1) + 0.25 * abs(tail)
    return float(tail), float(budget)


def _poly_tail(P: MomentPolynomial, sigma: float, X: float) -> float:
    """integral_X^inf (P + P')(log x) x^(1-2 sigma) dx (closed form)."""
    c = list(P.coeffs)
    for j in range(1, len(c)):
        c[j - 1] += j * P.coeffs[j]
    return -poly_exp_antiderivative(c, 2.0 - 2.0 * sigma, math.log(X))


def _spectral_side(k: int, sigma: float, data: MomentData, trunc: TruncationSpec,
                   P: MomentPolynomial, E: CumulativeSeries) -> tuple[float, dict]:
    """(1/pi) integral_0^inf |M_k(sigma+it)|^2 dt with truncation corrections."""
    spec = spectral_integral(k, sigma, data.grid, trunc)
    X = spec["X"]
    x_t = stationary_x(spec["t_end"])
    missing = 0.0
    if x_t < X / 1.5:
        lo = data.grid.t_min + data.grid.step * 2 * math.ceil((x_t - 1) / (2 * data.grid.step))
        missing = direct_x_integral(k, sigma, data.grid, lo, X)
    # x > X: main term in closed form, then the boundary and mean of the error term
    main_tail = _poly_tail(P, sigma, X)
    _, Ew = E.window(X / 2, X)
    E_X = E(X)
    e_tail = X ** (1 - 2 * sigma) * (float(np.mean(Ew)) - E_X)
    value = spec["fine"] + spec["endpoint_tail"] + missing + main_tail + e_tail
    budgets = {
        "lhs_t_quadrature": abs(spec["fine"] - spec["coarse"]),
        "lhs_t_tail": 0.5 * (spec["endpoint_tail"] + missing),
        "lhs_x_tail": X ** (1 - 2 * sigma) * float(np.std(Ew)),
    }
    return value, budgets


def default_identity_truncation(x_max: float = 600.0) -> TruncationSpec:
    """Cutoffs with t_max beyond the stationary frequency of the x-endpoint, so the
    truncated transform has no spectral content left above t_max but endpoint ripple."""
    t_stat = 0.5 * x_max * math.log(x_max / (2 * math.pi))
    return TruncationSpec(x_max=x_max, t_max=math.ceil(1.25 * t_stat))


# ----------------------------------------------------------------------------
# theorem checks


def theorem1_rhs(sigma: float, data: MomentData) -> tuple[float, dict]:
    comps = theorem1_components(sigma)
    G = data.G
    X = G.T_max
    g_int, g_quad, X = _window_simpson(G, lambda x: x ** (-1 - 2 * sigma), 1.0, X)
    g_tail, g_tail_budget = _linear_tail(G, X, 1 + 2 * sigma)
    w = 2 * sigma * (2 * sigma - 1)
    rhs = sum(comps.values()) + w * (g_int + g_tail)
    return rhs, {"rhs_g_quadrature": w * g_quad, "rhs_g_tail": w * g_tail_budget}


def theorem1_check(sigma: float, data: MomentData, trunc: TruncationSpec | None = None,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> IdentityReport:
    """(1/pi) integral |M_1(sigma+it)|^2 dt against the closed form plus the G integral."""
    if not sigma > 1:
        raise DomainError("the M_1 identity is checked for sigma > 1 only")
    trunc = trunc or default_identity_truncation()
    lhs, lb = _spectral_side(1, sigma, data, trunc, P1, data.E)
    rhs, rb = theorem1_rhs(sigma, data)
    return IdentityReport.build(f"theorem1[sigma={sigma:g}]", lhs, rhs, {**lb, **rb}, tol.theorem1,
                                tol.safety, {"components": theorem1_components(sigma)})


def theorem2_rhs(sigma: float, data: MomentData) -> tuple[float, dict, TheoremConstants]:
    consts = theorem2_constants(data.P4)
    E2 = data.E2
    e_int, e_quad, X = _window_simpson(E2, lambda x: x ** (-2 * sigma), 1.0, E2.T_max)
    _, Ew = E2.window(X / 2, X)
    tail_budget = float(np.max(np.abs(Ew))) * X ** (1 - 2 * sigma)
    rhs = theorem2_singular(consts, sigma) + (2 * sigma - 1) * e_int
    return rhs, {"rhs_e2_quadrature": (2 * sigma - 1) * e_quad, "rhs_e2_tail": tail_budget}, consts


def theorem2_check(sigma: float, data: MomentData, trunc: TruncationSpec | None = None,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> IdentityReport:
    """(1/pi) integral |M_2(sigma+it)|^2 dt against sum c_j/(sigma-1)^j + E_2 integral."""
    if not sigma > 1:
        raise DomainError("the M_2 identity is checked for sigma > 1 only")
    trunc = trunc or default_identity_truncation()
    lhs, lb = _spectral_side(2, sigma, data, trunc, data.P4, data.E2)
    rhs, rb, consts = theorem2_rhs(sigma, data)
    budgets = {**lb, **rb}
    return IdentityReport.build(f"theorem2[sigma={sigma:g}]", lhs, rhs, budgets, tol.theorem2,
                                tol.safety, {"c": list(consts.c)})


def parseval_check(k: int, sigma: float, grid: ZSampleGrid, trunc: TruncationSpec,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> IdentityReport:
    from .transforms import parseval_sides

    sides = parseval_sides(k, sigma, grid, trunc)
    return IdentityReport.build(f"parseval[k={k},sigma={sigma:g}]", sides.lhs, sides.rhs,
                                sides.budgets, tol.parseval, tol.safety)


# ----------------------------------------------------------------------------
# corollary trend tables


class TrendRow(NamedTuple):
    sigma: float
    value: float
    budget: float


class TrendTable(NamedTuple):
    rows: tuple
    target: float
    target_budget: float
    extrapolated: float

    @property
    def monotone(self) -> bool:
        d = [abs(r.value - self.extrapolated) for r in self.rows]
        return all(d[i + 1] <= d[i] for i in range(len(d) - 1))


def _extrapolate(rows: Sequence[TrendRow]) -> float:
    s = np.array([r.sigma - 1 for r in rows])
    v = np.array([r.value for r in rows])
    deg = min(2, len(rows) - 1)
    return float(np.polyval(np.polyfit(s, v, deg), 0.0))


def corollary1_table(data: MomentData, sigmas: Sequence[float] = (1.05, 1.02, 1.01)) -> TrendTable:
    """integral_1^inf Z^2 x^(1-2 sigma) dx minus its two singular terms, as sigma -> 1.

    The left side is evaluated along the x-axis (equal to the spectral mean square
    by Parseval): direct quadrature to X, the main term beyond X in closed form and
    the error-term boundary and mean beyond X.
    """
    E = data.E
    X = float(data.I1.grid_T[-1])
    rows = []
    for sg in sorted(sigmas, reverse=True):
        direct = direct_x_integral(1, sg, data.grid, 1.0, X)
        _, Ew = E.window(X / 2, X)
        e_tail = X ** (1 - 2 * sg) * (float(np.mean(Ew)) - E(X))
        lhs = direct + _poly_tail(P1, sg, X) + e_tail
        d = 2 * sg - 2
        value = lhs - (2 * EULER_GAMMA - LOG_2PI) / d - 1.0 / d**2
        rows.append(TrendRow(sg, value, X ** (1 - 2 * sg) * float(np.std(Ew))))
    g_int, g_quad, XG = _window_simpson(data.G, lambda x: x ** -3.0, 1.0, data.G.T_max)
    g_tail, g_budget = _linear_tail(data.G, XG, 3.0)
    target = 2 * math.pi + 2 * EULER_GAMMA - 1 - LOG_2PI + 2 * (g_int + g_tail)
    return TrendTable(tuple(rows), target, 2 * (g_quad + g_budget), _extrapolate(rows))


def corollary2_table(data: MomentData, sigmas: Sequence[float] = (1.05, 1.02, 1.01)) -> TrendTable:
    """integral_1^inf Z^4 x^(1-2 sigma) dx minus sum c_j/(sigma-1)^j, as sigma -> 1."""
    consts = theorem2_constants(data.P4)
    E2 = data.E2
    X = float(data.I2.grid_T[-1])
    rows = []
    for sg in sorted(sigmas, reverse=True):
        direct = direct_x_integral(2, sg, data.grid, 1.0, X)
        _, Ew = E2.window(X / 2, X)
        e_tail = X ** (1 - 2 * sg) * (float(np.mean(Ew)) - E2(X))
        lhs = direct + _poly_tail(data.P4, sg, X) + e_tail
        rows.append(TrendRow(sg, lhs - theorem2_singular(consts, sg),
                             X ** (1 - 2 * sg) * float(np.std(Ew))))
    e_int, e_quad, XE = _window_simpson(E2, lambda x: x ** -2.0, 1.0, E2.T_max)
    _, Ew = E2.window(XE / 2, XE)
    return TrendTable(tuple(rows), e_int, e_quad + float(np.max(np.abs(Ew))) / XE,
                      _extrapolate(rows))


# ----------------------------------------------------------------------------
# exponential sums


def expsum_range(k: int, T: float) -> tuple[int, int]:
    """Integers n with (T/2pi)^(k/2) <= n <= (T/pi)^(k/2)."""
    lo = (T / (2 * math.pi)) ** (k / 2)
    hi = (T / math.pi) ** (k / 2)
    return int(math.ceil(lo)), int(math.floor(hi))


def _expsum_phase_cos(k: int, n: np.ndarray) -> np.ndarray:
    """cos(k pi n^(2/k) + (k-2) pi/8) with the argument reduced exactly or in double-double."""
    if k == 1:
        # pi n^2 mod 2 pi is 0 or pi by the parity of n
        return np.where(n % 2 == 0, math.cos(-math.pi / 8), math.cos(math.pi - math.pi / 8))
    hi, lo = _dd.pow_two_thirds(n.astype(np.float64))
    r = _dd.scaled_mod2(3, hi, lo)
    return np.cos(math.pi * r + math.pi / 8)


def expsum_main(k: int, T: float, dtable: DivisorTable) -> float:
    """2 pi sqrt(2/k) sum d_k(n) n^(-1/2+1/k) cos(k pi n^(2/k) + (k-2) pi/8) over the range."""
    if k not in (1, 3):
        raise ConfigurationError("only odd k in {1, 3} are supported")
    if dtable.k != k:
        raise PreconditionError(f"divisor table is for k = {dtable.k}, not {k}")
    if T < 2 * math.pi:
        raise PreconditionError("T must be at least 2 pi")
    a, b = expsum_range(k, T)
    if b > dtable.n_max:
        raise CoverageError(f"divisor table ends at {dtable.n_max}, the sum needs {b}")
    if b < a:
        return 0.0
    n = np.arange(a, b + 1, dtype=np.int64)
    d = dtable.values[a:b + 1].astype(np.float64)
    terms = d * n.astype(np.float64) ** (-0.5 + 1.0 / k) * _expsum_phase_cos(k, n)
    return 2 * math.pi * math.sqrt(2.0 / k) * math.fsum(terms.tolist())


class V1Result(NamedTuple):
    partial: complex
    tail_proxy: float


def v1_series(s: complex, N: int, dtable: DivisorTable) -> V1Result:
    """(2 pi)^(1-s) sqrt(2/3) sum_{n<=N} d_3(n) n^(-1/6-2s/3) cos(3 pi n^(2/3) + pi/8)."""
    s = complex(s)
    if s.real < 1.5:
        raise ConvergenceError("the V_1 series is evaluated for sigma >= 3/2")
    if dtable.k != 3:
        raise PreconditionError("V_1 needs a d_3 table")
    if N > dtable.n_max:
        raise CoverageError(f"divisor table ends at {dtable.n_max}, N = {N}")
    n = np.arange(1, N + 1, dtype=np.int64)
    nf = n.astype(np.float64)
    terms = (dtable.values[1:N + 1] * np.exp((-1.0 / 6 - 2 * s / 3) * np.log(nf))
             * _expsum_phase_cos(3, n))
    pref = complex((2 * math.pi) ** (1 - s.real)) * np.exp(-1j * s.imag * math.log(2 * math.pi))
    pref *= math.sqrt(2.0 / 3.0)
    partial = pref * complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))
    block = terms[N // 2:]
    tail = abs(pref) * abs(complex(block.real.sum(), block.imag.sum()))
    return V1Result(complex(partial), float(tail))


# ----------------------------------------------------------------------------
# zeros and extrema of Z


@dataclass(frozen=True)
class LehmerEntry:
    zero_left: float | None
    zero_right: float | None
    extremum_t: float
    extremum_value: float


_GOLDEN = (math.sqrt(5) - 1) / 2


def _bisect(f, a: float, b: float, fa: float, tol: float = 1e-7) -> float:
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _golden_max(g, a: float, b: float, tol: float = 1e-9) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - _GOLDEN * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _GOLDEN * (b - a)
            gd = g(d)
    return 0.5 * (a + b)


def lehmer_scan(t_lo: float, t_hi: float, cfg: EvalConfig | None = None,
                oversample: int = 4) -> list[LehmerEntry]:
    """Zeros of Z on [t_lo, t_hi] with the extremum between each consecutive pair, plus
    local extrema in the stretches before the first and after the last zero."""
    if not (0 <= t_lo < t_hi <= 1e5):
        raise DomainError("need 0 <= t_lo < t_hi <= 1e5")
    cfg = cfg or DEFAULT_CONFIG
    # the oracle head keeps low zeros at bisection accuracy instead of fast-path accuracy
    f = functools.lru_cache(maxsize=None)(lambda t: float(z_with_oracle_head(np.array([t]), cfg)[0]))
    h = max_admissible_step(max(t_hi, 2 * math.pi)) / oversample
    n = max(int(math.ceil((t_hi - t_lo) / h)), 4)
    ts = np.linspace(t_lo, t_hi, n + 1)
    zs = z_with_oracle_head(ts, cfg)
    zeros = []
    for i in range(n):
        if zs[i] == 0.0:
            zeros.append(float(ts[i]))
        elif zs[i] * zs[i + 1] < 0:
            zeros.append(_bisect(f, float(ts[i]), float(ts[i + 1]), float(zs[i])))
    out = []
    for zl, zr in zip(zeros, zeros[1:]):
        te = _golden_max(lambda t: abs(f(t)), zl, zr)
        out.append(LehmerEntry(zl, zr, te, f(te)))
    # local extrema of Z outside zero pairs
    first = zeros[0] if zeros else t_hi
    last = zeros[-1] if zeros else t_hi
    for i in range(1, n):
        t = float(ts[i])
        if first <= t <= last and zeros:
            continue
        if (zs[i] - zs[i - 1]) * (zs[i + 1] - zs[i]) < 0:
            sgn = 1.0 if zs[i] > zs[i - 1] else -1.0
            te = _golden_max(lambda u: sgn * f(u), float(ts[i - 1]), float(ts[i + 1]))
            left = max([z for z in zeros if z < te], default=None)
            right = min([z for z in zeros if z > te], default=None)
            out.append(LehmerEntry(left, right, te, f(te)))
    out.sort(key=lambda e: e.extremum_t)
    return out


def zeros_from_scan(entries: Sequence[LehmerEntry]) -> list[float]:
    zs = set()
    for e in entries:
        if e.zero_left is not None and e.zero_right is not None:
            zs.update((e.zero_left, e.zero_right))
    return sorted(zs)
