"""Sampled Z(t) grids and cumulative integrals over them.

Every cumulative quantity is a composite Simpson sum over consecutive
panels of a uniform grid, accumulated with Kahan compensation. Values are
reported at panel boundaries ``t_min + 2*j*step``.
"""
from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import ConfigurationError, FitError, PreconditionError, RangeError
from .special import (DEFAULT_CONFIG, EULER_GAMMA, FAST, LOG_2PI, ORACLE, EvalConfig, hardy_Z_array,
                      zeta_oracle)

A4_LEADING = 1.0 / (2.0 * math.pi**2)
SERIES_KINDS = ("I_k", "F_k", "E1", "E2", "G")
_CHUNK = 1 << 15
# Grids sample the oracle below this ordinate even on the fast path. The fast path
# switches over at t = 10 with an error near 1e-4 there; that jump in the integrand
# would make Simpson first order in the step. By t = 100 the fast error is below 1e-6.
GRID_ORACLE_BELOW = 100.0


def max_admissible_step(t_max: float) -> float:
    """Largest grid step giving about six samples per local oscillation of Z."""
    denom = math.log(t_max / (2 * math.pi)) + 4.0
    return math.inf if denom <= 0 else 2 * math.pi / denom


def sample_count(t_min: float, t_max: float, step: float) -> int:
    return int(math.floor((t_max - t_min) / step + 1e-9)) + 1


@dataclass(frozen=True, eq=False)
class ZSampleGrid:
    t_min: float
    t_max: float
    step: float
    values: np.ndarray
    cfg_fingerprint: str

    def __post_init__(self):
        n = sample_count(self.t_min, self.t_max, self.step)
        if self.values.shape != (n,):
            raise ConfigurationError(f"grid holds {self.values.shape} samples, expected {n}")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("grid samples must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def t(self) -> np.ndarray:
        return grid_points(self.t_min, self.step, 0, self.n)

    @property
    def t_last(self) -> float:
        return self.t_min + self.step * (self.n - 1)

    def index_of(self, t: float) -> int:
        """Index of the grid point equal to ``t``; RangeError if there is none."""
        i = int(round((t - self.t_min) / self.step))
        if not (0 <= i < self.n) or self.t_min + self.step * i != t:
            raise RangeError(f"t = {t!r} is not a point of the grid")
        return i

    def __eq__(self, other):
        if not isinstance(other, ZSampleGrid):
            return NotImplemented
        return (self.t_min == other.t_min and self.t_max == other.t_max
                and self.step == other.step and self.cfg_fingerprint == other.cfg_fingerprint
                and np.array_equal(self.values, other.values))

    __hash__ = None


def grid_points(t_min: float, step: float, start: int, stop: int) -> np.ndarray:
    # t_i = t_min + step*i elementwise, so shared points of grids agree bitwise
    return t_min + step * np.arange(start, stop, dtype=np.float64)


def default_threads() -> int:
    return os.cpu_count() or 1


def z_with_oracle_head(t: np.ndarray, cfg: EvalConfig) -> np.ndarray:
    """Z at the ordinates t, taking the oracle for t < GRID_ORACLE_BELOW on the fast path."""
    t = np.asarray(t, dtype=np.float64)
    low = t < GRID_ORACLE_BELOW
    if cfg.method != FAST or not low.any():
        return hardy_Z_array(t, cfg)
    out = np.empty_like(t)
    out[low] = hardy_Z_array(t[low], dataclasses.replace(cfg, method=ORACLE))
    out[~low] = hardy_Z_array(t[~low], cfg)
    return out


def sample_z(t_min: float, step: float, start: int, stop: int,
             cfg: EvalConfig, threads: int | None = None) -> np.ndarray:
    """Z at grid indices start..stop-1, computed in parallel chunks, joined in order."""
    bounds = [(a, min(a + _CHUNK, stop)) for a in range(start, stop, _CHUNK)]

    def work(ab):
        return z_with_oracle_head(grid_points(t_min, step, *ab), cfg)

    threads = threads or default_threads()
    if threads <= 1 or len(bounds) <= 1:
        parts = [work(ab) for ab in bounds]
    else:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, bounds))
    return np.concatenate(parts) if parts else np.empty(0)


def build_grid(t_min: float, t_max: float, step: float, cfg: EvalConfig | None = None,
               threads: int | None = None) -> ZSampleGrid:
    cfg = cfg or DEFAULT_CONFIG
    if not (1 <= t_min < t_max):
        raise ConfigurationError("need 1 <= t_min < t_max")
    if not step > 0:
        raise ConfigurationError("step must be positive")
    hmax = max_admissible_step(t_max)
    if step > hmax:
        raise ConfigurationError(f"step {step} too coarse; maximal admissible step is {hmax:.6g}")
    n = sample_count(t_min, t_max, step)
    values = sample_z(t_min, step, 0, n, cfg, threads)
    return ZSampleGrid(float(t_min), float(t_max), float(step), values, cfg.fingerprint())


# ----------------------------------------------------------------------------
# cumulative series


class Checkpoint(NamedTuple):
    T: float
    value: float
    comp: float


@dataclass(frozen=True, eq=False)
class CumulativeSeries:
    kind: str
    k: int
    grid_T: np.ndarray
    values: np.ndarray
    quadrature_meta: dict = field(default_factory=dict)
    comps: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in SERIES_KINDS:
            raise ConfigurationError(f"unknown series kind {self.kind!r}")
        if self.grid_T.shape != self.values.shape:
            raise ConfigurationError("grid_T and values differ in length")
        if self.grid_T.size > 1 and not np.all(np.diff(self.grid_T) > 0):
            raise ConfigurationError("grid_T must be strictly increasing")

    @property
    def T_min(self) -> float:
        return float(self.grid_T[0])

    @property
    def T_max(self) -> float:
        return float(self.grid_T[-1])

    def __call__(self, T: float) -> float:
        """Value at T, linearly interpolated between nodes."""
        if not (self.T_min <= T <= self.T_max):
            raise RangeError(f"T = {T} outside [{self.T_min}, {self.T_max}]")
        return float(np.interp(T, self.grid_T, self.values))

    def window(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        m = (self.grid_T >= lo) & (self.grid_T <= hi)
        return self.grid_T[m], self.values[m]

    def checkpoints(self, extra: Sequence[float] = ()) -> list[Checkpoint]:
        """Accumulator state at the last node not above each power of two (and ``extra``)."""
        if self.comps is None:
            raise PreconditionError("series carries no compensation terms")
        targets = [2.0**j for j in range(1, 64) if 2.0**j <= self.T_max] + list(extra)
        idx = sorted({int(np.searchsorted(self.grid_T, T, side="right")) - 1 for T in targets})
        return [Checkpoint(float(self.grid_T[i]), float(self.values[i]), float(self.comps[i]))
                for i in idx if i >= 0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "value"])
        for T, v in zip(self.grid_T.tolist(), self.values.tolist()):
            w.writerow([repr(T), repr(v)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "k": self.k,
            "quadrature_meta": self.quadrature_meta,
            "T": self.grid_T.tolist(),
            "value": self.values.tolist(),
        }, sort_keys=True)


def _simpson_meta(step: float) -> dict:
    return {"rule": "composite_simpson", "step": step, "compensated": True}


def _cumulative(kind: str, k: int, f: np.ndarray, t_min: float, step: float,
                start: int, state: tuple[float, float]) -> CumulativeSeries:
    seg = np.ascontiguousarray(f[start:])
    if seg.shape[0] < 3:
        raise RangeError("need at least one Simpson panel")
    sums, comps = kernels.simpson_cumsum(seg, step, *state)
    T = grid_points(t_min, step, start, start + 2 * (sums.shape[0] - 1) + 1)[::2]
    return CumulativeSeries(kind, k, T, sums, _simpson_meta(step), comps)


def _resume_start(grid: ZSampleGrid, resume: Checkpoint | None) -> tuple[int, tuple[float, float]]:
    if resume is None:
        if grid.t_min != 1.0:
            raise PreconditionError("grid must start at t = 1 unless resuming from a checkpoint")
        return 0, (0.0, 0.0)
    i0 = grid.index_of(resume.T)
    if grid.t_min == 1.0 and i0 % 2:
        raise PreconditionError("checkpoint does not sit on a Simpson panel boundary")
    return i0, (resume.value, resume.comp)


def cumulative_moment(k: int, grid: ZSampleGrid, resume: Checkpoint | None = None) -> CumulativeSeries:
    """I_k(T) = integral_1^T Z^{2k}(t) dt at every panel boundary of the grid."""
    start, state = _resume_start(grid, resume)
    return _cumulative("I_k", k, grid.values ** (2 * k), grid.t_min, grid.step, start, state)


def cumulative_F(k: int, grid: ZSampleGrid, resume: Checkpoint | None = None) -> CumulativeSeries:
    """F_k(T) = integral_1^T Z^k(t) dt (signed)."""
    if k not in (1, 2, 3, 4, 5):
        raise RangeError("k must be one of 1..5")
    start, state = _resume_start(grid, resume)
    return _cumulative("F_k", k, grid.values ** k, grid.t_min, grid.step, start, state)


# ----------------------------------------------------------------------------
# moment polynomials and error terms


@dataclass(frozen=True)
class MomentPolynomial:
    """P(y) = sum_j coeffs[j] * y**j; ``diagnostics`` is filled by fits."""

    k: int
    coeffs: tuple
    diagnostics: dict | None = None

    def __post_init__(self):
        if len(self.coeffs) != self.k**2 + 1:
            raise ConfigurationError(f"P_{{k^2}} for k = {self.k} needs {self.k**2 + 1} coefficients")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return self.k**2

    def __call__(self, y):
        out = 0.0 * np.asarray(y, dtype=np.float64)
        for c in reversed(self.coeffs):
            out = out * y + c
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, y):
        out = 0.0 * np.asarray(y, dtype=np.float64)
        for j in range(self.degree, 0, -1):
            out = out * y + j * self.coeffs[j]
        return float(out) if np.ndim(out) == 0 else out


P1 = MomentPolynomial(1, (2 * EULER_GAMMA - 1 - LOG_2PI, 1.0))


def P1_eval(y):
    """P_1(y) = y + 2*gamma - 1 - log(2*pi)."""
    return P1(y)


def E1_at_one() -> float:
    """E(1) = -P_1(0) = 1 + log(2*pi) - 2*gamma."""
    return 1.0 + LOG_2PI - 2 * EULER_GAMMA


def E1(T: float, series: CumulativeSeries) -> float:
    """E(T) = I_1(T) - T*P_1(log T); I_1 interpolated linearly between nodes."""
    _require(series, "I_k", 1)
    if T == 1.0:
        return E1_at_one()
    return series(T) - T * P1(math.log(T))


def e1_series(series: CumulativeSeries) -> CumulativeSeries:
    """E(T) at every node of an I_1 series; the node T = 1 takes the analytic value."""
    _require(series, "I_k", 1)
    T = series.grid_T
    vals = series.values - T * P1(np.log(T))
    vals[T == 1.0] = E1_at_one()
    return CumulativeSeries("E1", 1, T, vals, dict(series.quadrature_meta, derived_from="I_1"))


def g_series(e_series: CumulativeSeries) -> CumulativeSeries:
    """G(T) = integral_1^T E(t) dt - pi*T, by Simpson over the E nodes."""
    _require(e_series, "E1", 1)
    if e_series.T_min != 1.0:
        raise PreconditionError("E series must start at T = 1")
    h = float(e_series.grid_T[1] - e_series.grid_T[0])
    sums, comps = kernels.simpson_cumsum(np.ascontiguousarray(e_series.values), h, 0.0, 0.0)
    T = e_series.grid_T[: 2 * (sums.shape[0] - 1) + 1: 2]
    return CumulativeSeries("G", 1, T, sums - math.pi * T, _simpson_meta(h), comps)


def G1(T: float, e_series: CumulativeSeries) -> float:
    if T == 1.0:
        return -math.pi
    return g_series(e_series)(T)


def E2(T: float, series: CumulativeSeries, P4: MomentPolynomial) -> float:
    """E_2(T) = I_2(T) - T*P_4(log T); exactly -A_0 at T = 1."""
    _require(series, "I_k", 2)
    if P4.k != 2:
        raise PreconditionError("P4 must have k = 2")
    if T == 1.0:
        return -P4.coeffs[0]
    return series(T) - T * P4(math.log(T))


def e2_series(series: CumulativeSeries, P4: MomentPolynomial) -> CumulativeSeries:
    _require(series, "I_k", 2)
    if P4.k != 2:
        raise PreconditionError("P4 must have k = 2")
    T = series.grid_T
    vals = series.values - T * P4(np.log(T))
    vals[T == 1.0] = -P4.coeffs[0]
    return CumulativeSeries("E2", 2, T, vals, dict(series.quadrature_meta, derived_from="I_2"))


def fit_P4(series: CumulativeSeries, t_lo: float = 100.0, min_t_max: float = 1e4) -> MomentPolynomial:
    """Least-squares A_0..A_3 of I_2(T) ~ T*P_4(log T) with A_4 pinned to 1/(2 pi^2)."""
    _require(series, "I_k", 2)
    if series.T_max < min_t_max:
        raise FitError(f"series ends at T = {series.T_max:g}; the fit needs T_max >= {min_t_max:g}")
    T, I = series.window(t_lo, series.T_max)
    if T.size < 8:
        raise FitError("too few nodes in the fit window")
    L = np.log(T)
    y = I / T - A4_LEADING * L**4
    # centred, scaled basis for conditioning; mapped back to powers of L below
    c, s = 0.5 * (L[0] + L[-1]), 0.5 * (L[-1] - L[0])
    X = (L - c) / s
    V = np.vander(X, 4, increasing=True)
    cond = float(np.linalg.cond(V))
    if not np.isfinite(cond) or cond > 1e10:
        raise FitError(f"ill-conditioned P4 fit (cond = {cond:.3g})")
    b, *_ = np.linalg.lstsq(V, y, rcond=None)
    poly = np.polynomial.Polynomial(b, domain=[L[0], L[-1]], window=[-1, 1]).convert()
    coeffs = list(poly.coef) + [0.0] * (4 - len(poly.coef))
    resid = I - T * np.polynomial.polynomial.polyval(L, coeffs[:4] + [A4_LEADING])
    diag = {
        "t_lo": float(T[0]),
        "t_max": float(T[-1]),
        "nodes": int(T.size),
        "cond": cond,
        "rms_residual": float(np.sqrt(np.mean(resid**2))),
        "max_abs_residual": float(np.max(np.abs(resid))),
    }
    return MomentPolynomial(2, tuple(coeffs[:4]) + (A4_LEADING,), diag)


# ----------------------------------------------------------------------------
# mean-square law and growth diagnostics


def mean_square_constant() -> float:
    """D = 2 (2 pi)^(-1/2) zeta(3/2)^4 / (3 zeta(3))."""
    z32 = zeta_oracle(1.5).real
    z3 = zeta_oracle(3.0).real
    return 2.0 / math.sqrt(2 * math.pi) * z32**4 / (3.0 * z3)


def mean_square_E(T: float, e_series: CumulativeSeries) -> float:
    """(integral_1^T E(t)^2 dt) / T^(3/2)."""
    _require(e_series, "E1", 1)
    if T < 100:
        raise RangeError("mean_square_E needs T >= 100")
    if not (e_series.T_min == 1.0 and T <= e_series.T_max):
        raise RangeError(f"T = {T} outside the E series")
    h = float(e_series.grid_T[1] - e_series.grid_T[0])
    sums, _ = kernels.simpson_cumsum(np.ascontiguousarray(e_series.values**2), h, 0.0, 0.0)
    nodes = e_series.grid_T[: 2 * (sums.shape[0] - 1) + 1: 2]
    return float(np.interp(T, nodes, sums)) / T**1.5


class GrowthFit(NamedTuple):
    exponent: float
    constant: float
    r2: float
    stderr: float


def running_sup(values: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(np.abs(values))


def fit_growth_exponent(series: CumulativeSeries, window: tuple[float, float],
                        samples: int = 400) -> GrowthFit:
    """Log-log regression of the running sup of |series| against T over ``window``."""
    lo, hi = window
    if not (series.T_min <= lo < hi <= series.T_max):
        raise FitError(f"window {window} outside the series range")
    sup = running_sup(series.values)
    targets = np.geomspace(lo, hi, samples)
    idx = np.unique(np.clip(np.searchsorted(series.grid_T, targets), 0, series.grid_T.size - 1))
    T, S = series.grid_T[idx], sup[idx]
    keep = S > 0
    T, S = T[keep], S[keep]
    if T.size < 3 or np.unique(T).size < 3:
        raise FitError("degenerate window for growth fit")
    x, y = np.log(T), np.log(S)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), res, *_ = np.linalg.lstsq(A, y, rcond=None)
    yhat = A @ np.array([slope, icpt])
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = max(T.size - 2, 1)
    stderr = math.sqrt(ss_res / dof / float(np.sum((x - x.mean()) ** 2)))
    return GrowthFit(float(slope), float(math.exp(icpt)), r2, stderr)


def sup_ratio(series: CumulativeSeries, power: float, t_hi: float | None = None) -> tuple[float, float]:
    """(max over nodes T <= t_hi of |series(T)| / T^power, the T attaining it)."""
    T, v = series.window(series.T_min, t_hi if t_hi is not None else series.T_max)
    r = np.abs(v) / T**power
    i = int(np.argmax(r))
    return float(r[i]), float(T[i])


def sign_changes(series: CumulativeSeries, t_hi: float | None = None) -> int:
    _, v = series.window(series.T_min, t_hi if t_hi is not None else series.T_max)
    s = np.sign(v)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _require(series: CumulativeSeries, kind: str, k: int):
    if series.kind != kind or series.k != k:
        raise PreconditionError(f"expected a {kind} series with k = {k}, got {series.kind} k = {series.k}")
