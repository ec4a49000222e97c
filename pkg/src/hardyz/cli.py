"""Batch command-line front end.

Exit codes: 0 success or pass, 1 usage or configuration error, 2 computation error,
3 identity check failed, 4 inconclusive (budgets exceed the tolerance).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, acceptance, store
from .errors import (ConfigurationError, ConvergenceError, DomainError, HardyZError, PreconditionError,
                     RangeError)
from .identities import (FAIL, INCONCLUSIVE, PASS, MomentData, Tolerances, expsum_main, expsum_range,
                         lehmer_scan, parseval_check, theorem1_check, theorem2_check)
from .moments import (E1_at_one, ZSampleGrid, build_grid, cumulative_F, cumulative_moment, e1_series,
                      e2_series, fit_growth_exponent, fit_P4, g_series, sample_count)
from .special import FAST, ORACLE, EvalConfig, divisor_table, hardy_Z, hardy_Z_array
from .transforms import TAIL_MODES, TruncationSpec, atkinson_fit, kober_residual, mellin_invert_Zk, mellin_Mk

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
CACHE_ENV = "HARDYZ_CACHE"
_INPUT_ERRORS = (ConfigurationError, DomainError, PreconditionError, ConvergenceError, RangeError)


@dataclass(frozen=True)
class RunConfig:
    """Key=value run settings; a config file supplies defaults and flags override them."""

    step: float = 0.05
    method: str = FAST
    rs_terms: int = 4
    x_max: float = 1000.0
    t_max: float = 500.0
    tail_mode: str = TAIL_MODES[0]
    tol_parseval: float = 0.02
    tol_theorem1: float = 0.05
    tol_theorem2: float = 0.10
    tol_inversion: float = 0.1
    safety: float = 10.0
    threads: int = 0  # 0 selects the available parallelism
    format: str = "csv"
    cache_dir: str = ""

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ConfigurationError("step must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json")
        if self.threads < 0:
            raise ConfigurationError("threads must be >= 0")
        for name in ("tol_parseval", "tol_theorem1", "tol_theorem2", "tol_inversion"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must lie in (0, 1)")
        if not self.safety >= 1:
            raise ConfigurationError("safety must be >= 1")
        self.eval_config()
        self.truncation()

    def eval_config(self) -> EvalConfig:
        if self.method not in (FAST, ORACLE):
            raise ConfigurationError(f"method must be {FAST} or {ORACLE}")
        return EvalConfig(method=self.method, rs_correction_terms=self.rs_terms)

    def truncation(self, **override) -> TruncationSpec:
        kw = {"x_max": self.x_max, "t_max": self.t_max, "tail_estimate_mode": self.tail_mode, **override}
        try:
            return TruncationSpec(**kw)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

    def tolerances(self) -> Tolerances:
        return Tolerances(self.tol_parseval, self.tol_theorem1, self.tol_theorem2, self.safety)

    @property
    def n_threads(self) -> int | None:
        return self.threads or None

    def digest(self) -> str:
        blob = json.dumps(dataclasses.asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


_FIELDS = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_CASTS = {"float": float, "int": int, "str": str}


def _coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigurationError(f"unknown config key {key!r}")
    try:
        return _CASTS[_FIELDS[key]](raw)
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected key = value")
        key, raw = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = _coerce(key.replace("-", "_"), raw)
    return out


def make_run_config(args) -> RunConfig:
    values = {}
    if args.config:
        try:
            values.update(parse_config_text(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file: {exc}") from exc
    for key in _FIELDS:
        v = getattr(args, "opt_" + key, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values)


# ----------------------------------------------------------------------------
# output


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


def emit_table(columns, rows, meta: dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        payload = {"meta": meta, "columns": list(columns),
                   "rows": [[_json_value(v) for v in r] for r in rows]}
        out.write(json.dumps(payload, sort_keys=True, indent=1) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    out.write(buf.getvalue())


def _json_value(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def reproducibility_block(rc: RunConfig) -> str:
    return (f"# hardyz {__version__}\n# config_hash {rc.digest()}\n"
            f"# cfg_fingerprint {rc.eval_config().fingerprint()}\n")


# ----------------------------------------------------------------------------
# grid access


def cache_root(rc: RunConfig) -> Path:
    if rc.cache_dir:
        return Path(rc.cache_dir)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "hardyz"


def truncate_grid(g: ZSampleGrid, t_max: float) -> ZSampleGrid:
    if t_max >= g.t_max:
        return g
    n = sample_count(g.t_min, t_max, g.step)
    return ZSampleGrid(g.t_min, float(t_max), g.step, g.values[:n].copy(), g.cfg_fingerprint)


def obtain_grid(rc: RunConfig, t_max: float) -> ZSampleGrid:
    """Grid on [1, t_max] from the cache, built or extended as needed, cut at t_max."""
    g = store.GridCache(cache_root(rc)).obtain(t_max, rc.step, rc.eval_config(), 1.0, rc.n_threads)
    return truncate_grid(g, t_max)


# ----------------------------------------------------------------------------
# commands


def cmd_z_eval(args, rc):
    cfg = rc.eval_config()
    ts = np.asarray(args.t, dtype=np.float64)
    zs = hardy_Z_array(ts, cfg)
    return ["t", "Z", "method"], [[float(t), float(z), cfg.method] for t, z in zip(ts, zs)], EXIT_OK


def cmd_z_scan(args, rc):
    rows = [[e.zero_left, e.zero_right, e.extremum_t, e.extremum_value]
            for e in lehmer_scan(args.t_from, args.t_to, rc.eval_config())]
    return ["zero_left", "zero_right", "extremum_t", "extremum_value"], rows, EXIT_OK


def cmd_grid(args, rc):
    cfg = rc.eval_config()
    if args.path:
        path = Path(args.path)
        if args.action == "build":
            g = build_grid(1.0, args.to, rc.step, cfg, rc.n_threads)
            store.save_grid(g, path)
        else:
            g = store.extend_grid(path, args.to, cfg, rc.step, rc.n_threads)
    else:
        cache = store.GridCache(cache_root(rc))
        path = cache.path_for(cfg.fingerprint(), 1.0, rc.step)
        if args.action == "extend" and not path.exists():
            raise PreconditionError(f"no cached grid at {path} to extend")
        g = cache.obtain(args.to, rc.step, cfg, 1.0, rc.n_threads)
    cols = ["path", "t_min", "t_max", "step", "sample_count", "cfg_fingerprint"]
    return cols, [[str(path), g.t_min, g.t_max, g.step, g.n, g.cfg_fingerprint]], EXIT_OK


def _row_points(T: float, every: float | None) -> np.ndarray:
    every = every or max((T - 1.0) / 100.0, 0.1)
    pts = 1.0 + every * np.arange(int(math.floor((T - 1.0) / every + 1e-9)) + 1)
    return pts if pts[-1] == T else np.append(pts, T)


def cmd_moments_table(args, rc):
    k, T = args.k, args.to
    if not 1 <= k <= 5:
        raise ConfigurationError("k must lie in 1..5")
    if T < 1:
        raise DomainError("T must be >= 1")
    cols = ["T", f"I{k}"] + (["E", "G"] if k == 1 else []) + (["E2"] if k == 2 else [])
    if T == 1.0:
        # every cumulative quantity starts at T = 1 with known values
        row = [1.0, 0.0] + ([E1_at_one(), -math.pi] if k == 1 else [])
        if k == 2:
            row.append(None)
        return cols, [row], EXIT_OK
    grid = obtain_grid(rc, T)
    I = cumulative_moment(k, grid)
    extra = []
    if k == 1:
        E = e1_series(I)
        extra = [E, g_series(E)]
    elif k == 2:
        try:
            extra = [e2_series(I, fit_P4(I))]
        except HardyZError as exc:
            print(f"# E2 column empty: {exc}", file=sys.stderr)
            extra = [None]
    hi = min(T, I.T_max)
    rows = []
    for t in _row_points(hi, args.every):
        rows.append([float(t), I(t)] + [s(t) if s is not None and t <= s.T_max else None for s in extra])
    return cols, rows, EXIT_OK


def cmd_fit_p4(args, rc):
    P = fit_P4(cumulative_moment(2, obtain_grid(rc, args.to)))
    d = P.diagnostics or {}
    row = [float(c) for c in P.coeffs] + [d.get("rms_residual"), d.get("max_abs_residual"), d.get("cond")]
    cols = [f"A{j}" for j in range(5)] + ["rms_residual", "max_abs_residual", "cond"]
    return cols, [row], EXIT_OK


def cmd_fit_growth(args, rc):
    k = {"F1": 1, "F3": 3, "F5": 5}[args.series]
    try:
        lo, hi = (float(v) for v in args.window.split(","))
    except ValueError as exc:
        raise ConfigurationError("--window expects a,b") from exc
    fit = fit_growth_exponent(cumulative_F(k, obtain_grid(rc, hi)), (lo, hi))
    return (["series", "exponent", "constant", "r2", "stderr"],
            [[args.series, fit.exponent, fit.constant, fit.r2, fit.stderr]], EXIT_OK)


def cmd_mellin_eval(args, rc):
    trunc = rc.truncation()
    tv = mellin_Mk(args.k, complex(args.sigma, args.t), obtain_grid(rc, trunc.x_max), trunc)
    return (["k", "sigma", "t", "re", "im", "tail_bound", "x_max", "tail_mode"],
            [[args.k, args.sigma, args.t, tv.value.real, tv.value.imag, tv.tail_bound, tv.x_used,
              trunc.tail_estimate_mode]], EXIT_OK)


def cmd_laplace_kober(args, rc):
    sigmas = [float(v) for v in args.sigmas.split(",")]
    grid = obtain_grid(rc, max(10.0, max(40.0 / (2 * s) for s in sigmas)))
    rows = [[s, kober_residual(s, grid, rc.eval_config())] for s in sigmas]
    return ["sigma", "R"], rows, EXIT_OK


def cmd_laplace_atkinson(args, rc):
    fit = atkinson_fit(obtain_grid(rc, 40.0 / 0.005), cfg=rc.eval_config())
    cols = ["A", "B", "C", "D", "E", "leading_rel_error", "rms_residual"]
    return cols, [list(fit.coeffs) + [fit.leading_rel_error, fit.rms_residual]], EXIT_OK


_VERDICT_EXIT = {PASS: EXIT_OK, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}
_REPORT_COLS = ["name", "lhs", "rhs", "abs_diff", "rel_diff", "tolerance", "verdict", "budgets"]


def _report_rows(rep):
    return [[rep.name, rep.lhs, rep.rhs, rep.abs_diff, rep.rel_diff, rep.tolerance, rep.verdict,
             json.dumps(rep.budgets, sort_keys=True)]]


def cmd_verify(args, rc):
    tol = rc.tolerances()
    what = args.what
    if what == "parseval":
        trunc = rc.truncation()
        rep = parseval_check(args.k, args.sigma, obtain_grid(rc, trunc.x_max), trunc, tol)
    elif what in ("theorem1", "theorem2"):
        if not args.sigma > 1:
            raise DomainError("sigma must exceed 1")
        data = MomentData(obtain_grid(rc, 1.0e4))
        check = theorem1_check if what == "theorem1" else theorem2_check
        rep = check(args.sigma, data, None, tol)
    elif what == "expsum":
        return _verify_expsum(args, rc)
    else:
        return _verify_inversion(args, rc)
    return _REPORT_COLS, _report_rows(rep), _VERDICT_EXIT[rep.verdict]


def _verify_expsum(args, rc):
    k, T = args.k, args.T
    if k not in (1, 3):
        raise ConfigurationError("expsum supports k = 1 or 3")
    if T < 2 * math.pi:
        raise DomainError("T must be >= 2 pi")
    F = cumulative_F(k, obtain_grid(rc, 2 * T))
    lhs = F(2 * T) - F(T)
    rhs = expsum_main(k, T, divisor_table(k, max(expsum_range(k, T)[1], 2)))
    bound = 3 * T ** (k / 4)
    verdict = PASS if abs(lhs - rhs) <= bound else FAIL
    cols = ["k", "T", "lhs", "rhs", "abs_diff", "bound", "verdict"]
    return cols, [[k, T, lhs, rhs, abs(lhs - rhs), bound, verdict]], _VERDICT_EXIT[verdict]


def _verify_inversion(args, rc):
    trunc = rc.truncation(t_max=max(args.U, 10.0))
    res = mellin_invert_Zk(args.k, args.x, args.c, args.U, obtain_grid(rc, trunc.x_max), trunc,
                           threads=rc.n_threads)
    direct = hardy_Z(args.x, rc.eval_config()) ** args.k
    err = abs(res.value - direct)
    verdict = PASS if err <= rc.tol_inversion else FAIL
    cols = ["k", "x", "c", "U", "recovered", "imag", "direct", "abs_err", "verdict"]
    return cols, [[args.k, args.x, args.c, args.U, res.value, res.imag, direct, err, verdict]], \
        _VERDICT_EXIT[verdict]


def cmd_suite(args, rc):
    ctx = acceptance.AcceptanceContext(threads=rc.n_threads)
    results = acceptance.run_acceptance(ctx=ctx, emit=lambda s: print(s, file=sys.stderr))
    rows = [[r.number, r.name, "pass" if r.passed else "fail", r.detail] for r in results]
    code = EXIT_OK if all(r.passed for r in results) else EXIT_FAIL
    return ["criterion", "name", "status", "detail"], rows, code


# ----------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", help="key = value configuration file")
    g.add_argument("--format", dest="opt_format", choices=["csv", "json"])
    g.add_argument("--threads", dest="opt_threads", type=int)
    g.add_argument("--step", dest="opt_step", type=float, help="grid step")
    g.add_argument("--method", dest="opt_method", choices=[FAST, ORACLE])
    g.add_argument("--rs-terms", dest="opt_rs_terms", type=int)
    g.add_argument("--x-max", dest="opt_x_max", type=float)
    g.add_argument("--t-max", dest="opt_t_max", type=float)
    g.add_argument("--tail-mode", dest="opt_tail_mode", choices=list(TAIL_MODES))
    g.add_argument("--cache-dir", dest="opt_cache_dir", help=f"overrides ${CACHE_ENV}")

    p = _Parser(prog="hardyz", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"hardyz {__version__}")
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    z = sub.add_parser("z", help="evaluate or scan Z(t)").add_subparsers(dest="action", required=True,
                                                                          parser_class=_Parser)
    s = z.add_parser("eval", parents=[common])
    s.add_argument("--t", type=float, nargs="+", required=True)
    s.set_defaults(func=cmd_z_eval)
    s = z.add_parser("scan", parents=[common])
    s.add_argument("--from", dest="t_from", type=float, required=True)
    s.add_argument("--to", dest="t_to", type=float, required=True)
    s.set_defaults(func=cmd_z_scan)

    gr = sub.add_parser("grid", parents=[common], help="build or extend a stored Z grid")
    gr.add_argument("action", choices=["build", "extend"])
    gr.add_argument("--to", type=float, required=True)
    gr.add_argument("--path", help="grid file (default: the cache directory)")
    gr.set_defaults(func=cmd_grid)

    m = sub.add_parser("moments", help="cumulative moment tables").add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = m.add_parser("table", parents=[common])
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--to", type=float, required=True)
    s.add_argument("--every", type=float, help="row spacing in T")
    s.set_defaults(func=cmd_moments_table)

    f = sub.add_parser("fit", help="P_4 and growth-exponent fits").add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = f.add_parser("p4", parents=[common])
    s.add_argument("--to", type=float, required=True)
    s.set_defaults(func=cmd_fit_p4)
    s = f.add_parser("growth", parents=[common])
    s.add_argument("--series", choices=["F1", "F3", "F5"], required=True)
    s.add_argument("--window", required=True, help="a,b")
    s.set_defaults(func=cmd_fit_growth)

    me = sub.add_parser("mellin", help="modified Mellin transform values").add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = me.add_parser("eval", parents=[common])
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--t", type=float, default=0.0)
    s.set_defaults(func=cmd_mellin_eval)

    la = sub.add_parser("laplace", help="Laplace transform diagnostics").add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = la.add_parser("kober", parents=[common])
    s.add_argument("--sigmas", default="0.05,0.02,0.01,0.005")
    s.set_defaults(func=cmd_laplace_kober)
    s = la.add_parser("atkinson-l4", parents=[common])
    s.set_defaults(func=cmd_laplace_atkinson)

    v = sub.add_parser("verify", help="identity and bound checks").add_subparsers(dest="what", required=True, parser_class=_Parser)
    s = v.add_parser("parseval", parents=[common])
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--sigma", type=float, required=True)
    for name in ("theorem1", "theorem2"):
        s2 = v.add_parser(name, parents=[common])
        s2.add_argument("--sigma", type=float, required=True)
        s2.set_defaults(func=cmd_verify)
    s.set_defaults(func=cmd_verify)
    s = v.add_parser("expsum", parents=[common])
    s.add_argument("--k", type=int, choices=[1, 3], required=True)
    s.add_argument("--T", type=float, required=True)
    s.set_defaults(func=cmd_verify)
    s = v.add_parser("inversion", parents=[common])
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--c", type=float, default=1.5)
    s.add_argument("--U", type=float, default=200.0)
    s.set_defaults(func=cmd_verify)

    su = sub.add_parser("suite", help="run the acceptance criteria").add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = su.add_parser("acceptance", parents=[common])
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = make_run_config(args)
        sys.stderr.write(reproducibility_block(rc))
        cols, rows, code = args.func(args, rc)
    except _INPUT_ERRORS as exc:
        print(f"hardyz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HardyZError, ArithmeticError, OSError, ValueError) as exc:
        print(f"hardyz: computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    meta = {"version": __version__, "config_hash": rc.digest(),
            "cfg_fingerprint": rc.eval_config().fingerprint(), "command": args.group}
    emit_table(cols, rows, meta, rc.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
