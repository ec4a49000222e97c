"""Binary persistence for Z grids and cumulative-series checkpoints.

Grid file layout (little-endian)::

    magic        8 bytes  b"HZGRID01"
    t_min        f64
    t_max        f64
    step         f64
    fingerprint  32 bytes (raw sha256 of the evaluation config)
    sample_count u64
    checksum     u64      CRC-64/XZ of the payload
    payload      sample_count * f64, ascending t

Checkpoint file layout (little-endian)::

    magic        8 bytes  b"HZCKPT01"
    kind         8 bytes  series kind, NUL padded
    k            u32
    t_min        f64
    step         f64
    fingerprint  32 bytes
    count        u64
    entries      count * (T f64, value f64, comp f64)
    checksum     u64      CRC-64/XZ of every preceding byte

Every write goes to a temporary file in the same directory which is then
renamed over the target, so readers only ever see complete files.
"""
from __future__ import annotations

import contextlib
import fcntl
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import (ConfigurationError, CorruptionError, IncompatibilityError, PreconditionError,
                     RangeError)
from .moments import (Checkpoint, CumulativeSeries, ZSampleGrid, build_grid, max_admissible_step,
                      sample_count, sample_z)
from .special import DEFAULT_CONFIG, EvalConfig

GRID_MAGIC = b"HZGRID01"
CKPT_MAGIC = b"HZCKPT01"
_GRID_HEADER = struct.Struct("<8s3d32sQQ")
_CKPT_HEADER = struct.Struct("<8s8sIdd32sQ")
_CKPT_ENTRY = struct.Struct("<3d")
_CRC = struct.Struct("<Q")

GRID_HEADER_SIZE = _GRID_HEADER.size


def crc64(data: bytes) -> int:
    return kernels.crc64(data, 0)


def _atomic_write(path: Path, chunks: Sequence[bytes]):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            for c in chunks:
                fh.write(c)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------------------
# grids


def save_grid(grid: ZSampleGrid, path) -> None:
    payload = np.ascontiguousarray(grid.values, dtype="<f8").tobytes()
    header = _GRID_HEADER.pack(GRID_MAGIC, grid.t_min, grid.t_max, grid.step,
                               bytes.fromhex(grid.cfg_fingerprint), grid.n, crc64(payload))
    _atomic_write(Path(path), [header, payload])


def load_grid(path) -> ZSampleGrid:
    data = Path(path).read_bytes()
    if len(data) < GRID_HEADER_SIZE:
        raise CorruptionError(f"{path}: file shorter than the {GRID_HEADER_SIZE}-byte header")
    magic, t_min, t_max, step, fp, count, checksum = _GRID_HEADER.unpack_from(data)
    if magic != GRID_MAGIC:
        raise CorruptionError(f"{path}: unrecognized magic/version tag {magic!r}")
    end = GRID_HEADER_SIZE + 8 * count
    if len(data) != end:
        raise CorruptionError(f"{path}: payload bytes [{GRID_HEADER_SIZE}, {len(data)}) "
                              f"but the header declares [{GRID_HEADER_SIZE}, {end})")
    if not (step > 0 and t_max > t_min) or sample_count(t_min, t_max, step) != count:
        raise CorruptionError(f"{path}: sample_count {count} inconsistent with the header range")
    payload = data[GRID_HEADER_SIZE:]
    if crc64(payload) != checksum:
        raise CorruptionError(f"{path}: checksum mismatch in payload bytes [{GRID_HEADER_SIZE}, {end})")
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return ZSampleGrid(t_min, t_max, step, values, fp.hex())


def extend_grid(path, new_t_max: float, cfg: EvalConfig | None = None, step: float | None = None,
                threads: int | None = None) -> ZSampleGrid:
    """Append samples up to new_t_max; existing samples are copied, never recomputed."""
    cfg = cfg or DEFAULT_CONFIG
    old = load_grid(path)
    if cfg.fingerprint() != old.cfg_fingerprint:
        raise IncompatibilityError("evaluation config differs from the stored grid's fingerprint")
    if step is not None and step != old.step:
        raise IncompatibilityError(f"stored grid has step {old.step}, requested {step}")
    if new_t_max <= old.t_max:
        return old
    if old.step > max_admissible_step(new_t_max):
        raise ConfigurationError(f"step {old.step} too coarse for t_max = {new_t_max}; maximal "
                                 f"admissible step is {max_admissible_step(new_t_max):.6g}")
    n_new = sample_count(old.t_min, new_t_max, old.step)
    fresh = sample_z(old.t_min, old.step, old.n, n_new, cfg, threads)
    grid = ZSampleGrid(old.t_min, float(new_t_max), old.step,
                       np.concatenate([old.values, fresh]), old.cfg_fingerprint)
    save_grid(grid, path)
    return grid


# ----------------------------------------------------------------------------
# checkpoints


@dataclass(frozen=True)
class CheckpointFile:
    kind: str
    k: int
    t_min: float
    step: float
    cfg_fingerprint: str
    entries: tuple

    def __post_init__(self):
        Ts = [e.T for e in self.entries]
        if any(b <= a for a, b in zip(Ts, Ts[1:])):
            raise PreconditionError("checkpoint ladder must be strictly increasing in T")

    def at(self, T: float) -> Checkpoint:
        """The latest checkpoint with entry.T <= T."""
        best = None
        for e in self.entries:
            if e.T <= T:
                best = e
        if best is None:
            raise RangeError(f"no checkpoint at or below T = {T}")
        return best


def checkpoint_file(series: CumulativeSeries, grid: ZSampleGrid, extra: Sequence[float] = ()) -> CheckpointFile:
    return CheckpointFile(series.kind, series.k, grid.t_min, grid.step, grid.cfg_fingerprint,
                          tuple(series.checkpoints(extra)))


def save_checkpoints(ckpt: CheckpointFile, path) -> None:
    head = _CKPT_HEADER.pack(CKPT_MAGIC, ckpt.kind.encode("ascii").ljust(8, b"\0"), ckpt.k,
                             ckpt.t_min, ckpt.step, bytes.fromhex(ckpt.cfg_fingerprint),
                             len(ckpt.entries))
    body = b"".join(_CKPT_ENTRY.pack(e.T, e.value, e.comp) for e in ckpt.entries)
    _atomic_write(Path(path), [head, body, _CRC.pack(crc64(head + body))])


def load_checkpoints(path) -> CheckpointFile:
    data = Path(path).read_bytes()
    if len(data) < _CKPT_HEADER.size + _CRC.size:
        raise CorruptionError(f"{path}: file too short for a checkpoint header")
    magic, kind, k, t_min, step, fp, count = _CKPT_HEADER.unpack_from(data)
    if magic != CKPT_MAGIC:
        raise CorruptionError(f"{path}: unrecognized magic/version tag {magic!r}")
    end = _CKPT_HEADER.size + count * _CKPT_ENTRY.size
    if len(data) != end + _CRC.size:
        raise CorruptionError(f"{path}: entries should occupy bytes [{_CKPT_HEADER.size}, {end})")
    (checksum,) = _CRC.unpack_from(data, end)
    if crc64(data[:end]) != checksum:
        raise CorruptionError(f"{path}: checksum mismatch in bytes [0, {end})")
    entries = tuple(Checkpoint(*_CKPT_ENTRY.unpack_from(data, _CKPT_HEADER.size + i * _CKPT_ENTRY.size))
                    for i in range(count))
    return CheckpointFile(kind.rstrip(b"\0").decode("ascii"), k, t_min, step, fp.hex(), entries)


# ----------------------------------------------------------------------------
# cache directory


class GridCache:
    """A directory of grid files keyed by (config fingerprint, t_min, step), guarded by a lock file."""

    def __init__(self, root):
        self.root = Path(root)

    def path_for(self, fingerprint: str, t_min: float, step: float) -> Path:
        return self.root / f"grid-{fingerprint[:16]}-{t_min!r}-{step!r}.hzg"

    @contextlib.contextmanager
    def lock(self) -> Iterator[None]:
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.root / ".lock", "a+") as fh:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)

    def obtain(self, t_max: float, step: float, cfg: EvalConfig | None = None, t_min: float = 1.0,
               threads: int | None = None) -> ZSampleGrid:
        """Load, extend or build the grid [t_min, >= t_max] with the given step."""
        cfg = cfg or DEFAULT_CONFIG
        path = self.path_for(cfg.fingerprint(), t_min, step)
        with self.lock():
            if path.exists():
                return extend_grid(path, t_max, cfg, step, threads)
            grid = build_grid(t_min, t_max, step, cfg, threads)
            save_grid(grid, path)
            return grid
