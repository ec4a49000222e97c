"""Hardy's Z function, the error terms of its power moments and the modified
Mellin and Laplace transforms of Z^k, with desk-scale verification engines."""
from importlib.metadata import PackageNotFoundError, version as _version

from .errors import HardyZError
from .kernels import BACKEND
from .special import DEFAULT_CONFIG, ORACLE_CONFIG, EvalConfig, hardy_Z, hardy_Z_array

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree without installation
    __version__ = "0.1.0"

__all__ = ["BACKEND", "DEFAULT_CONFIG", "ORACLE_CONFIG", "EvalConfig", "HardyZError", "__version__",
           "hardy_Z", "hardy_Z_array"]
