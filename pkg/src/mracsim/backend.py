"""Selects the integration kernel: compiled extension if built, else the
pure-numpy fallback. Both expose the same run_proposed / run_baseline
contract (see _loop_py docstring)."""

from . import _loop_py

try:
    from . import _loop as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _loop_py
    BACKEND = "python"

run_proposed = _impl.run_proposed
run_baseline = _impl.run_baseline

run_proposed_py = _loop_py.run_proposed
run_baseline_py = _loop_py.run_baseline

STATUS_OK = _loop_py.STATUS_OK
STATUS_NONFINITE = _loop_py.STATUS_NONFINITE
STATUS_SINGULAR = _loop_py.STATUS_SINGULAR
PROPOSED_AUX = _loop_py.PROPOSED_AUX
BASELINE_AUX = _loop_py.BASELINE_AUX
