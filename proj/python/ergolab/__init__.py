"""Convergence experiments for Markov kernels in Wasserstein distance.

Thin wrapper over the C++ core: measures and exact W1 solvers, kernel
simulation, convergence estimators with confidence half-widths, rate fitting,
and the JSON scenario runner.
"""

from ergolab._core import *  # noqa: F401,F403
from ergolab._core import __doc__ as _core_doc

__doc__ = _core_doc or __doc__
__version__ = "0.1.0"
