"""Potts spin glass variational toolkit.

Thin re-export of the compiled core: functional evaluation, minimization
over step order parameters, the cascade Monte Carlo oracle, and exact
finite-size free energies.
"""

from pottsglass._core import (
    check_condition1,
    estimate_free_energy,
    evaluate,
    minimize,
    oracle,
    xi_eval,
)

__all__ = [
    "check_condition1",
    "estimate_free_energy",
    "evaluate",
    "minimize",
    "oracle",
    "xi_eval",
]
