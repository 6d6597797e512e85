"""Normalized Ricci flow on generalized Wallach spaces with equal parameters.

Modules: ``space`` (parameters, metrics, coordinates, symmetries),
``curvature`` (signatures and boundary curves), ``fields`` (vector fields),
``integrator`` (adaptive Runge-Kutta with events), ``equilibria``,
``asymptotics``, ``sweep``, ``portrait``, ``checks`` and ``cli``.
"""

from .space import (
    PhasePoint,
    Metric3,
    SpaceParams,
    make_space,
    wallach_space,
    to_scale_invariant,
    from_scale_invariant,
)

__version__ = "0.1.0"
