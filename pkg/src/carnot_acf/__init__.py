"""Symbolic-numeric toolkit for non-monotone ACF-type functionals on Carnot groups.

Layers:

* :mod:`carnot_acf.ratpoly` - exact rational multivariate polynomials with
  stratified weights and the text grammar.
* :mod:`carnot_acf.group` - Carnot group presets, validation, commutators,
  group laws.
* :mod:`carnot_acf.hcalc` - horizontal gradient / divergence / sub-Laplacian.
* :mod:`carnot_acf.counterexample` - the exact 5x5 construction with
  machine-checked certificates.
* :mod:`carnot_acf.acf` - seeded Monte-Carlo evaluation of the weighted
  energy curves on groups with a closed-form gauge.
* :mod:`carnot_acf.cli` - the ``carnot-acf`` command-line front end.
"""

from .ratpoly import Polynomial, StratifiedWeights, format_poly, parse_poly
from .group import (
    CarnotGroup,
    make_engel,
    make_euclidean,
    make_heisenberg,
    make_step2,
    parse_group_ref,
    validate_group,
)
from .hcalc import horizontal_gradient, is_harmonic, sublaplacian
from .counterexample import CounterexampleResult, construct
from .acf import gauge_for, j_curve, mc_ball_oracle, phi_curve, quartic_coeffs, shell_integrate

__version__ = "0.1.0"

__all__ = [
    "Polynomial",
    "StratifiedWeights",
    "format_poly",
    "parse_poly",
    "CarnotGroup",
    "make_engel",
    "make_euclidean",
    "make_heisenberg",
    "make_step2",
    "parse_group_ref",
    "validate_group",
    "horizontal_gradient",
    "is_harmonic",
    "sublaplacian",
    "CounterexampleResult",
    "construct",
    "gauge_for",
    "j_curve",
    "mc_ball_oracle",
    "phi_curve",
    "quartic_coeffs",
    "shell_integrate",
    "__version__",
]
