"""Toolkit for Lyness recurrences with periodic coefficients,
``x_{n+2} = (a_n + x_{n+1}) / x_n``."""

__version__ = "0.1.0"

from .cycle import ParameterCycle, PhiVector, phi_products, primitive_period, rank, shift
from .dynamics import (IntervalReport, OrbitRecord, PersistenceClass, PersistenceVerdict,
                       adherence_intervals, classify_persistence, detect_period,
                       global_periodicity_test, iterate, persistence_probe, rotation_number)
from .equilibria import (Continuum, EquilibriumReport, MeromorphicVerdict, classify,
                         find_fixed_points, fixed_points_closed_form, meromorphic_obstruction,
                         origin_spectrum, resonance_test)
from .errors import (ConvergenceError, DegenerateInvariantError, DeterminantLawError,
                     DomainError, EmptyLevelError, GeometryError, IndeterminateRankError,
                     LynessError, PoleError, RangeError, UnsupportedPeriodError)
from .invariants import (InvariantForm, build_invariance_system, kernel_dimension,
                         nullspace_invariants, verify_conservation)
from .maps import (Jacobian2, PlanarPoint, compose, compose_inverse, jacobian, log_compose,
                   step, step_inverse)
from .workbench import (SSNCEvidence, build_integrable_cycle, check_degenerate_family,
                        check_linear_case, check_lyness_conjugacy, ssnc_probe,
                        unique_fixed_point_sufficient)
