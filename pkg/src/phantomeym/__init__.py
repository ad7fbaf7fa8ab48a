"""Solver suite for static spherically symmetric SU(2) Einstein-Yang-Mills
wormholes supported by a phantom scalar field.

Integrate the first-order orbit equations, classify orbits, shoot for
regular (asymptotically flat) orbits and assemble two-ended solutions.
"""

from phantomeym._jit import BACKEND
from phantomeym.asym import AsymPair, CurveFamily, CurveSample, find_asym_pairs, u0_curve
from phantomeym.classifier import ClassifyPolicy, OrbitClass, OrbitKind, classify, count_w_zeros
from phantomeym.errors import (
    AsymptoticsUnconverged,
    BracketError,
    BuildError,
    DomainError,
    InadmissibleDataError,
    IntegrationFailure,
    PhantomEYMError,
    PhantomFreeError,
)
from phantomeym.integrator import (
    Event,
    EventKind,
    IntegrationControls,
    Termination,
    Trajectory,
    integrate,
    bound_violations,
)
from phantomeym.model import (
    EnergyPair,
    InitialData,
    OrbitState,
    constraint_residual,
    energies,
    initial_state,
    rhs,
    second_order_residuals,
)
from phantomeym.oracle import Family, OracleKind, oracle_mass_charges, oracle_state, oracle_states
from phantomeym.shooting import Axis, ShotResult, bracket_axis, find_sequence
from phantomeym.wormhole import (
    WormholeSolution,
    asymptotics,
    build,
    mass_flux_integral,
    metric_and_phantom,
    throats_and_bellies,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AsymPair",
    "AsymptoticsUnconverged",
    "Axis",
    "BracketError",
    "BuildError",
    "ClassifyPolicy",
    "CurveFamily",
    "CurveSample",
    "DomainError",
    "EnergyPair",
    "Event",
    "EventKind",
    "Family",
    "InadmissibleDataError",
    "InitialData",
    "IntegrationControls",
    "IntegrationFailure",
    "OracleKind",
    "OrbitClass",
    "OrbitKind",
    "OrbitState",
    "PhantomEYMError",
    "PhantomFreeError",
    "ShotResult",
    "Termination",
    "Trajectory",
    "WormholeSolution",
    "asymptotics",
    "bracket_axis",
    "build",
    "classify",
    "constraint_residual",
    "count_w_zeros",
    "energies",
    "find_asym_pairs",
    "find_sequence",
    "initial_state",
    "integrate",
    "bound_violations",
    "mass_flux_integral",
    "metric_and_phantom",
    "oracle_mass_charges",
    "oracle_state",
    "oracle_states",
    "rhs",
    "second_order_residuals",
    "throats_and_bellies",
    "u0_curve",
]
