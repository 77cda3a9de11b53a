"""Canonical-ensemble statistics of ideal bosons in a 3D harmonic trap.

Fixed-N partition functions and occupation moments are computed by
saddle-tilted contour quadrature (canonical), checked against an exact
recursion and brute-force enumeration (oracle), and compared with
grand-canonical closed forms (grand_canonical) and large-N estimates
(asymptotics). The sweep, validate, and cli modules drive batch runs.
"""

__version__ = "0.1.0"

from .spectrum import (
    ZETA3,
    DomainError,
    EnsembleParams,
    TrapSpectrum,
    critical_temperature,
    cumulative_states,
    degeneracy,
)
from .logcomplex import LogComplex, LogComplexAccumulator
from .canonical import (
    CanonicalResult,
    ConvergenceError,
    QuadratureConfig,
    ShiftInvarianceReport,
    canonical_observables,
    mb_tail_factor,
    partition_integrand,
    saddle_ground_offset,
    shift_invariance_check,
)
from .grand_canonical import (
    GrandCanonicalState,
    auto_m_max,
    excited_count_limit,
    excited_fluctuation_limit,
    mean_occupation,
    occupation_fluctuation,
    solve_fugacity,
)
from .asymptotics import (
    DELTA_N0_PREFACTOR,
    DampingCrossover,
    InteractionParams,
    condensate_fraction_limit,
    correlation_limit,
    correlation_transfer_ratio,
    correlation_transfer_ratio_limit,
    damping_crossover,
    delta_n0_fraction_limit,
    interacting_condensate_fluctuation,
    interacting_condensate_mean,
)
from .oracle import (
    EnumerationResult,
    OccupationCheckReport,
    RecursionTable,
    enumerate_exact,
    occupation_recursion_check,
    recursion_table,
)
from .sweep import (
    PRESETS,
    ScalingFit,
    SweepResult,
    SweepRow,
    compute_row,
    fit_scaling,
    run_sweep,
    temperature_grid,
    write_csv,
    write_json,
)
from .validate import ValidationReport, run_validation
