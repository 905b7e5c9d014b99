"""Equilibrium occupation states and spectral asymptotics on confined operators.

Builds free-energy minimizers E + T*S over a catalogue of convex entropy
densities on the eigenbasis of a discretized -Laplacian + confining
potential, with certified spectral truncation, gauge-transformed global
minimizers, local observable fields, and semiclassical diagnostics.
"""

from .asymptotics import (
    ScalingFit,
    SpectralSumReport,
    WeylScan,
    fit_scaling_exponent,
    high_temperature_diagnostics,
    phase_space_volume,
    predicted_energy_exponent,
    riesz_ratio,
    riesz_ratio_constant,
    semiclassical_constant,
    spectral_sum_report,
    unit_phase_space_volume,
    weyl_ratio_scan,
)
from .entropy import EntropyModel, ExtendedReal, GrowthReport, make_model, validate_growth
from .errors import (
    ConfigError,
    GibbsKitError,
    InfeasibleConstraintError,
    ModelValidationError,
    SolverError,
    UntrustedSpectrumError,
)
from .gibbs import (
    DerivativeReport,
    GibbsState,
    GlobalMinimizer,
    OptimalityReport,
    SweepReport,
    ThermoPoint,
    build_state,
    check_optimality,
    chemical_potential_floor,
    critical_temperature,
    cutoff_energy,
    derivative_diagnostics,
    free_energy_identity_residual,
    global_entropy_minimizer,
    partition_function,
    random_feasible_occupations,
    solve_chemical_potential,
    temperature_for_energy,
    temperature_sweep,
    thermo_point,
    truncation_tail_bound,
)
from .observables import (
    AdmissibilityReport,
    ObservableFields,
    admissibility_check,
    compute_fields,
    compute_fields_materialized,
    gauge_transform,
    transform_fields,
)
from .spectral import (
    GridSpec,
    PotentialSpec,
    SpectralHamiltonian,
    assemble_and_solve,
    counting_function,
    counting_upper_bound,
    riesz_mean,
    spectral_tail_bound,
)

__version__ = "0.1.0"
