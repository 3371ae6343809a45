"""Simulator for multi-photon interference in a four-mode complex Hadamard
optical network whose variable phase is a waveplate geometric phase."""

__version__ = "0.1.0"

from .linalg import (
    equal_up_to_diagonal_phases,
    equal_up_to_global_phase,
    haar_unitary,
    is_unitary,
    permanent,
    submatrix_with_repetition,
)
from .polarization import (
    JONES_STATES,
    RAIL_INPUTS,
    RAIL_PRESETS,
    GeometricPhaseReport,
    RailProgram,
    RetarderSpec,
    SpherePath,
    geodesic_path,
    geometric_phase_report,
    jones_from_stokes,
    jones_vector,
    lune_vertices,
    pancharatnam_phase,
    parallel_transport_residual,
    rail_composite,
    rail_program,
    solid_angle,
    stokes_vector,
    trace_path,
    waveplate_matrix,
)
from .circuits import (
    Beamsplitter,
    MeshPlan,
    ModeCircuit,
    PhaseShift,
    Swap,
    beamsplitter_matrix,
    circuit_from_json,
    circuit_to_json,
    circuit_unitary,
    h4,
    h4_circuit,
    is_complex_hadamard,
    path_count,
    physical_unitary,
    reck_decompose,
    recompose,
    theta_prime_of,
)
from .interference import (
    coincidence_probability,
    conditional_coincidences,
    enumerate_patterns,
    evolve,
    hom_visibility,
    singles_distribution,
)
from .experiment import (
    CountRecord,
    FitError,
    FitResult,
    SweepConfig,
    fit_fringe,
    fit_pair_fringes,
    relative_standard_error,
    residual_phase_amplitude,
    simulate_sweep,
    subtract_accidentals,
    theta_prime,
)
