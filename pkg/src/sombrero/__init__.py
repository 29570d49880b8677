"""Sombrero / conventional adiabatic quantum computation lab for random 3-SAT.

Core pieces:
    sat          -- 3-SAT instances, unique-satisfying-assignment generation, DIMACS I/O
    hamiltonian  -- guess-encoding, clause-penalty and transverse-field operators
    spectral     -- two lowest levels along the schedule, minimum-gap location
    dynamics     -- time-dependent Schrodinger propagation and the restart protocol
    experiments  -- instance x guess x field-intensity sweeps and their statistics
    cli          -- command-line entry points
"""

__version__ = "0.1.0"

from .sat import (
    Assignment,
    Clause,
    CnfInstance,
    GuessMetrics,
    Literal,
    count_satisfying,
    evaluate_clause,
    generate_solution_cover_set,
    generate_usa_instance,
    guess_metrics,
    unsatisfied_count,
)
from .hamiltonian import (
    DiagonalOperator,
    HatFunction,
    ScheduleSpec,
    assemble,
    clause_penalty_polynomial,
    derivative,
    driver_dense,
    driver_matrix_element,
    final_hamiltonian,
    initial_hamiltonian,
)
from .spectral import (
    EigenPair2,
    GapScanResult,
    epsilon_upper_bound,
    lowest_two,
    runtime_estimate,
    scan_gap,
    scan_schedule,
)
from .dynamics import (
    PropagationConfig,
    PropagationResult,
    RestartRecord,
    propagate,
    run_restart_protocol,
    sample_measurement,
    success_probability,
)
