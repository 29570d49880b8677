"""Time-dependent Schrodinger propagation and the restart protocol.

Integration runs over the dimensionless schedule variable s = t/tau (hbar =
1), i.e. dpsi/ds = -i tau H(s) psi, with an error-controlled Runge-Kutta
stepper.  The norm is monitored at the recorded output points and never
silently renormalized; drift beyond tolerance raises AccuracyError.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AccuracyError, InputError
from .hamiltonian import (
    SAQC,
    ScheduleSpec,
    assemble,
    basis_state,
    uniform_superposition,
)
from .sat import Assignment, CnfInstance, unsatisfied_count

NORM_TOLERANCE = 1e-6  # hard failure threshold on the final norm
DEFAULT_STEP_TOLERANCE = 1e-11  # local error target per step


@dataclass(frozen=True)
class PropagationConfig:
    """Controls for one Schrodinger propagation."""

    tau: float
    step_tolerance: float = DEFAULT_STEP_TOLERANCE
    record_overlaps: bool = False
    record_points: int = 101
    method: str = "RK45"

    def __post_init__(self):
        if self.tau < 0:
            raise InputError(f"evolution time must be >= 0, got {self.tau}")
        if self.step_tolerance <= 0:
            raise InputError("step tolerance must be positive")


@dataclass(frozen=True)
class PropagationResult:
    """Final state plus norm diagnostics and an optional trajectory."""

    amplitudes: np.ndarray
    max_norm_drift: float
    # trajectory rows: (s, success_probability, norm); empty unless requested
    trajectory: list[tuple[float, float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class RestartRound:
    guess: Assignment
    measured: Assignment
    success: bool


@dataclass(frozen=True)
class RestartRecord:
    rounds: list[RestartRound]
    succeeded: bool

    @property
    def total_rounds(self) -> int:
        return len(self.rounds)


def default_initial_state(schedule: ScheduleSpec) -> np.ndarray:
    """Ground state of the schedule at s=0: the guess basis state for the
    sombrero mode, the uniform superposition for the conventional one."""
    if schedule.mode == SAQC:
        return basis_state(schedule.guess)
    return uniform_superposition(schedule.n_qubits)


def propagate(
    schedule: ScheduleSpec,
    config: PropagationConfig,
    psi0: np.ndarray | None = None,
) -> PropagationResult:
    """Integrate dpsi/ds = -i tau H(s) psi from s=0 to s=1."""
    if psi0 is None:
        psi0 = default_initial_state(schedule)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (schedule.dim,):
        raise InputError(
            f"state shape {psi0.shape} does not match dimension {schedule.dim}"
        )
    if abs(np.linalg.norm(psi0) - 1.0) > NORM_TOLERANCE:
        raise InputError("initial state is not normalized")
    if config.tau == 0.0:
        return PropagationResult(psi0.copy(), 0.0)

    tau = config.tau
    solution_index = (
        schedule.instance.unique_solution.value
        if schedule.instance.unique_solution is not None
        else None
    )

    def rhs(s, psi):
        return -1j * tau * (assemble(schedule, s) @ psi)

    s_eval = np.linspace(0.0, 1.0, config.record_points)
    result = solve_ivp(
        rhs,
        (0.0, 1.0),
        psi0,
        method=config.method,
        t_eval=s_eval,
        rtol=config.step_tolerance,
        atol=config.step_tolerance,
    )
    if not result.success:
        raise AccuracyError(f"integrator failed: {result.message}")

    norms = np.linalg.norm(result.y, axis=0)
    max_drift = float(np.max(np.abs(norms - 1.0)))
    if abs(norms[-1] - 1.0) > NORM_TOLERANCE:
        raise AccuracyError(
            f"norm drifted to {norms[-1]:.3e} at s=1 "
            f"(tolerance {NORM_TOLERANCE}); tighten step_tolerance"
        )
    trajectory: list[tuple[float, float, float]] = []
    if config.record_overlaps:
        for k, s in enumerate(s_eval):
            overlap = (
                float(np.abs(result.y[solution_index, k]) ** 2)
                if solution_index is not None
                else float("nan")
            )
            trajectory.append((float(s), overlap, float(norms[k])))
    return PropagationResult(result.y[:, -1].copy(), max_drift, trajectory)


def success_probability(psi: np.ndarray, inst: CnfInstance) -> float:
    """Probability of measuring the unique solution."""
    solution = inst.require_solution()
    psi = np.asarray(psi)
    if psi.shape != (1 << inst.n,):
        raise InputError(f"state shape {psi.shape} does not match 2^{inst.n}")
    return float(np.abs(psi[solution.value]) ** 2)


def sample_measurement(psi: np.ndarray, rng: np.random.Generator) -> Assignment:
    """Projective computational-basis measurement."""
    psi = np.asarray(psi)
    probabilities = np.abs(psi) ** 2
    total = probabilities.sum()
    if abs(total - 1.0) > NORM_TOLERANCE:
        raise InputError(f"state norm^2 = {total:.6f} is not 1")
    n_qubits = int(np.log2(len(psi)))
    index = int(rng.choice(len(psi), p=probabilities / total))
    return Assignment(n_qubits, index)


REFINE = "refine"
RANDOM = "random"


def run_restart_protocol(
    inst: CnfInstance,
    initial_guess: Assignment,
    config: PropagationConfig,
    max_rounds: int,
    rng: np.random.Generator,
    delta: float = 1.5,
    mode: str = REFINE,
) -> RestartRecord:
    """Repeated guess-seeded runs until the measurement solves the instance.

    After a failed round the next guess is either the measured bitstring
    ("refine") or a fresh uniform random bitstring ("random").
    """
    if max_rounds < 1:
        raise InputError(f"need max_rounds >= 1, got {max_rounds}")
    if mode not in (REFINE, RANDOM):
        raise InputError(f"restart mode must be {REFINE!r} or {RANDOM!r}")
    guess = initial_guess
    rounds: list[RestartRound] = []
    for _ in range(max_rounds):
        schedule = ScheduleSpec(SAQC, inst, delta, guess=guess)
        final = propagate(schedule, config)
        measured = sample_measurement(final.amplitudes, rng)
        success = unsatisfied_count(inst, measured) == 0
        rounds.append(RestartRound(guess=guess, measured=measured, success=success))
        if success:
            return RestartRecord(rounds, succeeded=True)
        if mode == REFINE:
            guess = measured
        else:
            guess = Assignment(inst.n, int(rng.integers(0, 1 << inst.n)))
    return RestartRecord(rounds, succeeded=False)
