"""Operators for the guess-seeded and conventional adiabatic schedules.

Basis convention: computational basis states are labelled by integers z in
[0, 2^N); bit n-1 of z is the value of qubit q_n, matching the assignment
encoding of :mod:`sombrero.sat` (x_1 = least significant bit).

The two diagonal pieces are stored as length-2^N vectors:

* the guess-encoding operator, whose entry at z is the Hamming distance
  between z and the guess (unique zero at the guess itself);
* the clause-penalty operator, whose entry at z counts the clauses the
  assignment z leaves unsatisfied.

The transverse-field driver delta * sum_n (I - sigma_x_n)/2 is kept implicit
(element rule) and densified only when a full matrix is needed: its diagonal
is uniformly delta*N/2 and it couples basis states one bit flip apart with
amplitude -delta/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SombreroError
from .sat import Assignment, Clause, CnfInstance, unsatisfied_count_table

CAQC = "caqc"
SAQC = "saqc"

DENSE_QUBIT_CAP = 14  # beyond this a dense 2^N x 2^N matrix is unreasonable


@dataclass(frozen=True)
class DiagonalOperator:
    """A diagonal operator in the computational basis."""

    n_qubits: int
    diag: np.ndarray

    def __post_init__(self):
        if len(self.diag) != 1 << self.n_qubits:
            raise InputError(
                f"diagonal length {len(self.diag)} != 2^{self.n_qubits}"
            )
        if not np.all(np.isfinite(self.diag)):
            raise InputError("diagonal entries must be finite")


def _check_n_qubits(n_qubits: int) -> None:
    if n_qubits < 1:
        raise InputError(f"need at least 1 qubit, got {n_qubits}")
    if n_qubits > DENSE_QUBIT_CAP:
        raise InputError(f"n_qubits={n_qubits} exceeds dense cap {DENSE_QUBIT_CAP}")


def initial_hamiltonian(guess: Assignment) -> DiagonalOperator:
    """Diagonal operator with the guess as unique zero-energy state.

    Entry at z is the Hamming distance between z and the guess, so the
    spectrum is {0, ..., N} with binomial multiplicities.
    """
    _check_n_qubits(guess.n)
    z = np.arange(1 << guess.n, dtype=np.uint64)
    diag = np.bitwise_count(z ^ np.uint64(guess.value)).astype(np.float64)
    return DiagonalOperator(guess.n, diag)


def final_hamiltonian(inst: CnfInstance) -> DiagonalOperator:
    """Clause-penalty diagonal: entry at z = number of unsatisfied clauses."""
    _check_n_qubits(inst.n)
    return DiagonalOperator(inst.n, unsatisfied_count_table(inst).astype(np.float64))


def clause_penalty_polynomial(clause: Clause) -> dict[frozenset[int], int]:
    """Multilinear penalty polynomial of one clause over its variables.

    Returns {variable subset: integer coefficient}; the polynomial evaluates
    to 1 on the single falsifying pattern and 0 on the other seven.  Built by
    expanding the product of one factor per literal: (1 - x_v) for a positive
    literal, x_v for a negated one (using xbar = 1 - x).
    """
    poly: dict[frozenset[int], int] = {frozenset(): 1}
    for lit in clause.literals:
        if lit.negated:
            factor = {frozenset([lit.variable]): 1}
        else:
            factor = {frozenset(): 1, frozenset([lit.variable]): -1}
        product: dict[frozenset[int], int] = {}
        for vars_a, coeff_a in poly.items():
            for vars_b, coeff_b in factor.items():
                key = vars_a | vars_b
                product[key] = product.get(key, 0) + coeff_a * coeff_b
        poly = {k: c for k, c in product.items() if c != 0}
    return poly


def evaluate_penalty_polynomial(
    poly: dict[frozenset[int], int], a: Assignment
) -> int:
    """Evaluate a clause-penalty polynomial at an assignment."""
    total = 0
    for variables, coeff in poly.items():
        term = coeff
        for v in variables:
            term *= a.bit(v)
        total += term
    return total


def driver_matrix_element(n_qubits: int, delta: float, z: int, z_other: int) -> float:
    """Entry (z, z') of the transverse-field driver delta * sum_n q_n^x."""
    dim = 1 << n_qubits
    if not (0 <= z < dim and 0 <= z_other < dim):
        raise InputError(f"basis index out of range for {n_qubits} qubits")
    if z == z_other:
        return delta * n_qubits / 2.0
    if ((z ^ z_other).bit_count()) == 1:
        return -delta / 2.0
    return 0.0


def driver_dense(n_qubits: int, delta: float) -> np.ndarray:
    """Dense driver matrix: delta*N/2 on the diagonal, -delta/2 on the
    single-bit-flip (hypercube) adjacency."""
    _check_n_qubits(n_qubits)
    dim = 1 << n_qubits
    matrix = np.zeros((dim, dim))
    z = np.arange(dim)
    for bit in range(n_qubits):
        matrix[z, z ^ (1 << bit)] = -delta / 2.0
    matrix[z, z] = delta * n_qubits / 2.0
    return matrix


def driver_matvec(n_qubits: int, delta: float, psi: np.ndarray) -> np.ndarray:
    """Apply the driver to a state without densifying it."""
    out = (delta * n_qubits / 2.0) * psi
    dim = 1 << n_qubits
    z = np.arange(dim)
    for bit in range(n_qubits):
        out -= (delta / 2.0) * psi[z ^ (1 << bit)]
    return out


class HatFunction:
    """Driver envelope for the guess-seeded schedule: hat(0) = hat(1) = 0.

    Built-in kinds:
        three_s_one_minus_s  -- 3 s (1-s); same mean over [0,1] as the linear
                                ramp (1-s), the fair-comparison default
        sin_sq_pi_s          -- sin^2(pi s)
        s_one_minus_s        -- s (1-s)
    A tabulated variant wraps sampled values (no derivative available).
    """

    THREE_S_ONE_MINUS_S = "three_s_one_minus_s"
    SIN_SQ_PI_S = "sin_sq_pi_s"
    S_ONE_MINUS_S = "s_one_minus_s"
    TABULATED = "tabulated"

    _KINDS = (THREE_S_ONE_MINUS_S, SIN_SQ_PI_S, S_ONE_MINUS_S, TABULATED)

    def __init__(self, kind: str = THREE_S_ONE_MINUS_S, table=None):
        if kind not in self._KINDS:
            raise InputError(f"unknown hat kind {kind!r}; choose from {self._KINDS}")
        if kind == self.TABULATED:
            if table is None:
                raise InputError("tabulated hat needs (s_values, hat_values)")
            s_values, hat_values = (np.asarray(a, dtype=float) for a in table)
            if s_values[0] != 0.0 or s_values[-1] != 1.0:
                raise InputError("tabulated hat must span s in [0, 1]")
            if hat_values[0] != 0.0 or hat_values[-1] != 0.0:
                raise InputError("hat must vanish at s=0 and s=1")
            self._table = (s_values, hat_values)
        else:
            self._table = None
        self.kind = kind

    @classmethod
    def default(cls) -> "HatFunction":
        return cls(cls.THREE_S_ONE_MINUS_S)

    def value(self, s: float) -> float:
        if self.kind == self.THREE_S_ONE_MINUS_S:
            return 3.0 * s * (1.0 - s)
        if self.kind == self.SIN_SQ_PI_S:
            return math.sin(math.pi * s) ** 2
        if self.kind == self.S_ONE_MINUS_S:
            return s * (1.0 - s)
        s_values, hat_values = self._table
        return float(np.interp(s, s_values, hat_values))

    def derivative(self, s: float) -> float:
        if self.kind == self.THREE_S_ONE_MINUS_S:
            return 3.0 - 6.0 * s
        if self.kind == self.SIN_SQ_PI_S:
            return math.pi * math.sin(2.0 * math.pi * s)
        if self.kind == self.S_ONE_MINUS_S:
            return 1.0 - 2.0 * s
        raise SombreroError("tabulated hat functions carry no derivative")

    def __eq__(self, other):
        return isinstance(other, HatFunction) and self.kind == other.kind

    def __repr__(self):
        return f"HatFunction({self.kind!r})"


class ScheduleSpec:
    """One fully specified adiabatic schedule.

    Conventional mode interpolates (1-s) * driver(delta) + s * penalty from
    the uniform superposition; sombrero mode interpolates
    (1-s) * guess_encoding + hat(s) * driver(delta) + s * penalty from the
    guess basis state.
    """

    def __init__(
        self,
        mode: str,
        instance: CnfInstance,
        delta: float,
        guess: Assignment | None = None,
        hat: HatFunction | None = None,
    ):
        if mode not in (CAQC, SAQC):
            raise InputError(f"mode must be {CAQC!r} or {SAQC!r}, got {mode!r}")
        if mode == SAQC:
            if guess is None:
                raise InputError("sombrero mode requires a guess assignment")
            if guess.n != instance.n:
                raise InputError(
                    f"guess length {guess.n} != instance n {instance.n}"
                )
            if hat is None:
                hat = HatFunction.default()
        else:
            guess = None
            hat = None
        self.mode = mode
        self.instance = instance
        self.delta = float(delta)
        self.guess = guess
        self.hat = hat
        self._driver = None
        self._diag_initial = None
        self._diag_final = None

    @property
    def n_qubits(self) -> int:
        return self.instance.n

    @property
    def dim(self) -> int:
        return 1 << self.instance.n

    # The dense driver and both diagonals are fixed along the schedule;
    # cache them so repeated assemble() calls only scale and add.
    def driver(self) -> np.ndarray:
        if self._driver is None:
            self._driver = driver_dense(self.n_qubits, self.delta)
            self._driver.setflags(write=False)
        return self._driver

    def diag_initial(self) -> np.ndarray:
        if self.mode != SAQC:
            raise InputError("the conventional schedule has no guess-encoding term")
        if self._diag_initial is None:
            self._diag_initial = initial_hamiltonian(self.guess).diag
            self._diag_initial.setflags(write=False)
        return self._diag_initial

    def diag_final(self) -> np.ndarray:
        if self._diag_final is None:
            self._diag_final = final_hamiltonian(self.instance).diag
            self._diag_final.setflags(write=False)
        return self._diag_final

    def __getstate__(self):
        # Drop cached arrays; workers rebuild them.
        return {
            "mode": self.mode,
            "instance": self.instance,
            "delta": self.delta,
            "guess": self.guess,
            "hat": self.hat,
        }

    def __setstate__(self, state):
        self.__init__(**state)

    def __repr__(self):
        guess = self.guess.to_string() if self.guess is not None else None
        return (
            f"ScheduleSpec(mode={self.mode!r}, n={self.n_qubits}, "
            f"delta={self.delta}, guess={guess})"
        )


def _check_s(s: float) -> float:
    if not 0.0 <= s <= 1.0:
        raise InputError(f"schedule position s={s} outside [0, 1]")
    return float(s)


def assemble(schedule: ScheduleSpec, s: float) -> np.ndarray:
    """Dense symmetric Hamiltonian of the schedule at position s."""
    s = _check_s(s)
    if schedule.mode == CAQC:
        matrix = (1.0 - s) * schedule.driver()
        diag = s * schedule.diag_final()
    else:
        weight = schedule.hat.value(s)
        matrix = weight * schedule.driver()
        diag = (1.0 - s) * schedule.diag_initial() + s * schedule.diag_final()
    matrix[np.diag_indices_from(matrix)] += diag
    return matrix


def derivative(schedule: ScheduleSpec, s: float) -> np.ndarray:
    """d/ds of the assembled Hamiltonian at position s."""
    s = _check_s(s)
    if schedule.mode == CAQC:
        matrix = -schedule.driver().copy()
        diag = schedule.diag_final()
    else:
        matrix = schedule.hat.derivative(s) * schedule.driver()
        diag = schedule.diag_final() - schedule.diag_initial()
    matrix[np.diag_indices_from(matrix)] += diag
    return matrix


def uniform_superposition(n_qubits: int) -> np.ndarray:
    """Ground state of the driver: equal weight on every basis state."""
    dim = 1 << n_qubits
    return np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)


def basis_state(a: Assignment) -> np.ndarray:
    """Computational basis state for an assignment."""
    psi = np.zeros(1 << a.n, dtype=complex)
    psi[a.value] = 1.0
    return psi


def export_operator(schedule: ScheduleSpec, s: float, diagonal_only: bool = False):
    """Plain-data export of the assembled operator for external checks."""
    payload = {
        "n_qubits": schedule.n_qubits,
        "s": float(s),
        "mode": schedule.mode,
    }
    if diagonal_only:
        matrix = assemble(schedule, s)
        payload["diag"] = np.diag(matrix).tolist()
    else:
        payload["entries"] = assemble(schedule, s).tolist()
    return payload
