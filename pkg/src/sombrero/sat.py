"""3-SAT instances with unique satisfying assignments (USA).

Conventions used throughout the package:

* Variables are indexed 1..n.  Variable ``x_j`` occupies bit ``j-1`` of an
  assignment integer, i.e. ``x_1`` is the least significant bit.  String
  renderings are most-significant-first (``x_n ... x_1``), matching the ket
  ordering used by the Hamiltonian module.
* A clause is a disjunction of exactly three literals over pairwise distinct
  variables; it is unsatisfied by exactly one local bit pattern.
* Instances are immutable after construction and safe to share across
  threads/processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, GenerationError, InputError, ParseError, StateError

ENUMERATION_CAP = 24  # largest n we will exhaustively enumerate (2^n assignments)
DEFAULT_ATTEMPT_BUDGET = 10**6

CLAUSE_PHASE_TRANSITION_RATIO = 4.26  # clause/variable ratio of the hard region


@dataclass(frozen=True, order=True)
class Literal:
    """A variable occurrence, possibly negated."""

    variable: int
    negated: bool = False

    def __post_init__(self):
        if self.variable < 1:
            raise InputError(f"variable index must be >= 1, got {self.variable}")

    @classmethod
    def from_dimacs(cls, code: int) -> "Literal":
        if code == 0:
            raise InputError("0 is the DIMACS clause terminator, not a literal")
        return cls(abs(code), code < 0)

    def to_dimacs(self) -> int:
        return -self.variable if self.negated else self.variable

    def is_satisfied_by(self, value: int) -> bool:
        """True if this literal holds under assignment integer `value`."""
        bit = (value >> (self.variable - 1)) & 1
        return bit != int(self.negated)


@dataclass(frozen=True)
class Clause:
    """Disjunction of three literals over distinct variables."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise InputError(f"a clause needs exactly 3 literals, got {len(self.literals)}")
        variables = [lit.variable for lit in self.literals]
        if len(set(variables)) != 3:
            raise InputError(f"clause variables must be pairwise distinct: {variables}")

    @classmethod
    def from_dimacs(cls, codes: Iterable[int]) -> "Clause":
        lits = tuple(Literal.from_dimacs(c) for c in codes)
        if len(lits) != 3:
            raise InputError(f"expected 3 literals, got {len(lits)}")
        return cls(lits)

    def to_dimacs(self) -> tuple[int, int, int]:
        return tuple(lit.to_dimacs() for lit in self.literals)

    def max_variable(self) -> int:
        return max(lit.variable for lit in self.literals)

    def falsifying_mask_pattern(self) -> tuple[int, int]:
        """(mask, pattern) such that the clause is unsatisfied by integer z
        iff ``z & mask == pattern``.

        A positive literal fails on bit 0, a negated one on bit 1, and the
        clause fails only when all three literals do.
        """
        mask = 0
        pattern = 0
        for lit in self.literals:
            bit = 1 << (lit.variable - 1)
            mask |= bit
            if lit.negated:
                pattern |= bit
        return mask, pattern

    def canonical_key(self) -> tuple[int, ...]:
        """Order-independent identity, used for duplicate-clause rejection."""
        return tuple(sorted(self.to_dimacs(), key=abs))


@dataclass(frozen=True)
class Assignment:
    """A length-n bit vector packed into an integer (x_1 = least significant bit)."""

    n: int
    value: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"assignment needs n >= 1, got n={self.n}")
        if not 0 <= self.value < (1 << self.n):
            raise InputError(f"value {self.value} out of range for n={self.n}")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Assignment":
        """Build from (x_1, x_2, ..., x_n)."""
        value = 0
        for j, b in enumerate(bits):
            if b not in (0, 1):
                raise InputError(f"bit values must be 0/1, got {b}")
            value |= b << j
        return cls(len(bits), value)

    @classmethod
    def from_string(cls, text: str) -> "Assignment":
        """Parse a most-significant-first bitstring ``x_n ... x_1``."""
        if not text or set(text) - {"0", "1"}:
            raise InputError(f"not a bitstring: {text!r}")
        return cls(len(text), int(text, 2))

    def bit(self, variable: int) -> int:
        """Value of variable x_j (1-based)."""
        if not 1 <= variable <= self.n:
            raise InputError(f"variable {variable} out of range 1..{self.n}")
        return (self.value >> (variable - 1)) & 1

    def bits(self) -> tuple[int, ...]:
        """(x_1, ..., x_n)."""
        return tuple((self.value >> j) & 1 for j in range(self.n))

    def to_string(self) -> str:
        """Most-significant-first rendering ``x_n ... x_1``."""
        return format(self.value, f"0{self.n}b")

    def hamming(self, other: "Assignment") -> int:
        if self.n != other.n:
            raise InputError(f"length mismatch: {self.n} vs {other.n}")
        return (self.value ^ other.value).bit_count()

    def complement(self) -> "Assignment":
        return Assignment(self.n, self.value ^ ((1 << self.n) - 1))

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True)
class CnfInstance:
    """A 3-SAT formula plus (optionally) its verified unique solution.

    Duplicate clauses are rejected by default; published formulas
    occasionally repeat a clause, so `allow_duplicate_clauses` opts out of
    that check (the random generator never produces duplicates).
    """

    n: int
    clauses: tuple[Clause, ...]
    unique_solution: Assignment | None = None
    allow_duplicate_clauses: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"instance needs n >= 1, got {self.n}")
        seen = set()
        for clause in self.clauses:
            if clause.max_variable() > self.n:
                raise InputError(
                    f"clause {clause.to_dimacs()} references a variable beyond n={self.n}"
                )
            key = clause.canonical_key()
            if key in seen and not self.allow_duplicate_clauses:
                raise InputError(f"duplicate clause {clause.to_dimacs()}")
            seen.add(key)
        if self.unique_solution is not None:
            if self.unique_solution.n != self.n:
                raise InputError("solution length does not match instance n")
            if unsatisfied_count(self, self.unique_solution) != 0:
                raise InputError("declared solution does not satisfy the instance")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def alpha(self) -> float:
        return self.m / self.n

    def require_solution(self) -> Assignment:
        if self.unique_solution is None:
            raise StateError("instance carries no verified unique solution")
        return self.unique_solution


@dataclass(frozen=True)
class GuessMetrics:
    """Closeness of a guess to the unique solution."""

    bf: int  # Hamming distance guess <-> solution (bit flips)
    uc: int  # clauses left unsatisfied by the guess


def evaluate_clause(clause: Clause, a: Assignment) -> bool:
    """True iff at least one literal of the clause holds under `a`."""
    if clause.max_variable() > a.n:
        raise InputError(
            f"clause {clause.to_dimacs()} references a variable beyond n={a.n}"
        )
    return any(lit.is_satisfied_by(a.value) for lit in clause.literals)


def unsatisfied_count(inst: CnfInstance, a: Assignment) -> int:
    """Number of clauses of `inst` that `a` leaves unsatisfied."""
    if a.n != inst.n:
        raise InputError(f"assignment length {a.n} != instance n {inst.n}")
    z = a.value
    count = 0
    for clause in inst.clauses:
        mask, pattern = clause.falsifying_mask_pattern()
        if z & mask == pattern:
            count += 1
    return count


def unsatisfied_count_table(inst: CnfInstance) -> np.ndarray:
    """Unsatisfied-clause count for every assignment integer 0..2^n-1.

    Vectorized over the full assignment space; this is both the exhaustive
    satisfiability check and the diagonal of the clause-penalty Hamiltonian.
    """
    if inst.n > ENUMERATION_CAP:
        raise CapacityError(
            f"n={inst.n} exceeds the exhaustive-enumeration cap {ENUMERATION_CAP}"
        )
    z = np.arange(1 << inst.n, dtype=np.int64)
    counts = np.zeros(1 << inst.n, dtype=np.int64)
    for clause in inst.clauses:
        mask, pattern = clause.falsifying_mask_pattern()
        counts += (z & mask) == pattern
    return counts


def count_satisfying(inst: CnfInstance, cap: int = ENUMERATION_CAP) -> int:
    """Exact number of satisfying assignments, by exhaustive enumeration."""
    if inst.n > cap:
        raise CapacityError(f"n={inst.n} exceeds the enumeration cap {cap}")
    return int(np.count_nonzero(unsatisfied_count_table(inst) == 0))


def guess_metrics(inst: CnfInstance, guess: Assignment) -> GuessMetrics:
    """Bit-flip distance and unsatisfied-clause count of a guess."""
    solution = inst.require_solution()
    return GuessMetrics(bf=guess.hamming(solution), uc=unsatisfied_count(inst, guess))


def default_clause_count(n: int, ratio: float = CLAUSE_PHASE_TRANSITION_RATIO) -> int:
    """Clause count targeting the hard phase-transition ratio."""
    return round(ratio * n)


def _random_clause(n: int, rng: np.random.Generator) -> Clause:
    variables = rng.choice(n, size=3, replace=False) + 1
    negations = rng.integers(0, 2, size=3)
    return Clause(
        tuple(Literal(int(v), bool(neg)) for v, neg in zip(variables, negations))
    )


def _random_candidate(n: int, m: int, rng: np.random.Generator) -> CnfInstance:
    """One random 3-SAT instance with m distinct clauses (no USA filter)."""
    clauses: list[Clause] = []
    seen: set[tuple[int, ...]] = set()
    while len(clauses) < m:
        clause = _random_clause(n, rng)
        key = clause.canonical_key()
        if key in seen:
            continue
        seen.add(key)
        clauses.append(clause)
    return CnfInstance(n, tuple(clauses))


def generate_usa_instance(
    n: int,
    m: int | None = None,
    rng: np.random.Generator | None = None,
    max_attempts: int = DEFAULT_ATTEMPT_BUDGET,
) -> CnfInstance:
    """Rejection-sample random 3-SAT instances until one has a unique solution.

    Clauses draw 3 distinct variables uniformly with fair-coin polarities;
    duplicate clauses are resampled.  Uniqueness is verified by exhaustive
    enumeration, and the verified solution is attached to the instance.
    """
    if n < 3:
        raise InputError(f"need n >= 3 for 3-literal clauses, got n={n}")
    if m is None:
        m = default_clause_count(n)
    if m < 1:
        raise InputError(f"need m >= 1 clauses, got m={m}")
    if rng is None:
        rng = np.random.default_rng()
    for _ in range(max_attempts):
        candidate = _random_candidate(n, m, rng)
        table = unsatisfied_count_table(candidate)
        satisfying = np.flatnonzero(table == 0)
        if len(satisfying) == 1:
            solution = Assignment(n, int(satisfying[0]))
            return CnfInstance(n, candidate.clauses, unique_solution=solution)
    raise GenerationError(
        f"no unique-solution instance found in {max_attempts} candidates "
        f"(n={n}, m={m})"
    )


def generate_solution_cover_set(
    n: int,
    m: int | None = None,
    rng: np.random.Generator | None = None,
    max_attempts: int = DEFAULT_ATTEMPT_BUDGET,
    max_n: int = 8,
) -> list[CnfInstance]:
    """2^n unique-solution instances whose solutions cover every assignment.

    Candidates are sampled as in :func:`generate_usa_instance`; the first
    instance found for each still-uncovered solution is kept.
    """
    if n < 3:
        raise InputError(f"need n >= 3 for 3-literal clauses, got n={n}")
    if n > max_n:
        raise CapacityError(f"cover sets are limited to n <= {max_n}, got n={n}")
    if m is None:
        m = default_clause_count(n)
    if rng is None:
        rng = np.random.default_rng()
    found: dict[int, CnfInstance] = {}
    total = 1 << n
    for _ in range(max_attempts):
        candidate = _random_candidate(n, m, rng)
        table = unsatisfied_count_table(candidate)
        satisfying = np.flatnonzero(table == 0)
        if len(satisfying) != 1:
            continue
        key = int(satisfying[0])
        if key in found:
            continue
        found[key] = CnfInstance(
            n, candidate.clauses, unique_solution=Assignment(n, key)
        )
        if len(found) == total:
            return [found[k] for k in range(total)]
    missing = [Assignment(n, k) for k in range(total) if k not in found]
    raise GenerationError(
        f"cover incomplete after {max_attempts} candidates: "
        f"{len(missing)} of {total} solutions not found",
        missing_solutions=missing,
    )


# --- DIMACS I/O ------------------------------------------------------------
#
# Standard "p cnf <n> <m>" format.  A verified unique solution persists in an
# extension comment line "c usa-solution <bitstring x_n...x_1>".

SOLUTION_COMMENT_TAG = "usa-solution"


def write_dimacs(inst: CnfInstance, path) -> None:
    with open(path, "w") as fh:
        if inst.unique_solution is not None:
            fh.write(f"c {SOLUTION_COMMENT_TAG} {inst.unique_solution.to_string()}\n")
        fh.write(f"p cnf {inst.n} {inst.m}\n")
        for clause in inst.clauses:
            fh.write(" ".join(str(code) for code in clause.to_dimacs()) + " 0\n")


def read_dimacs(path) -> CnfInstance:
    n = None
    m = None
    clauses: list[Clause] = []
    solution_text = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("c"):
                fields = line.split()
                if len(fields) >= 3 and fields[1] == SOLUTION_COMMENT_TAG:
                    solution_text = fields[2]
                continue
            if line.startswith("p"):
                fields = line.split()
                if len(fields) != 4 or fields[1] != "cnf":
                    raise ParseError(f"{path}:{lineno}: malformed problem line {line!r}")
                n, m = int(fields[2]), int(fields[3])
                continue
            if n is None:
                raise ParseError(f"{path}:{lineno}: clause before problem line")
            try:
                codes = [int(tok) for tok in line.split()]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if not codes or codes[-1] != 0:
                raise ParseError(f"{path}:{lineno}: clause line must end in 0")
            try:
                clauses.append(Clause.from_dimacs(codes[:-1]))
            except InputError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if n is None:
        raise ParseError(f"{path}: missing problem line")
    if m is not None and m != len(clauses):
        raise ParseError(f"{path}: header declares {m} clauses, found {len(clauses)}")
    solution = None
    if solution_text is not None:
        solution = Assignment.from_string(solution_text)
        if solution.n != n:
            raise ParseError(f"{path}: solution comment length != n")
    return CnfInstance(n, tuple(clauses), unique_solution=solution)


def all_assignments(n: int):
    """Iterate every Assignment of n variables in integer order."""
    return (Assignment(n, value) for value in range(1 << n))
