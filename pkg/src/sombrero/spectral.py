"""Two lowest levels along a schedule and the minimum-gap search.

The gap curve g(s) = E1(s) - E0(s) is sampled on a uniform grid (201 points
by default), the best grid point is bracketed by its neighbours, and the
bracket is refined by golden-section search down to |ds| <= 1e-6.  The
refined minimum is never allowed to exceed the best sampled value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import DegenerateGapError, InputError
from .hamiltonian import ScheduleSpec, assemble, derivative

DEFAULT_GRID_POINTS = 201
REFINE_S_TOLERANCE = 1e-6
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Dense full diagonalization is cheapest up to roughly this dimension; above
# it we ask LAPACK for the two lowest eigenpairs only.
_FULL_SOLVE_DIM = 1 << 10


@dataclass(frozen=True)
class EigenPair2:
    """Two algebraically smallest eigenvalues, optionally with eigenvectors."""

    e0: float
    e1: float
    v0: np.ndarray | None = None
    v1: np.ndarray | None = None

    @property
    def gap(self) -> float:
        return self.e1 - self.e0


@dataclass(frozen=True)
class GapScanResult:
    """Sampled gap curve with the located minimum."""

    samples: list[tuple[float, float, float]]  # (s, e0, e1)
    g_min: float
    s_star: float
    refined: bool

    def gap_curve(self) -> np.ndarray:
        """(s, gap) pairs as an array."""
        arr = np.asarray(self.samples)
        return np.column_stack([arr[:, 0], arr[:, 2] - arr[:, 1]])


@dataclass(frozen=True)
class EBound:
    """Measured matrix-element maximum and its analytic ceiling."""

    e_measured: float
    e_upper: float
    tau_lower_estimate: float


def lowest_two(matrix: np.ndarray, vectors: bool = False) -> EigenPair2:
    """Two smallest eigenvalues (and eigenvectors on request) of a dense
    symmetric matrix."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] < 2:
        raise InputError("need dimension >= 2 for a spectral gap")
    if not np.all(np.isfinite(matrix)):
        raise InputError("matrix contains non-finite entries")
    if matrix.shape[0] <= _FULL_SOLVE_DIM:
        if vectors:
            values, vecs = scipy.linalg.eigh(matrix, subset_by_index=(0, 1))
            return EigenPair2(float(values[0]), float(values[1]),
                              vecs[:, 0], vecs[:, 1])
        values = scipy.linalg.eigh(
            matrix, eigvals_only=True, subset_by_index=(0, 1)
        )
        return EigenPair2(float(values[0]), float(values[1]))
    values, vecs = scipy.sparse.linalg.eigsh(matrix, k=2, which="SA")
    order = np.argsort(values)
    values = values[order]
    vecs = vecs[:, order]
    if vectors:
        return EigenPair2(float(values[0]), float(values[1]), vecs[:, 0], vecs[:, 1])
    return EigenPair2(float(values[0]), float(values[1]))


def _gap_at(schedule: ScheduleSpec, s: float) -> float:
    return lowest_two(assemble(schedule, s)).gap


def _golden_refine(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section minimization on [a, b]; returns the best evaluated
    (x, f(x))."""
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc <= fd else (d, fd)
    while d - c > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
        candidate = (c, fc) if fc <= fd else (d, fd)
        if candidate[1] < best[1]:
            best = candidate
    return best


def scan_gap(
    schedule: ScheduleSpec,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_tolerance: float = REFINE_S_TOLERANCE,
) -> GapScanResult:
    """Locate the minimum gap of a schedule.

    Samples E0, E1 on a uniform s-grid including both endpoints, then refines
    the bracketing interval around the best grid point by golden-section
    search.
    """
    result, _ = scan_schedule(
        schedule,
        grid_points=grid_points,
        refine_tolerance=refine_tolerance,
        matrix_element=False,
    )
    return result


def scan_schedule(
    schedule: ScheduleSpec,
    grid_points: int = DEFAULT_GRID_POINTS,
    refine_tolerance: float = REFINE_S_TOLERANCE,
    matrix_element: bool = True,
) -> tuple[GapScanResult, float | None]:
    """Gap scan, optionally collecting max |<E1| dH/ds |E0>| in the same pass.

    Sharing one grid traversal halves the eigensolver work of a sweep, where
    both the minimum gap and the matrix-element maximum are recorded per
    configuration.
    """
    if grid_points < 3:
        raise InputError(f"need at least 3 grid points, got {grid_points}")
    grid = np.linspace(0.0, 1.0, grid_points)
    samples: list[tuple[float, float, float]] = []
    e_measured = 0.0
    for s in grid:
        pair = lowest_two(assemble(schedule, s), vectors=matrix_element)
        samples.append((float(s), pair.e0, pair.e1))
        if matrix_element:
            element = abs(pair.v1 @ (derivative(schedule, s) @ pair.v0))
            e_measured = max(e_measured, float(element))
    gaps = np.array([e1 - e0 for _, e0, e1 in samples])
    best_index = int(np.argmin(gaps))
    g_min = float(gaps[best_index])
    s_star = float(grid[best_index])

    lo = grid[max(best_index - 1, 0)]
    hi = grid[min(best_index + 1, grid_points - 1)]
    refined = False
    if hi > lo:
        s_ref, g_ref = _golden_refine(
            lambda s: _gap_at(schedule, s), float(lo), float(hi), refine_tolerance
        )
        if g_ref < g_min:
            g_min, s_star = g_ref, s_ref
            refined = True
    result = GapScanResult(samples=samples, g_min=g_min, s_star=s_star, refined=refined)
    return result, (e_measured if matrix_element else None)


def epsilon_measured(
    schedule: ScheduleSpec, grid_points: int = DEFAULT_GRID_POINTS
) -> float:
    """Max over the s-grid of |<E1(s)| dH/ds |E0(s)>|."""
    _, value = scan_schedule(schedule, grid_points=grid_points, matrix_element=True)
    return value


def epsilon_upper_bound(n_qubits: int, alpha: float, delta: float) -> float:
    """Analytic ceiling N (alpha + 1 + 9 |delta|) on the matrix element.

    Combines the spectral ranges of the three schedule terms: penalty <= M =
    alpha N, guess encoding <= N, and the driver envelope contributes
    (3 + 6) |delta| N through the hat derivative.
    """
    if n_qubits < 1:
        raise InputError(f"need n_qubits >= 1, got {n_qubits}")
    if alpha <= 0:
        raise InputError(f"need alpha > 0, got {alpha}")
    return n_qubits * (alpha + 1.0 + 9.0 * abs(delta))


def runtime_estimate(e_measured: float, g_min: float) -> float:
    """Adiabatic-runtime scale indicator e_measured / g_min^2.

    A lower-scale indicator only: the adiabatic condition is an inequality,
    not a runtime guarantee.
    """
    if g_min <= 0.0:
        raise DegenerateGapError(f"gap {g_min} is not positive")
    return e_measured / g_min**2


def ebound_for(
    schedule: ScheduleSpec,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> EBound:
    """Measured matrix element, its analytic ceiling and the runtime scale."""
    scan, e_meas = scan_schedule(schedule, grid_points=grid_points)
    upper = epsilon_upper_bound(
        schedule.n_qubits, schedule.instance.alpha, schedule.delta
    )
    return EBound(
        e_measured=e_meas,
        e_upper=upper,
        tau_lower_estimate=runtime_estimate(e_meas, scan.g_min),
    )
