"""Instance x guess x field-intensity sweeps and their statistics.

A sweep runs one conventional gap scan per (instance, delta) and one
guess-seeded scan per (instance, guess, delta).  Work items are pure
functions of their inputs, so the sweep parallelizes embarrassingly; results
are sorted by key before aggregation and the output is byte-identical for a
fixed master seed regardless of worker count.
"""

from __future__ import annotations

import csv
import json
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError
from .hamiltonian import CAQC, SAQC, HatFunction, ScheduleSpec
from .sat import Assignment, CnfInstance, generate_usa_instance, guess_metrics
from .spectral import DEFAULT_GRID_POINTS, epsilon_upper_bound, scan_schedule

SQRT2 = float(np.sqrt(2.0))

FULL_DELTA_GRID = tuple(round(0.5 * k, 1) for k in range(1, 21))  # 0.5 .. 10.0
DESK_DELTA_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
STATIONARY_DELTA_GRID = (8.0, 10.0)  # supplementary points in the flat regime

CSV_HEADER = [
    "instance_id", "n", "m", "solution", "guess", "bf", "uc",
    "delta", "mode", "g_min", "s_star", "e_measured", "e_bound",
]


@dataclass(frozen=True)
class SweepConfig:
    """Everything needed to reproduce one sweep."""

    n: int
    m: int
    instance_count: int
    guess_policy: str | int = "all"  # "all" = every bitstring, int = random subset
    delta_grid: tuple[float, ...] = FULL_DELTA_GRID
    grid_points: int = DEFAULT_GRID_POINTS
    seed: int = 0
    modes: tuple[str, ...] = (CAQC, SAQC)
    hat_kind: str = HatFunction.THREE_S_ONE_MINUS_S

    def __post_init__(self):
        if self.instance_count < 1:
            raise InputError("need at least one instance")
        if self.instance_count > (1 << self.n):
            raise InputError(
                f"instance_count {self.instance_count} exceeds 2^{self.n} "
                "distinct solutions"
            )
        if any(d <= 0 for d in self.delta_grid):
            raise InputError("delta values must be positive")
        if isinstance(self.guess_policy, int) and self.guess_policy < 1:
            raise InputError("random guess subset must be >= 1")
        for mode in self.modes:
            if mode not in (CAQC, SAQC):
                raise InputError(f"unknown mode {mode!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        for key in ("delta_grid", "modes"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


def desk_preset_n6(seed: int = 1) -> SweepConfig:
    """CI-speed preset: 16 six-variable instances, every guess, reduced
    delta grid plus two stationary-regime points."""
    return SweepConfig(
        n=6, m=26, instance_count=16,
        delta_grid=DESK_DELTA_GRID + STATIONARY_DELTA_GRID,
        seed=seed,
    )


def desk_preset_n7(seed: int = 1) -> SweepConfig:
    return SweepConfig(
        n=7, m=30, instance_count=16,
        delta_grid=DESK_DELTA_GRID,
        seed=seed,
    )


@dataclass(frozen=True)
class SweepRow:
    """One completed gap scan."""

    instance_id: int
    n: int
    m: int
    solution: str
    guess: str | None  # None for the conventional baseline
    bf: int | None
    uc: int | None
    delta: float
    mode: str
    g_min: float
    s_star: float
    e_measured: float
    e_bound: float

    def key(self) -> tuple:
        return (self.instance_id, self.mode, self.guess or "", self.delta)


@dataclass(frozen=True)
class SweepFailure:
    key: tuple
    message: str


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    failures: list[SweepFailure] = field(default_factory=list)


@dataclass(frozen=True)
class GroupStats:
    """Median minimum gap within one (group, delta) cell."""

    key_name: str  # "bf" or "uc"
    group_value: int
    delta: float
    median_g_min: float
    count: int


@dataclass(frozen=True)
class ProbabilityCurve:
    """Empirical probability of a gap criterion per delta."""

    criterion: str
    points: dict[float, tuple[float, int]]  # delta -> (probability, sample count)


def generate_sweep_instances(cfg: SweepConfig) -> list[CnfInstance]:
    """Seeded instance pool with pairwise-distinct unique solutions."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    instances: list[CnfInstance] = []
    used_solutions: set[int] = set()
    while len(instances) < cfg.instance_count:
        inst = generate_usa_instance(cfg.n, cfg.m, rng)
        if inst.unique_solution.value in used_solutions:
            continue
        used_solutions.add(inst.unique_solution.value)
        instances.append(inst)
    return instances


def select_guesses(cfg: SweepConfig) -> list[Assignment]:
    """Guess pool shared by every instance of the sweep."""
    if cfg.guess_policy == "all":
        return [Assignment(cfg.n, v) for v in range(1 << cfg.n)]
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[1])
    values = rng.choice(1 << cfg.n, size=cfg.guess_policy, replace=False)
    return [Assignment(cfg.n, int(v)) for v in sorted(values)]


def _work_items(cfg: SweepConfig, instances, guesses):
    for instance_id, inst in enumerate(instances):
        for delta in cfg.delta_grid:
            if CAQC in cfg.modes:
                yield (instance_id, inst, None, delta, cfg)
            if SAQC in cfg.modes:
                for guess in guesses:
                    yield (instance_id, inst, guess, delta, cfg)


def _compute_row(item) -> SweepRow:
    instance_id, inst, guess, delta, cfg = item
    if guess is None:
        schedule = ScheduleSpec(CAQC, inst, delta)
        bf = uc = None
        guess_text = None
    else:
        schedule = ScheduleSpec(
            SAQC, inst, delta, guess=guess, hat=HatFunction(cfg.hat_kind)
        )
        metrics = guess_metrics(inst, guess)
        bf, uc = metrics.bf, metrics.uc
        guess_text = guess.to_string()
    scan, e_measured = scan_schedule(schedule, grid_points=cfg.grid_points)
    return SweepRow(
        instance_id=instance_id,
        n=inst.n,
        m=inst.m,
        solution=inst.unique_solution.to_string(),
        guess=guess_text,
        bf=bf,
        uc=uc,
        delta=delta,
        mode=schedule.mode,
        g_min=scan.g_min,
        s_star=scan.s_star,
        e_measured=e_measured,
        e_bound=epsilon_upper_bound(inst.n, inst.alpha, delta),
    )


def _compute_row_safe(item):
    instance_id, inst, guess, delta, _ = item
    key = (instance_id, "caqc" if guess is None else "saqc",
           guess.to_string() if guess is not None else "", delta)
    try:
        return _compute_row(item), None
    except Exception as exc:  # row-level isolation: the sweep must survive
        return None, SweepFailure(key=key, message=f"{type(exc).__name__}: {exc}")


def run_sweep(
    cfg: SweepConfig,
    jobs: int = 1,
    checkpoint_path=None,
    progress=None,
) -> SweepResult:
    """Execute the full sweep; resumable through a JSONL checkpoint file."""
    instances = generate_sweep_instances(cfg)
    guesses = select_guesses(cfg)
    items = list(_work_items(cfg, instances, guesses))

    completed: dict[tuple, SweepRow] = {}
    if checkpoint_path and os.path.exists(checkpoint_path):
        for row in _read_checkpoint(checkpoint_path):
            completed[row.key()] = row

    def item_key(item):
        instance_id, _, guess, delta, _cfg = item
        mode = CAQC if guess is None else SAQC
        return (instance_id, mode, guess.to_string() if guess else "", delta)

    pending = [item for item in items if item_key(item) not in completed]

    checkpoint_fh = open(checkpoint_path, "a") if checkpoint_path else None
    failures: list[SweepFailure] = []
    try:
        if jobs > 1 and pending:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                outcomes = pool.map(_compute_row_safe, pending, chunksize=16)
                for done, (row, failure) in enumerate(outcomes, start=1):
                    _record(row, failure, completed, failures, checkpoint_fh)
                    if progress:
                        progress(done, len(pending))
        else:
            for done, item in enumerate(pending, start=1):
                row, failure = _compute_row_safe(item)
                _record(row, failure, completed, failures, checkpoint_fh)
                if progress:
                    progress(done, len(pending))
    finally:
        if checkpoint_fh:
            checkpoint_fh.close()

    rows = sorted(completed.values(), key=SweepRow.key)
    return SweepResult(config=cfg, rows=rows, failures=failures)


def _record(row, failure, completed, failures, checkpoint_fh):
    if failure is not None:
        failures.append(failure)
        return
    completed[row.key()] = row
    if checkpoint_fh:
        checkpoint_fh.write(json.dumps(asdict(row)) + "\n")
        checkpoint_fh.flush()


def _read_checkpoint(path) -> list[SweepRow]:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(SweepRow(**json.loads(line)))
    return rows


# --- serialization ---------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(rows: list[SweepRow], path) -> None:
    """Exact-header CSV, rows sorted by key; stable byte-for-byte for a
    fixed seed."""
    rows = sorted(rows, key=SweepRow.key)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_cell(getattr(row, name)) for name in CSV_HEADER])


def read_rows_csv(path) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise InputError(f"unexpected CSV header in {path}: {reader.fieldnames}")
        for record in reader:
            rows.append(
                SweepRow(
                    instance_id=int(record["instance_id"]),
                    n=int(record["n"]),
                    m=int(record["m"]),
                    solution=record["solution"],
                    guess=record["guess"] or None,
                    bf=int(record["bf"]) if record["bf"] else None,
                    uc=int(record["uc"]) if record["uc"] else None,
                    delta=float(record["delta"]),
                    mode=record["mode"],
                    g_min=float(record["g_min"]),
                    s_star=float(record["s_star"]),
                    e_measured=float(record["e_measured"]),
                    e_bound=float(record["e_bound"]),
                )
            )
    return rows


def write_rows_jsonl(rows: list[SweepRow], path) -> None:
    with open(path, "w") as fh:
        for row in sorted(rows, key=SweepRow.key):
            fh.write(json.dumps(asdict(row)) + "\n")


# --- statistics ------------------------------------------------------------

def median_by_group(rows: list[SweepRow], key: str) -> list[GroupStats]:
    """Median guess-seeded g_min per (group value, delta).

    `key` is "bf" or "uc".  Even-sized groups use the midpoint-average
    median; empty groups are omitted rather than zero-filled.
    """
    if key not in ("bf", "uc"):
        raise InputError(f"group key must be 'bf' or 'uc', got {key!r}")
    if not rows:
        raise InputError("no rows to group")
    groups: dict[tuple[int, float], list[float]] = {}
    for row in rows:
        if row.mode != SAQC:
            continue
        value = getattr(row, key)
        groups.setdefault((value, row.delta), []).append(row.g_min)
    stats = []
    for (value, delta), gaps in sorted(groups.items()):
        stats.append(
            GroupStats(
                key_name=key,
                group_value=value,
                delta=delta,
                median_g_min=float(statistics.median(gaps)),
                count=len(gaps),
            )
        )
    return stats


def pooled_median(rows: list[SweepRow], delta: float, mode: str = SAQC) -> float:
    gaps = [r.g_min for r in rows if r.mode == mode and r.delta == delta]
    if not gaps:
        raise InputError(f"no {mode} rows at delta={delta}")
    return float(statistics.median(gaps))


def caqc_baseline(rows: list[SweepRow]) -> dict[tuple[int, float], float]:
    """(instance_id, delta) -> conventional-schedule minimum gap."""
    return {
        (row.instance_id, row.delta): row.g_min
        for row in rows
        if row.mode == CAQC
    }


def probability_curves(rows: list[SweepRow]) -> list[ProbabilityCurve]:
    """Fraction of guesses whose gap beats the conventional baseline.

    Produces: the plain >= criterion, the factor-sqrt(2) ("at least twice as
    fast") criterion, the same restricted to bit-flip groups 3 and 4, and one
    conditional curve per observed unsatisfied-clause count.
    """
    baseline = caqc_baseline(rows)
    if not baseline:
        raise InputError("no conventional baseline rows present")

    def collect(predicate, restrict=None):
        points: dict[float, tuple[float, int]] = {}
        per_delta: dict[float, list[bool]] = {}
        for row in rows:
            if row.mode != SAQC:
                continue
            if restrict is not None and not restrict(row):
                continue
            ref = baseline.get((row.instance_id, row.delta))
            if ref is None:
                continue
            per_delta.setdefault(row.delta, []).append(predicate(row, ref))
        for delta, hits in sorted(per_delta.items()):
            points[delta] = (sum(hits) / len(hits), len(hits))
        return points

    curves = [
        ProbabilityCurve("g_saqc>=g_caqc", collect(lambda r, ref: r.g_min >= ref)),
        ProbabilityCurve(
            "g_saqc>=sqrt2*g_caqc",
            collect(lambda r, ref: r.g_min >= SQRT2 * ref),
        ),
        ProbabilityCurve(
            "g_saqc>=sqrt2*g_caqc|bf=3,4",
            collect(
                lambda r, ref: r.g_min >= SQRT2 * ref,
                restrict=lambda r: r.bf in (3, 4),
            ),
        ),
    ]
    observed_uc = sorted({r.uc for r in rows if r.mode == SAQC})
    for uc in observed_uc:
        points = collect(
            lambda r, ref: r.g_min >= SQRT2 * ref,
            restrict=lambda r, uc=uc: r.uc == uc,
        )
        if points:
            curves.append(ProbabilityCurve(f"g_saqc>=sqrt2*g_caqc|uc={uc}", points))
    return curves


def two_trial_success(p1: float) -> float:
    """Success probability of two independent trials at single-trial rate p1."""
    if not 0.0 <= p1 <= 1.0:
        raise InputError(f"probability must lie in [0, 1], got {p1}")
    return 1.0 - (1.0 - p1) ** 2


def write_group_stats_csv(stats: list[GroupStats], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group_key", "group_value", "delta", "median_g_min", "count"])
        for s in stats:
            writer.writerow(
                [s.key_name, s.group_value, _cell(s.delta),
                 _cell(s.median_g_min), s.count]
            )


def write_curves_csv(curves: list[ProbabilityCurve], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["criterion", "delta", "probability", "count"])
        for curve in curves:
            for delta, (prob, count) in sorted(curve.points.items()):
                writer.writerow([curve.criterion, _cell(delta), _cell(prob), count])
