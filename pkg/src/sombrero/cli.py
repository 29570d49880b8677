"""Command-line surface: gen, gap, sweep, stats, propagate, restart.

Every command that writes artifacts also writes a run manifest recording the
resolved configuration, master seed and output digests.

Exit codes: 0 success, 2 usage error, 3 parse error, 4 generation failure,
5 numerical accuracy, 1 other package error.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .dynamics import (
    PropagationConfig,
    propagate as propagate_state,
    run_restart_protocol,
    success_probability,
)
from .errors import (
    AccuracyError,
    GenerationError,
    InputError,
    ParseError,
    SombreroError,
)
from .experiments import (
    SweepConfig,
    median_by_group,
    probability_curves,
    read_rows_csv,
    run_sweep,
    write_curves_csv,
    write_group_stats_csv,
    write_rows_csv,
)
from .hamiltonian import CAQC, SAQC, HatFunction, ScheduleSpec
from .manifest import write_manifest
from .sat import (
    Assignment,
    generate_solution_cover_set,
    generate_usa_instance,
    guess_metrics,
    read_dimacs,
    write_dimacs,
)
from .spectral import DEFAULT_GRID_POINTS, scan_gap

EXIT_PARSE = 3
EXIT_GENERATION = 4
EXIT_ACCURACY = 5


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InputError as exc:
            raise click.UsageError(str(exc))
        except ParseError as exc:
            click.echo(f"parse error: {exc}", err=True)
            sys.exit(EXIT_PARSE)
        except GenerationError as exc:
            click.echo(f"generation failed: {exc}", err=True)
            sys.exit(EXIT_GENERATION)
        except AccuracyError as exc:
            click.echo(f"numerical accuracy error: {exc}", err=True)
            sys.exit(EXIT_ACCURACY)
        except SombreroError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """Minimum-gap laboratory for guess-seeded adiabatic schedules on 3-SAT."""


@main.command()
@click.option("--n", type=int, required=True, help="Number of variables.")
@click.option("--m", type=int, default=None, help="Clause count (default round(4.26 n)).")
@click.option("--count", type=int, default=None, help="How many instances to generate.")
@click.option("--cover", is_flag=True,
              help="Generate 2^n instances covering every solution.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("."),
              show_default=True)
@_handle_errors
def gen(n, m, count, cover, seed, out_dir):
    """Generate verified unique-solution 3-SAT instances as DIMACS files."""
    if cover and count is not None:
        raise click.UsageError("--count and --cover are mutually exclusive")
    if not cover and count is None:
        count = 1
    rng = np.random.default_rng(seed)
    if cover:
        instances = generate_solution_cover_set(n, m, rng)
    else:
        instances = [generate_usa_instance(n, m, rng) for _ in range(count)]
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for idx, inst in enumerate(instances):
        path = out_dir / f"instance_{idx:03d}.cnf"
        write_dimacs(inst, path)
        paths.append(path)
    write_manifest(
        out_dir, "gen",
        {"n": n, "m": m, "count": count, "cover": cover},
        seed, paths,
    )
    click.echo(f"wrote {len(paths)} instance(s) to {out_dir}")


def _load_guess(instance, guess_text):
    if guess_text is None:
        if instance.unique_solution is None:
            raise click.UsageError(
                "no --guess given and the instance carries no solution comment"
            )
        return instance.unique_solution
    guess = Assignment.from_string(guess_text)
    if guess.n != instance.n:
        raise click.UsageError(
            f"guess length {guess.n} does not match instance n={instance.n}"
        )
    return guess


@main.command()
@click.argument("instance_path", type=click.Path(exists=True, path_type=Path))
@click.option("--mode", type=click.Choice([CAQC, SAQC]), default=SAQC, show_default=True)
@click.option("--guess", "guess_text", default=None,
              help="Guess bitstring x_n...x_1 (default: the stored solution).")
@click.option("--delta", type=float, default=1.5, show_default=True)
@click.option("--hat", "hat_kind",
              type=click.Choice([HatFunction.THREE_S_ONE_MINUS_S,
                                 HatFunction.SIN_SQ_PI_S,
                                 HatFunction.S_ONE_MINUS_S]),
              default=HatFunction.THREE_S_ONE_MINUS_S, show_default=True)
@click.option("--grid", "grid_points", type=int, default=DEFAULT_GRID_POINTS,
              show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write the sampled gap curve as CSV (s,e0,e1,gap).")
@_handle_errors
def gap(instance_path, mode, guess_text, delta, hat_kind, grid_points, out_path):
    """Scan the gap of one schedule and report the minimum."""
    instance = read_dimacs(instance_path)
    if mode == CAQC:
        if guess_text is not None:
            click.echo("warning: --guess is ignored in conventional mode", err=True)
        schedule = ScheduleSpec(CAQC, instance, delta)
    else:
        guess = _load_guess(instance, guess_text)
        schedule = ScheduleSpec(SAQC, instance, delta, guess=guess,
                                hat=HatFunction(hat_kind))
        if instance.unique_solution is not None:
            metrics = guess_metrics(instance, guess)
            click.echo(f"guess {guess}: bf={metrics.bf} uc={metrics.uc}")
    result = scan_gap(schedule, grid_points=grid_points)
    if out_path is not None:
        with open(out_path, "w") as fh:
            fh.write("s,e0,e1,gap\n")
            for s, e0, e1 in result.samples:
                fh.write(f"{s!r},{e0!r},{e1!r},{e1 - e0!r}\n")
        write_manifest(
            out_path.parent, "gap",
            {"instance": str(instance_path), "mode": mode, "delta": delta,
             "grid_points": grid_points},
            None, [out_path], inputs=[instance_path],
        )
    click.echo(f"g_min={result.g_min!r} s_star={result.s_star!r}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="JSON sweep config; flags override file values.")
@click.option("--n", type=int, default=None)
@click.option("--m", type=int, default=None)
@click.option("--instances", "instance_count", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, envvar="SOMBRERO_JOBS", default=1, show_default=True)
@click.option("--checkpoint", "checkpoint_path", type=click.Path(path_type=Path),
              default=None, help="JSONL checkpoint for resumable sweeps.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("."),
              show_default=True)
@_handle_errors
def sweep(config_path, n, m, instance_count, seed, jobs, checkpoint_path, out_dir):
    """Run an instance x guess x delta sweep and write the results CSV."""
    data = {}
    if config_path is not None:
        try:
            data = json.loads(config_path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{config_path}: {exc}") from exc
    overrides = {"n": n, "m": m, "instance_count": instance_count, "seed": seed}
    data.update({k: v for k, v in overrides.items() if v is not None})
    missing = [k for k in ("n", "m", "instance_count") if k not in data]
    if missing:
        raise click.UsageError(f"missing sweep parameters: {', '.join(missing)}")
    try:
        cfg = SweepConfig.from_dict(data)
    except TypeError as exc:
        raise click.UsageError(f"invalid sweep config field: {exc}")

    result = run_sweep(cfg, jobs=jobs, checkpoint_path=checkpoint_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows_path = out_dir / "rows.csv"
    write_rows_csv(result.rows, rows_path)
    write_manifest(out_dir, "sweep", cfg.to_dict(), cfg.seed, [rows_path])
    click.echo(f"{len(result.rows)} rows -> {rows_path}")
    if result.failures:
        click.echo(f"{len(result.failures)} configuration(s) failed:", err=True)
        for failure in result.failures:
            click.echo(f"  {failure.key}: {failure.message}", err=True)


@main.command()
@click.argument("rows_path", type=click.Path(exists=True, path_type=Path))
@click.option("--group", "group_key", type=click.Choice(["bf", "uc"]), default=None,
              help="Emit median g_min per (group, delta).")
@click.option("--curves", is_flag=True, help="Emit probability curves per criterion.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("."),
              show_default=True)
@_handle_errors
def stats(rows_path, group_key, curves, out_dir):
    """Aggregate a sweep results CSV into medians and probability curves."""
    if group_key is None and not curves:
        raise click.UsageError("nothing to do: pass --group and/or --curves")
    rows = read_rows_csv(rows_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    if group_key is not None:
        stats_path = out_dir / f"medians_{group_key}.csv"
        write_group_stats_csv(median_by_group(rows, group_key), stats_path)
        outputs.append(stats_path)
    if curves:
        curves_path = out_dir / "probability_curves.csv"
        write_curves_csv(probability_curves(rows), curves_path)
        outputs.append(curves_path)
    write_manifest(
        out_dir, "stats",
        {"rows": str(rows_path), "group": group_key, "curves": curves},
        None, outputs, inputs=[rows_path],
    )
    for path in outputs:
        click.echo(f"wrote {path}")


@main.command()
@click.argument("instance_path", type=click.Path(exists=True, path_type=Path))
@click.option("--mode", type=click.Choice([CAQC, SAQC]), default=SAQC, show_default=True)
@click.option("--guess", "guess_text", default=None)
@click.option("--delta", type=float, default=1.5, show_default=True)
@click.option("--tau", type=float, required=True, help="Total evolution time.")
@click.option("--tolerance", type=float, default=1e-11, show_default=True)
@click.option("--trajectory", "trajectory_path", type=click.Path(path_type=Path),
              default=None, help="Write (s, success_probability, norm) CSV.")
@_handle_errors
def propagate(instance_path, mode, guess_text, delta, tau, tolerance, trajectory_path):
    """Propagate the Schrodinger equation along a schedule."""
    instance = read_dimacs(instance_path)
    if mode == CAQC:
        schedule = ScheduleSpec(CAQC, instance, delta)
    else:
        guess = _load_guess(instance, guess_text)
        schedule = ScheduleSpec(SAQC, instance, delta, guess=guess)
    config = PropagationConfig(
        tau=tau, step_tolerance=tolerance,
        record_overlaps=trajectory_path is not None,
    )
    result = propagate_state(schedule, config)
    if trajectory_path is not None:
        with open(trajectory_path, "w") as fh:
            fh.write("s,success_probability,norm\n")
            for s, prob, norm in result.trajectory:
                fh.write(f"{s!r},{prob!r},{norm!r}\n")
        write_manifest(
            trajectory_path.parent, "propagate",
            {"instance": str(instance_path), "mode": mode, "delta": delta,
             "tau": tau, "tolerance": tolerance},
            None, [trajectory_path], inputs=[instance_path],
        )
    if instance.unique_solution is not None:
        prob = success_probability(result.amplitudes, instance)
        click.echo(f"success_probability={prob!r}")
    click.echo(f"max_norm_drift={result.max_norm_drift!r}")


@main.command()
@click.argument("instance_path", type=click.Path(exists=True, path_type=Path))
@click.option("--guess", "guess_text", default=None,
              help="Starting guess bitstring (default: random).")
@click.option("--delta", type=float, default=1.5, show_default=True)
@click.option("--tau", type=float, required=True)
@click.option("--rounds", "max_rounds", type=int, default=3, show_default=True)
@click.option("--mode", type=click.Choice(["refine", "random"]), default="refine",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Append the restart record as a JSON line.")
@_handle_errors
def restart(instance_path, guess_text, delta, tau, max_rounds, mode, seed, out_path):
    """Run the serial restart protocol on one instance."""
    instance = read_dimacs(instance_path)
    rng = np.random.default_rng(seed)
    if guess_text is None:
        guess = Assignment(instance.n, int(rng.integers(0, 1 << instance.n)))
    else:
        guess = Assignment.from_string(guess_text)
    config = PropagationConfig(tau=tau)
    record = run_restart_protocol(
        instance, guess, config, max_rounds, rng, delta=delta, mode=mode
    )
    payload = {
        "instance": str(instance_path),
        "seed": seed,
        "mode": mode,
        "tau": tau,
        "delta": delta,
        "succeeded": record.succeeded,
        "rounds": [
            {"guess": r.guess.to_string(), "measured": r.measured.to_string(),
             "success": r.success}
            for r in record.rounds
        ],
    }
    if out_path is not None:
        with open(out_path, "a") as fh:
            fh.write(json.dumps(payload) + "\n")
    click.echo(json.dumps(payload))


if __name__ == "__main__":
    main()
