"""
tunetree CLI - offline kernel auto-tuning.

Usage:
    tune --help                              Show all commands
    tune run config.json                     Run the whole pipeline
    tune resume runs/experiment              Continue an interrupted run
    tune validate runs/experiment --grid 46x46
    tune emit-c runs/experiment --prefix dgetrf
    tune merge runs/experiment --reference mkl.csv
    tune bench-samplers config.json --seeds 0,1,2,3,4
    tune inspect runs/experiment --input n=3000
"""

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import typer

app = typer.Typer(
    name="tune",
    help="tunetree - sample, model, optimize and distill kernel tuning decisions",
    no_args_is_help=True,
)


@dataclass
class _Options:
    seed: int | None = None
    jobs: int = 1
    debug: bool = False


_options = _Options()

DEFAULT_BENCH_SEEDS = (0, 1, 2, 3, 4)


# --- Step printer helpers ---


def _print_step(step_num: int, total: int, message: str) -> None:
    """Print a step progress message."""
    typer.echo(f"\n[{step_num}/{total}] {message}...")


def _print_success(message: str) -> None:
    """Print a success message."""
    typer.echo(f"  ✅ {message}")


def _print_warning(message: str) -> None:
    """Print a warning message."""
    typer.echo(f"  ⚠️ {message}")


def _print_skipped(message: str) -> None:
    """Print a skipped step message."""
    typer.echo(f"  ⏭️ {message}")


def _print_error(message: str) -> None:
    """Print an error message to stderr."""
    typer.echo(f"❌ {message}", err=True)


@contextmanager
def _handle_errors():
    """Turn tuner errors into a one-line message and exit code 1."""
    from app.core.exceptions import TunerError

    try:
        yield
    except (TunerError, OSError) as e:
        if _options.debug:
            raise
        _print_error(str(e))
        raise typer.Exit(1) from None


def _stage_printer():
    from app.pipeline.runner import STAGES

    def on_stage(stage: str, status: str) -> None:
        index = STAGES.index(stage) + 1
        if status == "started":
            _print_step(index, len(STAGES), stage.capitalize())
        elif status == "done":
            _print_success(f"{stage} done")
        else:
            _print_skipped(f"{stage}: reusing stored artifact")

    return on_stage


def _parse_grid(text: str) -> list[int]:
    try:
        dims = [int(part) for part in text.lower().split("x")]
    except ValueError:
        raise typer.BadParameter(f"grid must look like 46x46, got {text!r}") from None
    return dims


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise typer.BadParameter(f"seeds must be comma-separated integers, got {text!r}") from None


def _load_run(directory: Path):
    """Stored config (with CLI overrides), space, driver and trees of a run directory."""
    from app.codegen.serialize import load_trees
    from app.pipeline.runner import CONFIG_FILE, TREES_FILE
    from app.schemas.experiment import load_experiment

    config = load_experiment(directory / CONFIG_FILE)
    if _options.seed is not None:
        config = config.model_copy(update={"seed": _options.seed})
    trees = load_trees(directory / TREES_FILE)
    return config, config.build_driver(_options.jobs), trees


@app.callback()
def main(
    seed: int | None = typer.Option(None, "--seed", help="Override the master seed"),
    jobs: int | None = typer.Option(None, "--jobs", "-j", min=1, help="Parallel kernel runs"),
    debug: bool = typer.Option(False, "--debug", help="Debug logging and full tracebacks"),
):
    """Global options shared by every command."""
    from app.config import get_settings
    from app.core.logging import setup_logging

    settings = get_settings()
    _options.seed = seed
    _options.jobs = jobs if jobs is not None else settings.jobs
    _options.debug = debug or settings.debug
    setup_logging(_options.debug)


@app.command()
def run(
    config_path: Path = typer.Argument(..., exists=True, dir_okay=False, help="Experiment file"),
    output: Path | None = typer.Option(None, "--output", "-o", help="Run directory"),
):
    """Run the whole pipeline: sample, model, optimize, trees, emit, validate, report."""
    from app.pipeline.runner import REPORT_FILE, run_pipeline
    from app.schemas.experiment import load_experiment

    with _handle_errors():
        config = load_experiment(config_path)
        if _options.seed is not None:
            config = config.model_copy(update={"seed": _options.seed})
        artifacts = run_pipeline(config, output, _options.jobs, on_stage=_stage_printer())

    typer.echo(f"\n{'=' * 50}")
    typer.echo((artifacts.output_dir / REPORT_FILE).read_text(encoding="utf-8").rstrip())
    typer.echo(f"{'=' * 50}\n")


@app.command()
def resume(
    directory: Path = typer.Argument(..., exists=True, file_okay=False, help="Run directory"),
):
    """Continue an interrupted run; a finished run is left untouched."""
    from app.pipeline.runner import resume as resume_run

    with _handle_errors():
        artifacts = resume_run(directory, _options.jobs, on_stage=_stage_printer())

    if artifacts is None:
        _print_skipped(f"{directory} is already complete")
        return
    _print_success(f"Run completed in {artifacts.output_dir}")


@app.command()
def validate(
    directory: Path = typer.Argument(..., exists=True, file_okay=False, help="Run directory"),
    grid: str = typer.Option(..., "--grid", "-g", help="Validation grid, e.g. 46x46"),
):
    """Measure tuned against baseline configurations on a new validation grid."""
    from app.pipeline.validation import load_reference, persist_validation
    from app.pipeline.validation import validate as run_validation

    dims = _parse_grid(grid)
    with _handle_errors():
        config, driver, trees = _load_run(directory)
        if config.baseline.reference is not None:
            baseline = load_reference(config.baseline.reference, trees.space)
        else:
            baseline = config.baseline_design()
        report = run_validation(trees, baseline, dims, driver)
        path = directory / f"validation_{'x'.join(map(str, dims))}.csv"
        persist_validation(report, trees.space, path)

    for line in report.summary_lines():
        typer.echo(f"  {line}")
    _print_success(f"Rows written to {path}")


@app.command("emit-c")
def emit_c(
    directory: Path = typer.Argument(..., exists=True, file_okay=False, help="Run directory"),
    prefix: str = typer.Option("tuned", "--prefix", help="Symbol prefix of the C functions"),
    output: Path | None = typer.Option(None, "--output", "-o", help="Destination .c file"),
):
    """Emit the tuning trees of a run as C source."""
    from app.codegen.emit_c import emit_c as emit
    from app.codegen.serialize import load_trees
    from app.pipeline.runner import C_FILE, TREES_FILE

    with _handle_errors():
        source = emit(load_trees(directory / TREES_FILE), prefix)
    path = output or directory / C_FILE
    path.write_text(source, encoding="utf-8")
    _print_success(f"C source written to {path}")


@app.command()
def merge(
    directory: Path = typer.Argument(..., exists=True, file_okay=False, help="Run directory"),
    reference: Path = typer.Option(..., "--reference", "-r", exists=True, help="Reference CSV"),
    extra: list[Path] = typer.Option([], "--extra", help="More run directories to merge in"),
    prefix: str = typer.Option("merged", "--prefix", help="Symbol prefix of the merged C code"),
):
    """Merge the run's trees with a reference table, keeping the measured best per input."""
    from app.codegen.emit_c import emit_c as emit
    from app.codegen.merge import REFERENCE, expert_merge
    from app.codegen.serialize import load_trees, save_trees
    from app.optimize.grid import persist_points
    from app.pipeline.runner import TREES_FILE
    from app.pipeline.validation import load_reference

    with _handle_errors():
        config, driver, trees = _load_run(directory)
        table = load_reference(reference, trees.space)
        extras = [load_trees(d / TREES_FILE) for d in extra]
        result = expert_merge(
            list(table), trees, list(table.values()), driver, config.tree_depth, extras
        )
        save_trees(result.trees, directory / "merged_trees.json")
        (directory / "merged_trees.c").write_text(emit(result.trees, prefix), encoding="utf-8")
        persist_points(result.labels, trees.space, directory / "merged_labels.csv")

    kept = sum(1 for m in result.measurements if m.chosen == REFERENCE)
    _print_success(f"{len(result.labels)} labels ({kept} kept the reference)")
    if result.dropped:
        _print_warning(f"{len(result.dropped)} inputs dropped (every configuration failed)")
    _print_success(f"Merged trees written to {directory / 'merged_trees.json'}")


@app.command("bench-samplers")
def bench_samplers(
    config_path: Path = typer.Argument(..., exists=True, dir_okay=False, help="Experiment file"),
    seeds: str | None = typer.Option(
        None, "--seeds", help="Comma-separated seeds (default: the global --seed, else 0,1,2,3,4)"
    ),
    holdout: int = typer.Option(5000, "--holdout", min=1, help="Random holdout size"),
    output: Path = typer.Option(Path("bench.csv"), "--output", "-o", help="Result CSV"),
):
    """Compare random, LHS, HVS and GA-Adaptive surrogates at equal budget."""
    from app.pipeline.bench import benchmark_samplers, median_by_sampler, persist_bench
    from app.schemas.experiment import load_experiment

    if seeds is not None and _options.seed is not None:
        raise typer.BadParameter("give either the global --seed or --seeds, not both")
    if seeds is not None:
        seed_list = _parse_seeds(seeds)
    elif _options.seed is not None:
        seed_list = [_options.seed]
    else:
        seed_list = list(DEFAULT_BENCH_SEEDS)
    with _handle_errors():
        config = load_experiment(config_path)
        rows = benchmark_samplers(config, seed_list, holdout, jobs=_options.jobs)
        persist_bench(rows, output)

    typer.echo(f"\n{'sampler':<14}{'global MAE':>14}{'local MAE':>14}")
    for name, (global_mae, local_mae) in median_by_sampler(rows).items():
        typer.echo(f"{name:<14}{global_mae:>14.6g}{local_mae:>14.6g}")
    _print_success(f"Rows written to {output}")


@app.command()
def inspect(
    directory: Path = typer.Argument(..., exists=True, file_okay=False, help="Run directory"),
    input_values: str = typer.Option(..., "--input", "-i", help="Input point, e.g. n=3000"),
    n_random: int = typer.Option(200, "--random", min=1, help="Random designs to measure"),
):
    """Rank the tuned and baseline configurations among random designs at one input."""
    from app.codegen.trees import predict_config
    from app.core.exceptions import EncodingError
    from app.pipeline.validation import analyze_region, baseline_for, load_reference

    with _handle_errors():
        config, driver, trees = _load_run(directory)
        inputs = trees.input_space
        given = dict(part.split("=", 1) for part in input_values.split(",") if "=" in part)
        missing = set(inputs.names) - set(given)
        if missing:
            raise EncodingError(f"missing input values for {sorted(missing)}")
        point = tuple(spec.parse(given[spec.name]) for spec in inputs)
        if config.baseline.reference is not None:
            baseline = baseline_for(load_reference(config.baseline.reference, trees.space), point)
        else:
            baseline = config.baseline_design()
        tuned = predict_config(trees, point)
        analysis = analyze_region(
            driver, trees.space, point, tuned, baseline, n_random, config.seed
        )

    typer.echo(f"\nInput {dict(zip(inputs.names, point, strict=True))}")
    for q, value in analysis.quantiles().items():
        typer.echo(f"  q{int(q * 100):<3} {value:.6g}")
    typer.echo(
        f"  tuned    {analysis.tuned.objective:.6g} "
        f"({analysis.tuned_percentile:.1f}% of random designs faster)"
    )
    typer.echo(
        f"  baseline {analysis.baseline.objective:.6g} "
        f"({analysis.baseline_percentile:.1f}% of random designs faster)"
    )
    if analysis.failed:
        _print_warning(f"{analysis.failed} random designs failed")


if __name__ == "__main__":
    app()
