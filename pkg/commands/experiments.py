"""
Subcomandos que ejecutan experimentos: build, check, sweep y marginal.
"""

import json
from typing import Optional, Tuple

import click

from services.experiment_config import parse_tolerance_overrides
from services.experiment_runner import EXIT_CONFIG_ERROR, ExperimentRunner, RunResult
from utils.exceptions import ConfigurationError
from utils.logger import get_logger, set_level

logger = get_logger(__name__)


def experiment_options(func):
    """Opciones comunes a los subcomandos de experimento."""
    func = click.option("--quiet", is_flag=True, help="Solo advertencias y errores en el log.")(func)
    func = click.option(
        "--tol",
        "tol",
        multiple=True,
        metavar="KEY=VAL",
        help="Sobrescribe una tolerancia (repetible).",
    )(func)
    func = click.option("--seed", type=int, default=None, help="Semilla para eventos y fiduciales aleatorios.")(func)
    func = click.option(
        "--out",
        type=click.Path(file_okay=False),
        default=None,
        help="Directorio de salida (por defecto NORMONE_OUTPUT_DIR).",
    )(func)
    func = click.option(
        "--config",
        "config_path",
        required=True,
        type=click.Path(dir_okay=False),
        help="Archivo JSON de configuración del experimento.",
    )(func)
    return func


def emit(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True, ensure_ascii=False))


def run_mode(
    ctx: click.Context,
    mode: str,
    config_path: str,
    out: Optional[str],
    seed: Optional[int],
    tol: Tuple[str, ...],
    quiet: bool,
) -> None:
    """Ejecuta un modo y termina el proceso con su código de salida."""
    if quiet:
        set_level("WARNING")
    try:
        overrides = parse_tolerance_overrides(tol)
    except ConfigurationError as e:
        logger.error(e.message, extra={"component": "cli", "operation": mode})
        emit(RunResult(exit_code=EXIT_CONFIG_ERROR, error=e.to_dict()).to_dict())
        ctx.exit(EXIT_CONFIG_ERROR)
    result = ExperimentRunner().run_path(config_path, mode=mode, out=out, seed=seed, tol_overrides=overrides)
    emit(result.to_dict())
    ctx.exit(result.exit_code)


@click.command("build")
@experiment_options
@click.pass_context
def build(ctx, config_path, out, seed, tol, quiet):
    """Construye el POVM, lo valida y escribe povm.json."""
    run_mode(ctx, "build", config_path, out, seed, tol, quiet)


@click.command("check")
@experiment_options
@click.pass_context
def check(ctx, config_path, out, seed, tol, quiet):
    """Ejecuta los análisis de la configuración en el orden declarado."""
    run_mode(ctx, "check", config_path, out, seed, tol, quiet)


@click.command("sweep")
@experiment_options
@click.pass_context
def sweep(ctx, config_path, out, seed, tol, quiet):
    """Barrido de escala (coherente) o de resolución de la identidad (WH)."""
    run_mode(ctx, "sweep", config_path, out, seed, tol, quiet)


@click.command("marginal")
@experiment_options
@click.pass_context
def marginal(ctx, config_path, out, seed, tol, quiet):
    """Marginales de posición y momento con sus núcleos en CSV."""
    run_mode(ctx, "marginal", config_path, out, seed, tol, quiet)
