"""
Subcomando report-diff: comparación estructurada de dos ejecuciones.
"""

import click

from commands.experiments import emit
from services.experiment_config import parse_tolerance_overrides
from services.report_diff import diff_reports
from utils.exceptions import ArtifactError, ConfigurationError, SelectionMismatchError
from utils.logger import get_logger, set_level

logger = get_logger(__name__)

EXIT_EMPTY = 0
EXIT_DIFFERENT = 1
EXIT_MISMATCH = 2


@click.command("report-diff")
@click.argument("report_a", type=click.Path())
@click.argument("report_b", type=click.Path())
@click.option("--tol", "tol", multiple=True, metavar="FIELD=VAL", help="Tolerancia numérica por campo (repetible).")
@click.option("--default-tol", type=float, default=0.0, show_default=True, help="Tolerancia para el resto de campos.")
@click.option("--quiet", is_flag=True, help="Solo advertencias y errores en el log.")
@click.pass_context
def report_diff(ctx, report_a, report_b, tol, default_tol, quiet):
    """Compara dos manifiestos (o directorios de salida) con la misma selección."""
    if quiet:
        set_level("WARNING")
    try:
        result = diff_reports(report_a, report_b, parse_tolerance_overrides(tol), default_tol)
    except (SelectionMismatchError, ArtifactError, ConfigurationError) as e:
        logger.error(e.message, extra={"component": "cli", "operation": "report_diff"})
        emit(e.to_dict())
        ctx.exit(EXIT_MISMATCH)
    emit(result.to_dict())
    ctx.exit(EXIT_EMPTY if result.is_empty else EXIT_DIFFERENT)
