"""
Punto de entrada de NormOne Toolkit.

Grupo de comandos click con los subcomandos de experimento y la
comparación de informes. Los logs van a stderr; stdout lleva el
resumen JSON de cada comando.
"""

import click

from commands import experiments, reports
from config.settings import APP_DESCRIPTION, APP_NAME, APP_VERSION
from utils.logger import setup_logger

# Configurar logging
logger = setup_logger("normone.main")


@click.group(help=APP_DESCRIPTION)
@click.version_option(APP_VERSION, prog_name=APP_NAME)
def cli():
    """Herramientas numéricas para POVMs de localización covariante."""


cli.add_command(experiments.build)
cli.add_command(experiments.check)
cli.add_command(experiments.sweep)
cli.add_command(experiments.marginal)
cli.add_command(reports.report_diff)


if __name__ == "__main__":
    cli()
