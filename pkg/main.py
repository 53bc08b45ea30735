from typing import Optional
import click
from commands.baseline import baseline_command
from commands.bench import bench_command
from commands.eval import eval_command
from commands.export_mscan import export_mscan_command
from commands.matrix import matrix_command
from commands.reconstruct import reconstruct_command
from commands.simulate import simulate_command
from commands.train import train_command
from core.logging import setup_logging


@click.group()
@click.option("--log-level", default=None, help="Overrides OCT_LOG_LEVEL.")
def cli(log_level: Optional[str]):
    """OCT needle force calibration workbench."""
    setup_logging(log_level)


cli.add_command(simulate_command)
cli.add_command(reconstruct_command)
cli.add_command(train_command)
cli.add_command(eval_command)
cli.add_command(bench_command)
cli.add_command(baseline_command)
cli.add_command(matrix_command)
cli.add_command(export_mscan_command)


if __name__ == "__main__":
    cli()
