from typing import Optional
import click
from commands.common import config_option, echo_run, handle_errors, load_config
from core.storage import MAGIC_RAW, read_scans
from services.recon_service import export_mscan_excerpt


@click.command("export-mscan")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Raw OCTF file.")
@config_option
@click.option("--start", type=int, default=0)
@click.option("--count", type=int, default=200)
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@handle_errors
def export_mscan_command(data: str, config_path: Optional[str], start: int, count: int, out: str):
    """Raw and reconstructed M-scan excerpt as plot-ready CSV."""
    config = load_config(config_path)
    dataset = read_scans(data, expected_magic=MAGIC_RAW)
    paths = export_mscan_excerpt(dataset, config.recon, out, start=start, count=count)
    for path in paths.values():
        click.echo(f"wrote {path}")
    echo_run(config.config_hash(), [dataset.rng_seed])
