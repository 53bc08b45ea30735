from pathlib import Path
from typing import Optional
import click
from commands.common import config_option, echo_run, handle_errors, load_config
from core.config import settings
from services.eval_service import direction_summary, run_experiment


@click.command("matrix")
@config_option
@click.option("--seed", type=int, default=None, help="Dataset seed.")
@click.option("--n", type=int, default=None, help="Scans per needle.")
@click.option("--epochs", type=int, default=None)
@click.option("--paper-scale", is_flag=True, help="180k scans, 150 epochs, 5 seeds.")
@click.option("--jobs", type=int, default=None, help="Worker processes for training cells.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Report directory.")
@handle_errors
def matrix_command(config_path: Optional[str], seed: Optional[int], n: Optional[int],
                   epochs: Optional[int], paper_scale: bool, jobs: Optional[int], out: Optional[str]):
    """Full experiment: every needle x variant x representation x seed."""
    config = load_config(config_path, paper_scale=paper_scale, n=n, epochs=epochs, seed=seed)
    out_dir = Path(out or config.output_dir)
    result = run_experiment(config, out_dir, jobs=jobs or settings.OCT_JOBS)
    click.echo(result.table.to_markdown(index=False))
    click.echo(direction_summary(result.reldiff))
    click.echo(f"reports in {out_dir}")
    echo_run(config.config_hash(), [config.dataset_seed, *config.train.seeds])
