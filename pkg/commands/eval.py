import click
from commands.common import echo_run, handle_errors
from core.storage import read_scans
from services.eval_service import evaluate_checkpoint


@click.command("eval")
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@handle_errors
def eval_command(checkpoint: str, data: str):
    """Hold-out MAE of a checkpoint, on the split it was trained with."""
    row = evaluate_checkpoint(checkpoint, read_scans(data))
    click.echo(f"{row['needle_id']} {row['variant']} {row['representation']}: "
               f"val MAE {row['val_mae_mN']:.3f} mN over {row['n_val']} scans")
    echo_run(row["config_hash"], [row["seed"]])
