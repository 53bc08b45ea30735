from typing import Optional
import click
from commands.common import config_option, echo_run, handle_errors, load_config
from core.storage import read_scans
from services.baseline_service import evaluate_baseline


@click.command("baseline")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@config_option
@click.option("--seed", type=int, default=0, help="Split seed.")
@click.option("--keep-settling", is_flag=True, help="Also fit the DC settling scans.")
@handle_errors
def baseline_command(data: str, config_path: Optional[str], seed: int, keep_settling: bool):
    """Peak tracking + linear fit; hold-out MAE."""
    config = load_config(config_path)
    result = evaluate_baseline(read_scans(data), config.recon, seed=seed,
                               val_fraction=config.train.val_fraction,
                               skip_settling=not keep_settling)
    click.echo(f"linear baseline: force = {result.fit.slope:.6g} * bin + {result.fit.intercept:.6g}")
    click.echo(f"val MAE {result.val_mae_mN:.3f} mN ({result.n_train} train, "
               f"{result.n_val} val, {result.skipped} skipped)")
    echo_run(config.config_hash(), [seed])
