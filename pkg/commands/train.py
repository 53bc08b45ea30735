from pathlib import Path
from typing import Optional, Tuple
import click
from commands.common import config_option, default_path, echo_run, handle_errors, load_config
from core.storage import read_scans
from services.training_service import save_checkpoint, train, write_history
from utils.utils import array_hash


@click.command("train")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True,
              help="OCTF or OCTA dataset.")
@click.option("--variant", type=click.Choice(["ResNet6", "ResNet18", "ResNet34"]), default="ResNet6")
@config_option
@click.option("--seed", "seeds", type=int, multiple=True, help="Training seed(s); config seeds by default.")
@click.option("--epochs", type=int, default=None)
@click.option("--paper-scale", is_flag=True, help="Full-length training protocol.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
@handle_errors
def train_command(data: str, variant: str, config_path: Optional[str], seeds: Tuple[int, ...],
                  epochs: Optional[int], paper_scale: bool, out: Optional[str]):
    """Trains one network per seed; writes checkpoints and history CSVs."""
    config = load_config(config_path, paper_scale=paper_scale, epochs=epochs)
    dataset = read_scans(data)
    spec = config.arch_spec(variant, dataset.representation)
    cfg = config.train_config(dataset.representation)
    seeds = list(seeds) or cfg.seeds
    out_dir = Path(out) if out else default_path(config, "train")
    dataset_hash = array_hash(dataset.scans, dataset.forces)

    for seed in seeds:
        result = train(dataset, spec, cfg, seed)
        stem = out_dir / f"{variant}_{dataset.representation}_seed{seed}"
        save_checkpoint(stem.with_suffix(".octw"), result, spec, cfg, seed,
                        dataset_hash=dataset_hash, config_hash=config.config_hash())
        write_history(stem.parent / (stem.name + "_history.csv"), result.history)
        click.echo(f"seed {seed}: best epoch {result.history.best_epoch}, "
                   f"val MAE {result.history.best_val_mae_mN:.3f} mN -> {stem.with_suffix('.octw')}")
    echo_run(config.config_hash(), seeds)
