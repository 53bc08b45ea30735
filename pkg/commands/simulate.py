from typing import Optional
import click
from commands.common import config_option, default_path, echo_run, handle_errors, load_config
from core.storage import write_scans, write_sidecar
from services.simulation_service import generate_dataset, make_profile


@click.command("simulate")
@config_option
@click.option("--needle", "needle_id", default=None, help="Needle id from the config (first by default).")
@click.option("--seed", type=int, default=None, help="Dataset seed.")
@click.option("--n", type=int, default=None, help="Number of scans.")
@click.option("--paper-scale", is_flag=True, help="Full-size dataset.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output OCTF file.")
@handle_errors
def simulate_command(config_path: Optional[str], needle_id: Optional[str], seed: Optional[int],
                     n: Optional[int], paper_scale: bool, out: Optional[str]):
    """Synthesizes a raw M-scan dataset (OCTF) for one needle."""
    config = load_config(config_path, paper_scale=paper_scale, n=n, seed=seed)
    entry = config.needle(needle_id)
    model = entry.resolve()
    profile = make_profile(config.profile.kind, config.profile.n_scans,
                           config.dataset_seed, config.profile.cycles)
    dataset = generate_dataset(profile, model, config.dataset_seed, entry.needle_id)

    path = write_scans(out or default_path(config, f"{entry.needle_id.replace(' ', '_')}.octf"), dataset)
    write_sidecar(path, {
        "needle_id": entry.needle_id,
        "model_params": model.model_dump(mode="json"),
        "profile": config.profile.model_dump(mode="json"),
        "seed": config.dataset_seed,
        "config_hash": config.config_hash(),
    })
    click.echo(f"wrote {path}: N_t = {dataset.n_scans}, "
               f"forces {dataset.forces.min():.4f} .. {dataset.forces.max():.4f} N")
    echo_run(config.config_hash(), [config.dataset_seed])
