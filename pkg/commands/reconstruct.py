from pathlib import Path
from typing import Optional
import click
from commands.common import config_option, copy_sidecar, echo_run, handle_errors, load_config
from core.errors import InvalidInputError
from core.storage import MAGIC_RAW, read_scans, sidecar_path, write_scans
from services.recon_service import reconstructed_dataset


@click.command("reconstruct")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Raw OCTF file.")
@config_option
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output OCTA file.")
@handle_errors
def reconstruct_command(in_path: str, config_path: Optional[str], out: Optional[str]):
    """Raw spectra (OCTF) -> A-scans (OCTA)."""
    config = load_config(config_path)
    target = Path(out) if out else Path(in_path).with_name(f"{Path(in_path).stem}_recon.octa")
    if sidecar_path(target).resolve() == sidecar_path(in_path).resolve():
        raise InvalidInputError(f"{target} would share the sidecar of {in_path}; pick another name")
    raw = read_scans(in_path, expected_magic=MAGIC_RAW)
    recon = reconstructed_dataset(raw, config.recon)
    path = write_scans(target, recon)
    copy_sidecar(in_path, path, recon=config.recon.model_dump(mode="json"),
                 config_hash=config.config_hash())
    click.echo(f"wrote {path}: N_t = {recon.n_scans}, {recon.spectrum_len} samples per scan")
    echo_run(config.config_hash(), [raw.rng_seed])
