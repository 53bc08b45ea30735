import functools
import logging
from pathlib import Path
from typing import Iterable, Optional
import click
from pydantic import ValidationError
from core.errors import ConfigurationError, WorkbenchError
from core.storage import read_sidecar, write_sidecar
from models.experiment import ExperimentConfig


logger = logging.getLogger(__name__)


def load_config(path: Optional[str], paper_scale: bool = False, n: Optional[int] = None,
                epochs: Optional[int] = None, seed: Optional[int] = None) -> ExperimentConfig:
    """
    Experiment config from a JSON file (defaults when no file is given),
    with command-line overrides applied on top.
    """
    try:
        if path:
            config = ExperimentConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
        else:
            config = ExperimentConfig()
        if paper_scale:
            config = config.to_paper_scale()
        if n is not None:
            config = config.model_copy(update={"profile": config.profile.model_copy(update={"n_scans": n})})
        if epochs is not None:
            config = config.model_copy(update={"train": config.train.model_copy(update={"epochs": epochs})})
        if seed is not None:
            config = config.model_copy(update={"dataset_seed": seed})
        # model_copy skips validation
        return ExperimentConfig.model_validate(config.model_dump())
    except ValidationError as e:
        raise ConfigurationError(f"{path or 'default config'}: {e}")
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}")


def config_option(func):
    return click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                        default=None, help="Experiment config JSON.")(func)


def handle_errors(func):
    """Logs a WorkbenchError and exits with its code."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except WorkbenchError as e:
            logger.error(str(e))
            click.echo(f"error: {e}", err=True)
            click.get_current_context().exit(e.exit_code)
    return wrapper


def echo_run(config_hash: str, seeds: Iterable[int]):
    click.echo(f"config hash: {config_hash}")
    click.echo(f"seed(s): {', '.join(str(s) for s in seeds)}")


def copy_sidecar(src, dst, **extra) -> Path:
    """Carries needle parameters forward to a derived file."""
    payload = dict(read_sidecar(src) or {})
    payload.update(extra)
    return write_sidecar(dst, payload)


def default_path(config: ExperimentConfig, name: str) -> Path:
    return Path(config.output_dir) / name
