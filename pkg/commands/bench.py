from typing import Optional
import click
from commands.common import echo_run, handle_errors
from core.config import settings
from services.eval_service import benchmark_inference
from services.training_service import load_checkpoint


@click.command("bench")
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--reps", type=int, default=None, help="Timed repetitions (>= 30).")
@click.option("--warmup", type=int, default=None)
@click.option("--batch", type=int, default=1)
@handle_errors
def bench_command(checkpoint: str, reps: Optional[int], warmup: Optional[int], batch: int):
    """Median and IQR of the single-scan inference time."""
    model, _, meta = load_checkpoint(checkpoint)
    stats = benchmark_inference(model, batch=batch,
                                warmup=settings.OCT_BENCH_WARMUP if warmup is None else warmup,
                                reps=reps or settings.OCT_BENCH_REPS)
    click.echo(f"{model.spec.variant} ({model.spec.input_len} samples): "
               f"{stats.median_ms:.3f} ms median, IQR {stats.iqr_ms:.3f} ms over {stats.reps} reps")
    echo_run(meta.get("config_hash", ""), [meta["seed"]])
