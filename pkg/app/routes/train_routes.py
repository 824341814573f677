import click

from app.controller.ablation_controller import AblationController
from app.controller.train_controller import TrainController
from app.exceptions import ConfigurationError
from app.routes.command_support import config_option, handle_domain_errors, run_config_from
from app.types.train_types import LossVariant

train_controller = TrainController()
ablation_controller = AblationController()


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigurationError(f"expected a comma list of integers, got {text!r}") from e


def _variant_list(text: str) -> list[LossVariant]:
    try:
        return [LossVariant(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError as e:
        choices = ", ".join(v.value for v in LossVariant)
        raise ConfigurationError(f"unknown loss variant in {text!r}; choose from {choices}") from e


@click.command("train")
@config_option
@click.option("--loss-variant", type=click.Choice([v.value for v in LossVariant]), default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--resume-from", type=click.Path(dir_okay=False), default=None, help="Checkpoint of an interrupted run")
@click.option("--init-checkpoint", type=click.Path(dir_okay=False), default=None, help="Skip warm-up and fine-tune this model")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@handle_domain_errors
def train(config_path, loss_variant, epochs, seed, resume_from, init_checkpoint, out_dir):
    """
    Warm up (unless an initial checkpoint is given) and run two-stage fine-tuning.
    """
    run_config = run_config_from(
        config_path,
        loss_variant=loss_variant,
        epochs=epochs,
        seed=seed,
        resume_from=resume_from,
        init_checkpoint=init_checkpoint,
        output_dir=out_dir,
    )
    result = train_controller.train(run_config)
    click.echo(f"checkpoint: {result.checkpoint_path}")
    click.echo(f"train log: {result.log_path}")


@click.command("ablation")
@config_option
@click.option("--seeds", default="0,1,2", show_default=True, help="Comma list of seeds")
@click.option("--variants", default="vanilla,oe-only,v1,v2,v3,ours,euclidean", show_default=True,
              help="Comma list of loss variants")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@handle_domain_errors
def ablation(config_path, seeds, variants, out_dir):
    """
    Repeat training and evaluation per seed and loss variant; report mean and variance.
    """
    run_config = run_config_from(config_path, output_dir=out_dir)
    _, summaries = ablation_controller.run(
        run_config, _int_list(seeds), _variant_list(variants), run_config.resolve_output_dir()
    )
    for s in summaries:
        click.echo(
            f"{s.variant.value:<10} {s.score_kind:<9} FPR95 {s.fpr95_mean:.4f} (var {s.fpr95_var:.2e}) "
            f"AUROC {s.auroc_mean:.4f} (var {s.auroc_var:.2e})"
        )
