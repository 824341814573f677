from pathlib import Path

import click

from app.config.run_config import RunConfig
from app.controller.eval_controller import EvalController
from app.controller.train_controller import CHECKPOINT_FILE
from app.routes.command_support import config_option, handle_domain_errors, run_config_from

eval_controller = EvalController()

checkpoint_option = click.option(
    "--checkpoint", type=click.Path(dir_okay=False), default=None,
    help="Model checkpoint (default: <output_dir>/checkpoint.bin)",
)
id_test_option = click.option("--id-test", type=click.Path(dir_okay=False), default=None)
ood_test_option = click.option("--ood-test", type=click.Path(dir_okay=False), default=None)
out_dir_option = click.option("--out-dir", type=click.Path(file_okay=False), default=None)


def _checkpoint(run_config: RunConfig, checkpoint: str | None) -> Path:
    return Path(checkpoint) if checkpoint else run_config.resolve_output_dir() / CHECKPOINT_FILE


@click.command("eval")
@config_option
@checkpoint_option
@id_test_option
@click.option("--ood-test", "ood_tests", multiple=True, type=click.Path(dir_okay=False),
              help="Test OOD set (repeatable; default: ood_test plus one file per extra test mode)")
@click.option("--score-kind", type=click.Choice(["all", "msp", "combined"]), default=None)
@out_dir_option
@handle_domain_errors
def evaluate(config_path, checkpoint, id_test, ood_tests, score_kind, out_dir):
    """
    FPR95, AUROC and threshold of the MSP and/or combined score per test OOD set.
    """
    run_config = run_config_from(config_path, id_test=id_test, score_kind=score_kind, output_dir=out_dir)
    reports = eval_controller.evaluate(
        _checkpoint(run_config, checkpoint),
        run_config.data_path("id_test"),
        list(ood_tests) or run_config.test_set_paths(),
        run_config.score_kind,
        run_config.resolve_output_dir(),
    )
    for report in reports:
        click.echo(f"{report.dataset:<16} {report.score_kind.value:<9} FPR95={report.fpr95:.4f} AUROC={report.auroc:.4f}")


@click.command("separation")
@config_option
@checkpoint_option
@id_test_option
@ood_test_option
@out_dir_option
@handle_domain_errors
def separation(config_path, checkpoint, id_test, ood_test, out_dir):
    """
    Euclidean distance, cosine and reconstruction error of ID and OOD features.
    """
    run_config = run_config_from(config_path, id_test=id_test, ood_test=ood_test, output_dir=out_dir)
    triplet = eval_controller.separation(
        _checkpoint(run_config, checkpoint),
        run_config.data_path("id_test"),
        run_config.data_path("ood_test"),
        run_config.resolve_output_dir(),
    )
    for row in triplet.rows():
        click.echo(f"{row['metric']:<22} ID={row['id_mean']:.6f} OOD={row['ood_mean']:.6f} Diff={row['diff']:.6f}")


@click.command("project")
@config_option
@checkpoint_option
@click.option("--dataset", "datasets", multiple=True, type=click.Path(dir_okay=False),
              help="Dataset to project (repeatable; default: id_test and ood_test)")
@click.option("--dims", type=click.IntRange(2, 3), default=2, show_default=True)
@out_dir_option
@handle_domain_errors
def project(config_path, checkpoint, datasets, dims, out_dir):
    """
    Coordinates of features in the (w1, w2) plane, plus the principal OOD axis for --dims 3.
    """
    run_config = run_config_from(config_path, output_dir=out_dir)
    paths = list(datasets) or [run_config.data_path("id_test"), run_config.data_path("ood_test")]
    projection = eval_controller.project(_checkpoint(run_config, checkpoint), paths, dims, run_config.resolve_output_dir())
    click.echo(f"projected {len(projection.populations)} rows onto {dims} axes")
