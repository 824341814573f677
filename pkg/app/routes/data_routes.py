import click

from app.controller.data_controller import DataController
from app.routes.command_support import config_option, handle_domain_errors, run_config_from
from app.types.generator_types import OutlierMode

data_controller = DataController()

OUTLIER_MODES = [mode.value for mode in OutlierMode]


@click.command("gen-data")
@config_option
@click.option("-C", "--classes", type=int, default=None, help="Number of ID classes")
@click.option("-d", "--dim", type=int, default=None, help="Feature dimension (must exceed the class count)")
@click.option("--n-per-class", type=int, default=None, help="Training samples per class")
@click.option("--ood-mode", type=click.Choice(OUTLIER_MODES), default=None,
              help="Auxiliary outlier mode")
@click.option("--test-mode", type=click.Choice(OUTLIER_MODES), default=None,
              help="Test outlier mode")
@click.option("-m", "--ood-count", type=int, default=None, help="Number of auxiliary outliers")
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Target directory (default: data_dir)")
@handle_domain_errors
def gen_data(config_path, classes, dim, n_per_class, ood_mode, test_mode, ood_count, seed, out_dir):
    """
    Generate id_train, id_test, ood_aux and ood_test CSV files, plus one
    ood_test_<mode> file per extra test mode.
    """
    run_config = run_config_from(
        config_path,
        classes=classes,
        dim=dim,
        n_per_class=n_per_class,
        aux_mode=ood_mode,
        test_mode=test_mode,
        ood_count=ood_count,
        seed=seed,
    )
    written = data_controller.generate(run_config, out_dir)
    for name, path in written.items():
        click.echo(f"{name}: {path}")
