import click

from app.controller.gradcheck_controller import GradcheckController
from app.routes.command_support import handle_domain_errors

gradcheck_controller = GradcheckController()


@click.command("gradcheck")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Also write gradcheck.csv here")
@handle_domain_errors
def gradcheck(seed, out_dir):
    """
    Compare tape gradients of every op and loss with central finite differences.
    """
    rows = gradcheck_controller.run(seed)
    click.echo(f"{'check':<22} {'kind':<5} {'max rel error':>14}  result")
    for row in rows:
        click.echo(f"{row.name:<22} {row.kind:<5} {row.max_rel_error:>14.3e}  {'pass' if row.passed else 'FAIL'}")
    if out_dir is not None:
        gradcheck_controller.save(rows, out_dir)
    gradcheck_controller.require_pass(rows)
