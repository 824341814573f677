import logging

import click

from app.config.env_config import Config
from app.routes.data_routes import gen_data
from app.routes.eval_routes import evaluate, project, separation
from app.routes.gradcheck_routes import gradcheck
from app.routes.train_routes import ablation, train

# Load configuration
config = Config()

# Configure logging
logging.basicConfig(level=config.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)


@click.group()
def cli():
    """Neural-collapse guided OOD detection fine-tuning experiments."""


# Register commands
cli.add_command(gen_data)
cli.add_command(train)
cli.add_command(evaluate)
cli.add_command(separation)
cli.add_command(project)
cli.add_command(gradcheck)
cli.add_command(ablation)

if __name__ == "__main__":
    cli()
