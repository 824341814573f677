# This file makes the config directory a Python package

from .env_config import Config
from .run_config import RunConfig, load_run_config, parse_run_config

__all__ = [
    'Config',
    'RunConfig',
    'load_run_config',
    'parse_run_config'
]
