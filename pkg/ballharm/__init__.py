import logging

from flask import Flask

from .config import Config

__version__ = "0.1.0"


def create_app(config_object: type[Config] | Config | None = None) -> Flask:
    """Application used as the configuration and command container; it serves no routes."""
    app = Flask(__name__, instance_relative_config=True)
    cfg = config_object or Config()
    app.config.from_object(cfg)

    if hasattr(cfg, "init_app"):
        cfg.init_app(app)

    level = logging.getLevelName(str(app.config.get("BALLHARM_LOG_LEVEL", "WARNING")).upper())
    app.logger.setLevel(level if isinstance(level, int) else logging.WARNING)

    from .commands import register_cli_commands

    register_cli_commands(app)
    return app
