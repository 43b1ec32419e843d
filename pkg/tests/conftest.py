import pytest

from ballharm import create_app
from ballharm.config import Config


class TestingConfig(Config):
    TESTING = True
    BALLHARM_LOG_LEVEL = "WARNING"
    BALLHARM_WORKERS = 2


@pytest.fixture
def app(tmp_path):
    config = TestingConfig()
    config.BALLHARM_OUTPUT_DIR = str(tmp_path / "output")
    return create_app(config)


@pytest.fixture
def runner(app):
    return app.test_cli_runner()
