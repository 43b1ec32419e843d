from dotenv import load_dotenv

load_dotenv()

from ballharm import create_app  # noqa: E402
from ballharm.__main__ import run  # noqa: E402

app = create_app()


if __name__ == "__main__":
    run(app)
