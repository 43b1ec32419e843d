from collections.abc import Sequence

from dotenv import load_dotenv
from flask import Flask


def run(app: Flask, args: Sequence[str] | None = None) -> None:
    with app.app_context():
        app.cli.main(args=args, prog_name="ballharm")


if __name__ == "__main__":
    load_dotenv()

    from ballharm import create_app

    run(create_app())
