# app/main.py
from app.cli.app import cli_app


def main() -> None:
    cli_app()


if __name__ == "__main__":
    main()
