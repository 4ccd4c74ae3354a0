"""Entry point for ``python -m cav_cli``."""

from cav_cli.cli import cli

if __name__ == "__main__":
    cli()
