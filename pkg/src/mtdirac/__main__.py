"""`python -m mtdirac` delegates to the command-line entry point."""
from .cli import entry

if __name__ == "__main__":
    raise SystemExit(entry())
