"""Allow `python -m oprsim`."""

from .cli import main

if __name__ == "__main__":
    main()
