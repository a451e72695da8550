"""``python -m ctepa`` dispatches to the command-line front end."""

from .cli import main_entry

if __name__ == "__main__":
    main_entry()
