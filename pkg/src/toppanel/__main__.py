"""
Entry point for the `toppanel` package, invoked as a module.

Usage
-----
To launch the command-line interface, execute::

    python -m toppanel


See Also
--------
toppanel.cli: Module implementing the application's command-line interface.
"""
from .cli import app

app()
