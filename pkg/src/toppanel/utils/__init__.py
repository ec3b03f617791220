"""
Module: `toppanel.utils`

Utility functions for the toppanel package.

This module contains helper functions designed to be stateless and reusable across commands.

Modules
-------
toppanel.utils.io
    Functions for configuration and output file I/O.
"""
