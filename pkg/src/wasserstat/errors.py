"""Exception types shared across the package.

The CLI maps these onto process exit codes: bad input files or arguments
exit with 2, inconsistent data (mismatched labels, wrong dimensions) with
3, and solver breakdowns with 4.
"""


class InputError(Exception):
    """Malformed file content or unusable argument combination."""


class DataMismatchError(Exception):
    """Inputs are individually valid but inconsistent with each other."""


class SolverError(Exception):
    """An optimization routine failed to produce a certified solution."""
