"""Exception types shared across the toolkit.

Invalid arguments (programmer errors, bad flag values) raise the builtin
ValueError. Problems with the *content* of user-supplied data raise
DataError or a subclass, so the CLI can map them to a dedicated exit code.
"""


class DataError(Exception):
    """Input data is unusable: bad config, unknown color, malformed file."""


class CorruptInputError(DataError):
    """File contents do not match the declared on-disk format."""
