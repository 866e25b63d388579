"""Exception hierarchy shared across the harness.

Every error raised by this package derives from PcaotError so callers
(notably the CLI) can map any harness failure to one diagnostic path.
Stage-specific exceptions live in the module that raises them.
"""

from __future__ import annotations


class PcaotError(Exception):
    """Base class for all harness errors."""


class ParseError(PcaotError, ValueError):
    """Malformed input text: manifest JSON, campaign config, or field values."""


class UsageError(PcaotError):
    """Command line or configuration misuse; maps to exit code 2."""
