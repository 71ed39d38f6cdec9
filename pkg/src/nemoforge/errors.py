"""Exception types shared across the toolkit.

Every error raised on purpose derives from NemoforgeError so callers can
catch toolkit failures without swallowing programming mistakes.
"""

from __future__ import annotations


class NemoforgeError(Exception):
    """Base class for all toolkit errors."""


class InvalidIntervalError(NemoforgeError):
    """A time interval violates ordering, sign, or finiteness rules."""


class InvalidDurationError(NemoforgeError):
    """A duration is non-positive or non-finite."""


class RecordValidationError(NemoforgeError):
    """A record (scene, object, montage, QA, verdict) fails its invariants."""


class ReferentialIntegrityError(NemoforgeError):
    """A record references an id that does not resolve."""


class JsonlParseError(NemoforgeError):
    """A JSONL line failed to parse; carries the path and line number."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class NotFoundError(NemoforgeError):
    """A lookup by id found nothing."""


class PoolExhaustedError(NemoforgeError):
    """The negative pool cannot reach the requested duration class."""


class ContaminationError(NemoforgeError):
    """A negative candidate carries the target's object tag."""


class IneligibleError(NemoforgeError):
    """An item fails an eligibility rule; `rule` names which one."""

    def __init__(self, rule: str, message: str):
        super().__init__(message)
        self.rule = rule


class MalformedResponseError(NemoforgeError):
    """An annotator or model reply does not match the expected shape."""

    def __init__(self, message: str, raw_text: str = ""):
        super().__init__(message)
        self.raw_text = raw_text


class TransportError(NemoforgeError):
    """A network-level failure talking to an annotator or model endpoint."""


class ResolverError(NemoforgeError):
    """A source_video_id could not be resolved to a media path."""


class UsageError(NemoforgeError):
    """Invalid CLI arguments or configuration."""
