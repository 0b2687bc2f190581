"""Exception types shared across the toolkit.

Record streams cross process boundaries under the parallel map, so every
parameterized exception here defines ``__reduce__``: a non-picklable
exception raised inside a worker (or the task feeder) would otherwise kill
the pool and hang the pipeline instead of surfacing the error.
"""

from __future__ import annotations


class ApeSynthError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(ApeSynthError):
    """Malformed corpus content, carrying file/line context when known."""

    def __init__(self, message: str, path: str | None = None, line_no: int | None = None):
        self.message = message
        self.path = path
        self.line_no = line_no
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            prefix += f"{line_no}: " if line_no is not None else " "
        elif line_no is not None:
            prefix = f"line {line_no}: "
        super().__init__(prefix + message)

    def __reduce__(self):
        return (self.__class__, (self.message, self.path, self.line_no))


class RecordError(ApeSynthError):
    """Failure while processing one corpus record; carries the record id."""

    def __init__(self, record_id: int, message: str):
        self.record_id = record_id
        self.message = message
        super().__init__(f"record {record_id}: {message}")

    def __reduce__(self):
        return (self.__class__, (self.record_id, self.message))


class StatsError(ApeSynthError):
    """Invalid or unusable statistics input."""


class FillerTrainingError(ApeSynthError):
    """Native filler cannot be trained from the given records."""


class FillerProtocolError(ApeSynthError):
    """External filler violated the ape-fill wire protocol."""

    def __init__(self, message: str, record_id: int | None = None):
        self.message = message
        self.record_id = record_id
        if record_id is not None:
            message = f"record {record_id}: {message}"
        super().__init__(message)

    def __reduce__(self):
        return (self.__class__, (self.message, self.record_id))
