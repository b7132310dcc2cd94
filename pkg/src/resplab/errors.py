"""Exception hierarchy shared across the toolkit."""


class ResplabError(Exception):
    """Base class for all toolkit errors."""


# --- audio ---

class MalformedContainer(ResplabError):
    """RIFF/WAVE structure is broken or inconsistent."""


class UnsupportedEncoding(ResplabError):
    """Audio data is not integer PCM (e.g. float, mu-law, compressed)."""


class EmptyAudio(ResplabError):
    """File decoded to zero samples."""


class OutOfRange(ResplabError):
    """Requested time window falls outside the recording."""


# --- spectrogram ---

class TooShort(ResplabError):
    """Fewer samples than one analysis window."""


class EmptyTile(ResplabError):
    """Requested tile does not intersect the spectrogram extent."""


# --- annotations ---

class OverlapViolation(ResplabError):
    """Two labels on the same track would overlap."""


class ClassTrackMismatch(ResplabError):
    """Label class is not permitted on the target track."""


class InvalidInterval(ResplabError):
    """start_ms/end_ms do not form a valid interval."""


class NotFound(ResplabError):
    """No annotation with the given id."""


# --- persistence ---

class SchemaViolation(ResplabError):
    """A file does not match its expected schema.

    ``field_path`` points at the offending field when known.
    """

    def __init__(self, message, field_path=None):
        super().__init__(message)
        self.field_path = field_path


class IoFailure(ResplabError):
    """Underlying I/O operation failed."""


class SequenceGap(ResplabError):
    """Journal event sequence number is not contiguous."""


class CorruptJournal(ResplabError):
    """Non-trailing malformed line or broken sequence in a journal."""


class InvalidUserId(ResplabError):
    """User id is empty or contains path-unsafe characters."""


# --- metrics / detector ---

class InvalidHorizon(ResplabError):
    """Evaluation horizon does not cover the given intervals."""


class ConfigInvalid(ResplabError):
    """Detector or evaluation configuration violates its invariants."""
