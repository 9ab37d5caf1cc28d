"""Exception hierarchy shared by all modules."""


class ProsodyError(Exception):
    """Base class; the CLI maps these to exit code 2."""


# audio_io
class MissingFile(ProsodyError, FileNotFoundError):
    pass


class UnsupportedEncoding(ProsodyError):
    pass


class MalformedHeader(ProsodyError):
    pass


class IoFailure(ProsodyError, OSError):
    pass


# features
class BufferTooShort(ProsodyError):
    pass


class FrameMismatch(ProsodyError):
    pass


# compare
class NoVoicedFrames(ProsodyError):
    pass


class SilentInput(ProsodyError):
    pass


class ConfigMismatch(ProsodyError):
    pass


# manipulate / synth
class BoundsViolation(ProsodyError, ValueError):
    pass


class InvariantViolation(ProsodyError, ValueError):
    pass


# learner
class EmptyBatch(ProsodyError, ValueError):
    pass


class EmptyCorpus(ProsodyError, ValueError):
    pass


class DegenerateGrid(ProsodyError, ValueError):
    pass


# corpus
class SchemaViolation(ProsodyError):
    pass


class DuplicateId(SchemaViolation):
    pass


class BrokenPairing(SchemaViolation):
    pass


class HeaderMismatch(ProsodyError):
    pass


class RowArity(ProsodyError):
    pass
