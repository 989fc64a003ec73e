"""Exception hierarchy shared across the package."""


class CaiseError(Exception):
    """Base class for all package errors."""


# --- command DSL ---

class CommandError(CaiseError):
    """Base class for command parse/validation failures."""


class UnknownCommandError(CommandError):
    pass


class ArityError(CommandError):
    pass


class RangeError(CommandError):
    pass


class NonNumericArgumentError(CommandError):
    pass


class UnknownColorError(CommandError):
    pass


class InvalidQueryTokenError(CommandError):
    """Search query token is not a lowercase [a-z0-9] word."""


# --- image ops / execution ---

class CutoutFailedError(CaiseError):
    """Foreground keep-component outside the 5..95% band."""


class NoCurrentImageError(CaiseError):
    """Edit command issued with no image in the session."""


# --- corpus ---

class CorpusError(CaiseError):
    pass


class DuplicateIdError(CorpusError):
    pass


class MissingImageFileError(CorpusError):
    pass


class EmptyManifestError(CorpusError):
    pass


class SearchEmptyError(CorpusError):
    """No corpus entry matches any query token."""


# --- dialogue data ---

class SchemaError(CaiseError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AlignmentError(CaiseError):
    pass


class TooFewDialoguesError(CaiseError):
    pass


class TemplateGapError(CaiseError):
    pass


# --- neural core / model ---

class ShapeMismatchError(CaiseError):
    pass


class NonFiniteLossError(CaiseError):
    pass


class EmptyContextError(CaiseError):
    """Instance carries no utterances and no detections."""


class MaxLengthExceededError(CaiseError):
    pass


# --- evaluation ---

class LengthMismatchError(CaiseError):
    pass


# --- sessions / service ---

class SessionStateError(CaiseError):
    """Operation conflicts with the session's proposal state."""


class UnknownSessionError(CaiseError):
    pass
