"""Exception types shared across treeph."""


class TreeParseError(ValueError):
    """Base class for problems found while reading a tree file."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TreeFormatError(TreeParseError):
    """A line does not follow the tree record grammar."""


class TreeReferenceError(TreeParseError):
    """An edge names a vertex id that was never declared."""


class DuplicateVertexError(TreeParseError):
    """The same vertex id is declared twice."""


class CycleWarning(UserWarning):
    """The edge set of a tree file contains a cycle."""


class DegenerateError(ValueError):
    """Input has no variation where the computation needs some."""


class InfiniteDistanceError(ValueError):
    """Two diagrams have different numbers of essential (infinite) dots."""


class SubjectError(RuntimeError):
    """A per-subject pipeline step failed; carries the subject id."""

    def __init__(self, subject_id, message):
        self.subject_id = subject_id
        super().__init__(f"{subject_id}: {message}")
