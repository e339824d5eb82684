"""Exception hierarchy shared across the package."""


class PathScoreError(Exception):
    """Base class for every error raised by pathscore."""


class DuplicateActionError(PathScoreError):
    pass


class UnknownActionRefError(PathScoreError):
    pass


class ParseError(PathScoreError):
    pass


class ValidationError(PathScoreError):
    pass


class UnknownStateError(PathScoreError):
    pass


class CyclicProgressGraphError(PathScoreError):
    pass


class GoldenCapExceededError(PathScoreError):
    pass


class EmptyGoldenSetError(PathScoreError):
    pass


class EmptyReferenceSetError(PathScoreError):
    pass


class EmptyCandidateSetError(PathScoreError):
    pass


class InvalidPositionError(PathScoreError):
    pass


class UnknownFormatError(PathScoreError):
    pass
