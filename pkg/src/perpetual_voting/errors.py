"""Exception hierarchy shared by every module of the package."""


class PerpetualVotingError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PerpetualVotingError, ValueError):
    """Malformed or out-of-range arguments (bad agent id, length mismatch, ...)."""


class DegenerateInputError(InputError):
    """Parameters for which a formula is defined but meaningless, e.g. ln N = 0."""


class ProtocolError(PerpetualVotingError):
    """A player broke the game protocol, such as emitting a malformed profile."""

    def __init__(self, message, round_index=None):
        if round_index is not None:
            message = f"round {round_index}: {message}"
        super().__init__(message)
        self.round_index = round_index


class ResourceError(PerpetualVotingError):
    """An exact enumeration would exceed its configured work budget."""

    def __init__(self, message, required, budget):
        super().__init__(f"{message} (needs {required}, budget {budget})")
        self.required = required
        self.budget = budget


class TranscriptParseError(InputError):
    """A transcript or scripted-adversary file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.path = path
