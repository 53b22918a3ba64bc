"""Exception hierarchy. Everything a user can trigger with a bad model or
bad arguments derives from ModelError; the CLI maps it to exit code 2."""


class ModelError(Exception):
    pass


class ParseError(ModelError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AlphabetError(ModelError):
    pass


class NonBlockingViolation(ModelError):
    pass


class DeterminismViolation(ModelError):
    pass


class ReservedLabelError(ModelError):
    pass


class DisabledAction(ModelError):
    pass


class NotFinite(ModelError):
    pass


class NotTraceBased(ModelError):
    pass


class InvalidTestCase(ModelError):
    def __init__(self, rule, message, witness=None):
        super().__init__(f"{rule}: {message}")
        self.rule = rule
        self.witness = tuple(witness) if witness is not None else None


class ExplosionGuard(ModelError):
    pass


class NotInputEnabled(ModelError):
    pass


class AlphabetMismatch(ModelError):
    pass


class RegimeMismatch(ModelError):
    """A test was executed under a regime it has no transition for."""
