"""Exception hierarchy shared by every module of the package."""


class SDError(Exception):
    """Base class for all errors raised by sdconform."""


class BudgetExceeded(SDError):
    """A configured size or time budget was exhausted."""


class SizeBudgetExceeded(BudgetExceeded):
    def __init__(self, message, path=None):
        if path:
            message = f"{message} (at {path})"
        super().__init__(message)
        self.path = path


class AtomBudgetExceeded(BudgetExceeded):
    pass


class SearchBudgetExceeded(BudgetExceeded):
    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = list(partial)


class NestedCritical(SDError):
    pass


class InvalidHiddenSet(SDError):
    pass


class InputError(SDError):
    """Problems with user-supplied files or arguments."""


class ParseError(InputError):
    def __init__(self, message, span=None):
        self.span = span
        if span is not None:
            message = f"{span}: {message}"
        super().__init__(message)


class UnsupportedOperator(ParseError):
    pass


class ValidationError(InputError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))
