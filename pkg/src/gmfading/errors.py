"""Exception hierarchy shared by every module."""


class GMFadingError(Exception):
    pass


class NotPsd(GMFadingError):
    pass


class NotPd(GMFadingError):
    pass


class DimensionMismatch(GMFadingError, ValueError):
    pass


class InvalidParams(GMFadingError, ValueError):
    pass


class IndexOutOfRange(GMFadingError, IndexError):
    pass


class InvalidOrder(GMFadingError, ValueError):
    pass


class RejectionExhausted(GMFadingError):
    pass


class ParseError(GMFadingError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ValidationError(GMFadingError, ValueError):
    """Carries every violated invariant, not just the first."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
