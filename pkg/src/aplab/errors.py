"""Exception hierarchy shared by all aplab modules."""

from __future__ import annotations


class AplabError(Exception):
    """Base class for every error raised by aplab."""


class NonPositiveStep(AplabError, ValueError):
    pass


class DimensionMismatch(AplabError, ValueError):
    pass


class ShiftExceedsWindow(AplabError, ValueError):
    pass


class WindowExceedsDomain(AplabError, ValueError):
    pass


class WindowOutOfDomain(AplabError, ValueError):
    pass


class InvalidExponent(AplabError, ValueError):
    pass


class InvalidExponentOrder(AplabError, ValueError):
    pass


class GridMismatch(AplabError, ValueError):
    pass


class ScheduleExceedsDomain(AplabError, ValueError):
    pass


class EmptySearchRange(AplabError, ValueError):
    pass


class IntervalKindError(AplabError, ValueError):
    """An operation needs a different interval kind (e.g. the half line)."""


class NoValidQ(AplabError, ValueError):
    pass


class ConstraintViolation(AplabError, ValueError):
    pass


class DegenerateK(AplabError, ValueError):
    pass


class SpecFormatError(AplabError, ValueError):
    """A serialized function spec could not be decoded."""


class ConfigError(AplabError):
    """Base for experiment configuration problems."""


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ValidationError(ConfigError):
    """Aggregates every validation problem found in a config."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
