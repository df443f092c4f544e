"""Exception hierarchy shared by every module."""


class VcspError(Exception):
    pass


class ParseError(VcspError):
    def __init__(self, line, message):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class SemanticError(ParseError):
    """Well-formed text that describes an invalid object."""


class ArityMismatch(VcspError):
    pass


class UnknownLabel(VcspError):
    pass


class UnknownFunction(VcspError):
    pass


class EmptyLanguage(VcspError):
    pass


class EmptyFeas(VcspError):
    pass


class WrongLanguage(VcspError):
    pass


class BudgetExceeded(VcspError):
    pass


class DomainMismatch(VcspError):
    pass


class NotAPolymorphism(VcspError):
    pass


class NotClosed(VcspError):
    pass


class NotApplicable(VcspError):
    pass


class PreconditionFailed(VcspError):
    pass


class IndexOutOfRange(VcspError):
    pass


class UnknownSymbol(VcspError):
    pass


class MismatchError(VcspError):
    def __init__(self, stage, expected, got, reproducer=""):
        self.stage = stage
        self.expected = expected
        self.got = got
        self.reproducer = reproducer
        super().__init__(f"stage {stage}: expected {expected}, got {got}")
