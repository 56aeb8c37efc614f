class ParseError(ValueError):
    """Bad expression text. ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ExprSyntaxError(ParseError):
    pass


class UnknownSymbol(ParseError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown symbol {name!r}", offset)
        self.name = name


class EvaluationError(ArithmeticError):
    """Numeric evaluation failed; ``node`` is the offending subtree."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class DomainError(EvaluationError):
    pass


class NonFinite(EvaluationError):
    pass


class UnboundSymbol(EvaluationError, KeyError):
    def __str__(self):
        return self.args[0]
