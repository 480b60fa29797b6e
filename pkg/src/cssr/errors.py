"""Exception hierarchy.

``ValidationError`` covers bad input data or documents, ``InferenceError``
covers reconstruction failures that depend on the data (too little of it,
or an lmax too large for it). The CLI maps these to exit codes 2 and 3.
"""


class CSSRError(Exception):
    pass


class ValidationError(CSSRError, ValueError):
    pass


class InferenceError(CSSRError):
    pass


class EmptyAlphabet(ValidationError):
    pass


class DuplicateSymbol(ValidationError):
    pass


class UnknownSymbol(ValidationError):
    def __init__(self, symbol, position, line=None):
        self.symbol = symbol
        self.position = position
        self.line = line
        where = f"position {position}" if line is None else f"line {line}, position {position}"
        super().__init__(f"unknown symbol {symbol!r} at {where}")


class EmptyInput(ValidationError):
    pass


class DepthZero(ValidationError):
    pass


class SuffixTooLong(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


class DegenerateAlphabet(ValidationError):
    pass


class AlphabetMismatch(ValidationError):
    pass


class WordSpaceTooLarge(ValidationError):
    pass


class InvalidProbability(ValidationError):
    pass


class InvalidDistribution(ValidationError):
    pass


class DanglingTarget(ValidationError):
    pass


class NotStronglyConnected(ValidationError):
    pass


class SuffixNotInState(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class InsufficientData(InferenceError):
    pass


class NoRecurrentStates(InferenceError):
    pass
