"""Exception hierarchy shared by all mvg modules."""


class MvgError(Exception):
    pass


class NotSubMultiset(MvgError):
    """Raised when subtracting a multiset that is not contained in the minuend."""


class LhsMismatch(MvgError):
    pass


class BadDistribution(MvgError):
    pass


class EmptyDistributionTarget(BadDistribution):
    """Indices remain but there is no nonterminal to receive them."""


class InvalidDerivation(MvgError):
    pass


class NotRinf(MvgError):
    pass


class UnknownToken(MvgError):
    def __init__(self, token, position):
        super().__init__(f"token {token!r} at position {position} is not a terminal of the grammar")
        self.token = token
        self.position = position


class BudgetExceeded(MvgError):
    pass


class GrammarSyntaxError(MvgError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class InvalidGrammar(MvgError):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)
