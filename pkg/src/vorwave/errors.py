"""Exception hierarchy shared by all modules.

``DomainError`` marks inputs outside a mathematical domain (``s <= s0``,
``r <= R_c``, ...); ``NumericalError`` marks algorithms that did not converge.
The CLI maps them to exit statuses 1 and 2.
"""


class DomainError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass
