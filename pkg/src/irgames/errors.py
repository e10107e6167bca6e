class GameError(ValueError):
    """Domain error raised by game, polynomial and solver operations."""


class IncompleteStrategyError(GameError):
    pass


class ParseError(ValueError):
    """Malformed text input. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class BudgetExceeded(GameError):
    pass
