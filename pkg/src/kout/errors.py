class KoutError(Exception):
    pass


class SelfLoop(KoutError, ValueError):
    pass


class VertexOutOfRange(KoutError, ValueError):
    pass


class BadParameters(KoutError, ValueError):
    pass


class GenerationFailed(KoutError, RuntimeError):
    pass


class ParseError(KoutError, ValueError):
    pass


class EdgeNotInGraph(KoutError, KeyError):
    pass


class TooLargeForBruteForce(KoutError, ValueError):
    pass


class FieldTooSmall(KoutError, ValueError):
    pass


class EdgeOutOfUniverse(KoutError, ValueError):
    pass


class DecodeFailure(KoutError):
    """No edge set of weight <= the cap matches the syndrome."""


class MissingMessage(KoutError, ValueError):
    pass


class SchemeMismatch(KoutError, ValueError):
    pass


class BudgetExceeded(KoutError):
    def __init__(self, round_index: int, machine: int, words: int, budget: int):
        super().__init__(
            f"round {round_index}: machine {machine} needs {words} words (budget {budget})"
        )
        self.round_index = round_index
        self.machine = machine
        self.words = words
        self.budget = budget


class UnknownColumn(KoutError, KeyError):
    pass
