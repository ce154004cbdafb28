"""Exception hierarchy shared by all itskit modules."""


class ItsError(Exception):
    """Base class for every error raised by itskit."""


class DomainMismatch(ItsError, ValueError):
    pass


class InvalidInput(ItsError, ValueError):
    pass


class AlphabetMismatch(ItsError, ValueError):
    pass


class NondeterministicInput(ItsError, ValueError):
    """Raised when an operation needs an automaton but got a relation."""


class TooLarge(ItsError, ValueError):
    """Raised by exhaustive oracles above their state-count bound."""


class SizeLimit(ItsError, RuntimeError):
    """A construction would exceed its configured node cap."""


class InvalidConfig(ItsError, ValueError):
    pass


class InconsistentTrials(ItsError, ValueError):
    """Two trials disagree on the task label of a shared prefix."""

    def __init__(self, prefix, labels):
        super().__init__(f"prefix {prefix!r} carries labels {labels!r}")
        self.prefix = prefix
        self.labels = labels


class NotSufficient(ItsError, ValueError):
    """The partition handed to a derivation step is not sufficient."""

    def __init__(self, violation):
        super().__init__(f"partition is not sufficient: {violation}")
        self.violation = violation


class MissingTransition(ItsError, KeyError):
    """A filter or plan has no transition for the next input symbol."""

    def __init__(self, state, symbol, stage=None, partial=None):
        super().__init__(f"no transition from state {state} on {symbol!r}")
        self.state = state
        self.symbol = symbol
        self.stage = stage
        self.partial = partial


class InconsistentObservation(ItsError, ValueError):
    """The model cannot explain an observation: the belief became empty."""
