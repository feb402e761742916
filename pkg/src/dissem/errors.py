"""Exception types shared across the library."""

from __future__ import annotations


class DissemError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(DissemError, ValueError):
    """Operands have incompatible shapes or moduli."""


class SupportViolation(DissemError, ValueError):
    """A coding vector uses a symbol its node does not hold."""


class NotOneRoundSolvable(DissemError):
    """No single-round scheme exists; carries the failing (node, symbol) pairs."""

    def __init__(self, failures, message=None):
        self.failures = tuple(failures)
        if message is None:
            pairs = ", ".join(f"node {v + 1} misses symbol {s + 1}"
                              for v, s in self.failures)
            message = f"not solvable in one round: {pairs}"
        super().__init__(message)


class SearchCapExceeded(DissemError):
    """Instance is larger than the exact search is configured to accept."""


class CapExceeded(DissemError):
    """A bound computation exceeds its configured size cap."""


class ReceiverUncovered(DissemError):
    """A receiver has no transmitter in-neighbor, so no partition covers it."""


class NoDecoding(DissemError):
    """Requested symbol is not in the span available to the node."""


class IllegalTransmission(DissemError):
    """A scheme asks a node to broadcast a vector outside its knowledge span."""

    def __init__(self, round_index, node, vector):
        self.round_index = round_index
        self.node = node
        self.vector = tuple(vector)
        super().__init__(
            f"round {round_index}: node {node + 1} cannot form {list(vector)}"
        )


class NotSolvable(DissemError):
    """Graph is not strongly connected; no round count serves every assignment."""


class RoundsTooFew(DissemError):
    """Requested round budget is below the minimum the graph needs."""

    def __init__(self, required):
        self.required = required
        super().__init__(f"needs at least {required} rounds")


class GenerationFailed(DissemError):
    """Random instance generation exhausted its retry budget."""


class InfeasibleRequest(DissemError):
    """Some requested symbol is unreachable from every node holding it."""


class ZeroLowerBound(DissemError):
    """Distance lower bound is zero (nothing is requested); ratio undefined."""
