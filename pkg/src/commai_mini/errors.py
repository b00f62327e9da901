"""Exception types shared across the environment."""

from __future__ import annotations


class CommaiMiniError(Exception):
    """Base class for all errors raised by this package."""


class DescriptionSyntaxError(CommaiMiniError):
    """The description text could not be tokenized or derived from the grammar."""


class DescriptionValidationError(CommaiMiniError):
    """A structurally parseable description violates a grammar invariant.

    ``reason`` is one of the stable reason codes:
    ``negation-without-anything``, ``mixed-operators``, ``duplicate-term``,
    ``ngram-too-long``, ``empty-description``.
    """

    def __init__(self, reason: str, message: str | None = None) -> None:
        super().__init__(message or reason)
        self.reason = reason


class GuardExceeded(CommaiMiniError):
    """A combinatorial guard (alphabet size, length, term count) was exceeded."""


class Unsatisfiable(CommaiMiniError):
    """No member string of the requested length exists for this description."""


class ResampleExhausted(CommaiMiniError):
    """Bounded random construction failed to find a valid sample."""


class NoNegativeExists(CommaiMiniError):
    """The description accepts every nonempty string, so no negative target exists."""


class SpecInvalid(CommaiMiniError):
    """A task spec violates the invariants of its task set."""


class NonAsciiInput(CommaiMiniError):
    """Message text contains characters outside 7-bit ASCII."""


class ChannelClosed(CommaiMiniError):
    """The learner channel went away mid-episode."""


class PromptParseError(CommaiMiniError):
    """An environment prompt did not match the documented message grammar."""


class UnknownAgent(CommaiMiniError):
    """No built-in agent is registered under the requested name."""


class BindFailure(CommaiMiniError):
    """The server could not bind its listening socket."""
