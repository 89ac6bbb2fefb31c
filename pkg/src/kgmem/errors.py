"""Exception types shared across the package."""


class KgmemError(Exception):
    """Base class for all package errors."""


class ConfigError(KgmemError):
    """Invalid or infeasible configuration; the message names the offending key."""


class UsageError(KgmemError):
    """An operation was called outside its contract (wrong lengths, finished episode, ...)."""


class VocabularyError(KgmemError):
    """An entity or relation id is unknown to the vocabulary, or a checkpoint does not match it."""
