"""Exception hierarchy shared by every coinsearch module."""


class CoinSearchError(Exception):
    """Base class for all errors raised by this package."""


class DescriptorError(CoinSearchError, ValueError):
    """A subset descriptor is malformed or does not fit the instance."""


class SizeError(CoinSearchError, ValueError):
    """An operation was asked to work at a scale it does not support."""


class DomainError(CoinSearchError, ValueError):
    """An analysis function was called outside its domain."""


class ContractError(CoinSearchError, ValueError):
    """An argument combination violates a documented precondition."""


class CorruptedOracleError(CoinSearchError):
    """The scale reported an outcome no valid placement could produce."""


class ProtocolError(CoinSearchError):
    """A feedback sequence or channel transcript is not a valid session."""
