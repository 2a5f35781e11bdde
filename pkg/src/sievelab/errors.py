"""Exception types shared across the package."""


class SievelabError(Exception):
    """Base class for all errors raised by this package."""


class CapacityError(SievelabError):
    """A requested enumeration or matrix would exceed a configured size cap."""


class RamifiedError(SievelabError):
    """An argument shares a factor with 3, where cubic symbols are undefined."""


class ConvergenceError(SievelabError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class TableFormatError(SievelabError):
    """An eigenvalue table on disk does not match the expected format."""
