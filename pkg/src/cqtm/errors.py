"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


class ResourceError(RuntimeError):
    """A request would exceed a configured memory or cost budget."""


class NonterminationError(RuntimeError):
    """A machine run did not reach its final configuration in time."""


class MachineHalted(Exception):
    """No step-operator term applies to the configuration."""


class IntegrityError(ArithmeticError):
    """A symmetry that must hold for transfer matrices was violated."""


class ResonanceError(ZeroDivisionError):
    """Transmission amplitude is singular (|W22| = 0)."""
