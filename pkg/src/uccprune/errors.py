"""Shared exception types.

Kept in one place so the CLI can map them to stable exit codes.
"""


class FcidumpError(ValueError):
    """Malformed or inconsistent FCIDUMP content."""


class CapacityError(RuntimeError):
    """Problem size exceeds a hard engine limit (qubits or determinants)."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class ContractViolation(ValueError):
    """Caller passed data that violates a documented precondition."""
