"""Exception types shared across the library and mapped to CLI exit codes."""


class DimensionMismatch(ValueError):
    """Inputs disagree on the ambient dimension."""


class EmptyClassError(ValueError):
    """An operation received an empty class where a nonempty one is required."""


class GuardRefused(RuntimeError):
    """An exponential enumeration refused a silently-large input.

    Pass override=True (CLI: --override-guards) to run anyway.
    """


class SolverFailure(RuntimeError):
    """The feasibility solver failed numerically; distinct from infeasibility."""
