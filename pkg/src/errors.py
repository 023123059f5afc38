"""Error hierarchy with stable codes surfaced by the command line."""


class CcvError(Exception):
    """Base class for every error this package raises on purpose."""

    code = "internal"
    exit_status = 1

    def to_record(self) -> dict:
        return {"code": self.code, "message": str(self)}


class ArgumentError(CcvError, ValueError):
    code = "argument"
    exit_status = 2


class DataValidationError(ArgumentError):
    code = "data_validation"


class ConfigError(ArgumentError):
    code = "config"


class DegenerateGridError(CcvError):
    code = "degenerate_grid"
    exit_status = 3


class SolverDivergenceError(CcvError, RuntimeError):
    """The penalized objective went up across an outer iteration.

    ``partial_path`` holds the grid positions fitted before the failure so
    callers can keep the usable prefix.
    """

    code = "solver_divergence"
    exit_status = 3

    def __init__(self, message: str, position: int = -1, partial_path=None):
        super().__init__(message)
        self.position = position
        self.partial_path = partial_path


class OversizeModelError(CcvError):
    code = "oversize_model"
    exit_status = 3


class SelectionError(CcvError, RuntimeError):
    code = "selection_failed"
    exit_status = 3
