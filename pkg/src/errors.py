# Exception hierarchy shared by the library, the pipelines and the CLI.
# The CLI maps these onto exit codes (see src/cli.py), the API onto HTTP status codes.

from __future__ import annotations


class GraphonSpectraError(Exception):
    pass


class ValidationError(GraphonSpectraError, ValueError):
    # bad input values: asymmetric profiles, probabilities out of range, unknown names
    pass


class SizeCapError(GraphonSpectraError):
    def __init__(self, what: str, requested: int, cap: int) -> None:
        super().__init__(f"{what} {requested} exceeds the configured cap {cap}")
        self.requested = requested
        self.cap = cap


class MalformedWordError(ValidationError):
    pass


class StructureError(ValidationError):
    # e.g. a graphon without the bipartite layout a Gram computation needs
    pass


class DomainError(ValidationError):
    pass


class NonConvergenceError(GraphonSpectraError):
    def __init__(self, message: str, residual: float, iterations: int, z: complex | None = None) -> None:
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations
        self.z = z


class ConfigError(GraphonSpectraError):
    pass


class StageError(GraphonSpectraError):
    # wraps a failure inside run_experiment so the report names the failing stage
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
