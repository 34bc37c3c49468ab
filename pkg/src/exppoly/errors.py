"""Exception hierarchy; each error carries the pipeline stage and a CLI exit code."""


class PronyError(Exception):
    exit_code = 1
    stage = "general"

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.message = message
        if stage is not None:
            self.stage = stage

    def __str__(self) -> str:
        return f"[{self.stage}] {self.message}"


class ParseError(PronyError, ValueError):
    exit_code = 2
    stage = "parse"


class CoverageError(PronyError, KeyError):
    exit_code = 3
    stage = "sampling"

    # KeyError quotes its message in str(); keep the plain form
    __str__ = PronyError.__str__


class MultiplicityBoundError(PronyError):
    exit_code = 4
    stage = "ideal"


class ClusteringError(PronyError):
    exit_code = 5
    stage = "zeros"


class SolveError(PronyError):
    exit_code = 6
    stage = "coefficients"
