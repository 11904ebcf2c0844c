#!/usr/bin/env python3
"""Error hierarchy. Everything raised on purpose is a ValueError subclass."""


class AcxError(ValueError):
    """Base class for all toolkit errors."""


class ExpressionSyntaxError(AcxError):

    def __init__(self, source: str, position: int, expected: str):
        self.source = source
        self.position = position
        self.expected = expected
        super().__init__(f"Syntax error at position {position} in {source!r}: {expected}")


class UnknownVariable(AcxError):

    def __init__(self, name: str, dim: int):
        self.name = name
        self.dim = dim
        super().__init__(f"Unknown variable '{name}': declared dimension is {dim}")


class DomainError(AcxError):
    """Evaluation left the real domain of a node (ln/sqrt of a bad argument, division by zero, overflow)."""

    def __init__(self, node, point):
        self.node = node
        self.point = tuple(float(v) for v in point)
        super().__init__(f"Domain error evaluating {node} at {self.point}")


class DimensionError(AcxError):
    pass


class NoConvergence(AcxError):
    pass


class DegenerateGradient(AcxError):
    pass


class UnexpectedDimension(AcxError):
    pass


class NotInDistribution(AcxError):
    pass


class RankDeficient(AcxError):
    pass


class ConfigError(AcxError):
    pass


class ReportIoError(AcxError):
    pass


class StageError(AcxError):
    """Wraps an error raised while running a scenario with the stage and sample it came from."""

    def __init__(self, stage: str, sample: int, cause: Exception):
        self.stage = stage
        self.sample = sample
        self.cause = cause
        super().__init__(f"Stage '{stage}', sample {sample}: {cause}")
