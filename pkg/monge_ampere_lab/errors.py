"""Exceptions raised by the lab."""

from typing import List, Optional


class LabError(Exception):
    """Base class for every failure the lab reports."""


class ConfigError(LabError):
    pass


class ConstraintError(ConfigError):
    pass


class ShapeError(ConfigError):
    pass


class DegenerateCloudError(LabError):
    pass


class IntegrityError(LabError):
    pass


class RangeError(LabError):
    pass


class GeometryError(LabError):
    pass


class ConvergenceError(LabError):
    def __init__(self, message: str, history: Optional[List[dict]] = None):
        super().__init__(message)
        self.history = history or []
