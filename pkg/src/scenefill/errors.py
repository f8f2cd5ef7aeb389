from __future__ import annotations


class SceneFillError(RuntimeError):
    """Base class for failures the command line turns into exit codes."""

    exit_code = 4

    def __init__(self, message: str, exit_code: int | None = None):
        super().__init__(message)
        if exit_code is not None:
            self.exit_code = exit_code


class InputError(SceneFillError, ValueError):
    """Bad arguments, inconsistent geometry or invalid configuration."""

    exit_code = 2


class SamplingError(InputError):
    """A sample was requested outside the frame rectangle plus its 0.5 px margin."""


class GeometryError(InputError):
    """Two fields or images do not live on compatible domains."""


class ImageIOError(SceneFillError):
    exit_code = 3


class NumericalError(SceneFillError):
    exit_code = 4


__all__ = [
    "GeometryError",
    "ImageIOError",
    "InputError",
    "NumericalError",
    "SamplingError",
    "SceneFillError",
]
