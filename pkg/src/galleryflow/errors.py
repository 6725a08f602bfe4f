"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class GalleryFlowError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(GalleryFlowError):
    """Bad or unknown configuration key/value."""


class CorpusRejectedError(GalleryFlowError):
    """Input corpus failed a bulk quality gate (e.g. mostly malformed)."""


class MuseumLoadError(GalleryFlowError):
    """Museum document failed validation; ``path`` points at the offender."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class DanglingReferenceError(MuseumLoadError):
    pass


class DuplicateIdError(MuseumLoadError):
    pass


class AsymmetricEdgeError(MuseumLoadError):
    pass


class DisconnectedGraphError(MuseumLoadError):
    pass


class ConvergenceError(GalleryFlowError):
    """Iterative solver did not converge; carries the last delta seen."""

    def __init__(self, message: str, last_delta: float):
        super().__init__(message)
        self.last_delta = last_delta
