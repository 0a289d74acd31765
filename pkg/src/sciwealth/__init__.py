"""Territorial knowledge capital and research productivity from publication corpora."""

__version__ = "0.1.0"

from .models import (  # noqa: E402
    ComputationError,
    Corpus,
    SciwealthError,
    ValidationError,
)

__all__ = ["ComputationError", "Corpus", "SciwealthError", "ValidationError", "__version__"]
