"""Real-time short-message classification with human-in-the-loop labeling.

The package is a library first: :class:`~smstriage.service.TriageService`
is the embeddable core, ``smstriage.httpapi`` wraps it in an HTTP API, and
``smstriage.cli`` provides the serve/replay/synth/autolabel/stats tools.
"""

from .config import ServiceConfig, load_config
from .errors import (
    CannotTrainError,
    ConflictError,
    NotFoundError,
    StaleVectorError,
    TriageError,
    UndefinedAucError,
    ValidationError,
)
from .service import TriageService

__all__ = [
    "ServiceConfig",
    "load_config",
    "TriageService",
    "TriageError",
    "ValidationError",
    "NotFoundError",
    "ConflictError",
    "CannotTrainError",
    "StaleVectorError",
    "UndefinedAucError",
]

__version__ = "0.1.0"
