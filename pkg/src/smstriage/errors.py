"""Error hierarchy shared across the service.

Each class maps to one HTTP status in the API layer; the in-process core
raises them directly.
"""


class TriageError(Exception):
    """Base class for all service errors."""

    http_status = 500


class ValidationError(TriageError):
    """Input rejected before any state change (422)."""

    http_status = 422


class NotFoundError(TriageError):
    """Referenced entity does not exist (404)."""

    http_status = 404


class ConflictError(TriageError):
    """Request conflicts with current state (409): duplicate name,
    paused collection, vote on a closed task."""

    http_status = 409


class CannotTrainError(TriageError):
    """Training impossible with the current label set (single category,
    too few labels)."""

    http_status = 409


class StaleVectorError(TriageError):
    """Feature vector was built against a different vocabulary version
    than the model expects; caller must re-vectorize."""

    http_status = 409


class UndefinedAucError(TriageError):
    """AUC undefined: score set has no positives or no negatives."""

    http_status = 422
