"""Structured run events."""

from __future__ import annotations

import logging
from typing import Any

logger = logging.getLogger(__name__)

AuditValue = str | int | float | bool | None


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def log_event(
    *,
    action: str,
    resource_type: str,
    resource_id: str,
    metadata: dict[str, AuditValue],
    level: int = logging.INFO,
) -> dict[str, Any]:
    """Emit one structured event record.

    Parameters
    ----------
    action : str
        Event action such as ``check.completed``.
    resource_type : str
        Kind of resource touched (``scenario``, ``check``, ``report``).
    resource_id : str
        Resource name.
    metadata : dict[str, str | int | float | bool | None]
        Additional event fields.
    level : int, default=logging.INFO
        Logging level.

    Returns
    -------
    dict[str, Any]
        The event as logged.
    """
    event = {
        "action": action,
        "resource_type": resource_type,
        "resource_id": resource_id,
        **metadata,
    }
    fields = " ".join(f"{key}={_format(value)}" for key, value in metadata.items())
    logger.log(
        level,
        "action=%s resource=%s:%s %s",
        action,
        resource_type,
        resource_id,
        fields,
        extra={"event": event},
    )
    return event
