from typing import Any

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS: dict[str, Any] = {
    "POINTS_PER_INTERVAL": 64,
    "ENVELOPE_SECOND_PARAM": "lambda",
    "CONCURRENCY": 4,
    "TASK_DEADLINE": 300,
    "PROGRESS_INTERVAL": 5,
}


def setting(name: str) -> Any:
    """
    Returns the HILFER_<name> Django setting, or the library default if it
    is not set (or there are no Django settings at all).
    """
    try:
        return getattr(settings, f"HILFER_{name}", DEFAULTS[name])
    except ImproperlyConfigured:
        return DEFAULTS[name]
