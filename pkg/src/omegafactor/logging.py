"""structlog setup for omegafactor.

stdout is reserved for reports and exports, so the console handler writes to
stderr; an optional JSON-lines file receives the same events. Domain values in
event fields (tree addresses, the omega marker, exhausted sigma) are rendered
as their text form so both sinks stay readable and JSON-safe.
"""

from __future__ import annotations

import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any

import structlog
from structlog.typing import EventDict, WrappedLogger

from omegafactor.domain import TreeAddress


def _domain_text(value: Any) -> Any:
    if isinstance(value, TreeAddress):
        return value.text
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, tuple | list):
        return [_domain_text(v) for v in value]
    return value


def render_domain_values(_: WrappedLogger, __: str, event_dict: EventDict) -> EventDict:
    for key, value in event_dict.items():
        event_dict[key] = _domain_text(value)
    return event_dict


def configure(
    *,
    level: str = "WARNING",
    json_file: Path | None = None,
    console: bool = True,
) -> None:
    """Install the handlers. Calling again replaces them and clears bound scope."""
    shared: list[Any] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        render_domain_values,
        structlog.processors.format_exc_info,
    ]
    structlog.contextvars.clear_contextvars()
    structlog.configure(
        processors=[*shared, structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(level.upper())

    handlers: list[tuple[logging.Handler, Any]] = []
    if console:
        handlers.append(
            (logging.StreamHandler(sys.stderr), structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))
        )
    if json_file is not None:
        json_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append((logging.FileHandler(json_file), structlog.processors.JSONRenderer(sort_keys=True)))
    for handler, renderer in handlers:
        handler.setFormatter(
            structlog.stdlib.ProcessorFormatter(
                processors=[structlog.stdlib.ProcessorFormatter.remove_processors_meta, renderer]
            )
        )
        root.addHandler(handler)


def bind_scope(**scope: Any) -> None:
    """Tag every following event with the command and its inputs."""
    structlog.contextvars.bind_contextvars(**scope)


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger(name)  # type: ignore[no-any-return]
