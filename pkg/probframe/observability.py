"""Tracing hooks.

Spans are recorded through the OpenTelemetry API. Until
``setup_observability`` installs an SDK provider the API is a no-op, so
library code can stay decorated without paying for exporters.
"""

from __future__ import annotations

import functools
import logging
import os
from typing import Any, Callable, Iterable, TypeVar

from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import ConsoleSpanExporter, SimpleSpanProcessor, SpanExporter

F = TypeVar("F", bound=Callable[..., Any])

logger = logging.getLogger(__name__)
tracer = trace.get_tracer("probframe")

_configured = False


def setup_observability(exporters: Iterable[SpanExporter] | None = None) -> None:
    """Install a tracer provider; console export unless exporters are given.

    Once a provider is installed, later calls with explicit exporters attach
    them to it.
    """
    global _configured
    if _configured and exporters is None:
        return
    current = trace.get_tracer_provider()
    provider = current if isinstance(current, TracerProvider) else TracerProvider()
    for exporter in exporters or [ConsoleSpanExporter()]:
        provider.add_span_processor(SimpleSpanProcessor(exporter))
    if provider is not current:
        trace.set_tracer_provider(provider)
    _configured = True
    logger.debug("tracing enabled")


def tracing_requested() -> bool:
    return os.environ.get("PROBFRAME_TRACE", "").lower() in {"1", "true", "yes"}


def traced(name: str, **attributes: Any) -> Callable[[F], F]:
    """Wrap a function in a ``probframe.<name>`` span."""

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            with tracer.start_as_current_span(f"probframe.{name}") as span:
                for key, value in attributes.items():
                    span.set_attribute(key, value)
                return func(*args, **kwargs)

        return wrapper  # type: ignore[return-value]

    return decorator
