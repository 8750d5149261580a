from __future__ import annotations

import os
from typing import Optional

# Imports stay in a try/except so qbelief-core works without opentelemetry
# installed (the OTEL layer then becomes a no-op).
try:
    from opentelemetry import metrics, trace
except Exception:  # pragma: no cover - API missing
    metrics = trace = None  # type: ignore[assignment]

try:
    from opentelemetry.sdk.resources import Resource
    from opentelemetry.sdk.trace import TracerProvider
    from opentelemetry.sdk.trace.export import BatchSpanProcessor

    # Traces: HTTP vs gRPC exporters
    from opentelemetry.exporter.otlp.proto.http.trace_exporter import (
        OTLPSpanExporter as OTLPHttpSpanExporter,
    )
    from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import (
        OTLPSpanExporter as OTLPGrpcSpanExporter,
    )

    # Metrics: HTTP vs gRPC exporters
    from opentelemetry.sdk.metrics import MeterProvider
    from opentelemetry.sdk.metrics.export import PeriodicExportingMetricReader
    from opentelemetry.exporter.otlp.proto.http.metric_exporter import (
        OTLPMetricExporter as OTLPHttpMetricExporter,
    )
    from opentelemetry.exporter.otlp.proto.grpc.metric_exporter import (
        OTLPMetricExporter as OTLPGrpcMetricExporter,
    )

    _OTEL_AVAILABLE = True
except Exception:  # pragma: no cover - graceful fallback when OTEL is missing
    _OTEL_AVAILABLE = False

    TracerProvider = object  # type: ignore[assignment,misc]
    MeterProvider = object  # type: ignore[assignment,misc]


DEFAULT_SERVICE_NAME = "qbelief-cli"

_tracer_provider: Optional[TracerProvider] = None
_meter_provider: Optional[MeterProvider] = None


def default_exporter() -> str:
    return os.getenv("QBELIEF_OTEL_EXPORTER", "http").lower()


def _build_resource(service_name: str) -> "Resource":
    """Resource shared by traces and metrics; version from QBELIEF_SERVICE_VERSION."""
    service_version = os.getenv("QBELIEF_SERVICE_VERSION", "dev")
    return Resource.create(
        {
            "service.name": service_name,
            "service.version": service_version,
        }
    )


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


def init_tracer(service_name: str = DEFAULT_SERVICE_NAME, exporter: Optional[str] = None) -> None:
    """
    Install a TracerProvider with an OTLP span exporter.

    :param service_name: logical service name shown by the tracing backend
    :param exporter: "http" or "grpc"; defaults to QBELIEF_OTEL_EXPORTER, else "http"
    """
    global _tracer_provider

    if not _OTEL_AVAILABLE or _tracer_provider is not None:
        return

    resource = _build_resource(service_name)
    if (exporter or default_exporter()) == "grpc":
        span_exporter = OTLPGrpcSpanExporter()
    else:
        span_exporter = OTLPHttpSpanExporter()

    provider = TracerProvider(resource=resource)
    provider.add_span_processor(BatchSpanProcessor(span_exporter))

    trace.set_tracer_provider(provider)
    _tracer_provider = provider


def get_tracer(instrumentation_name: str = "qbelief_core.otel_runtime"):
    """Tracer from our provider, the global one, or None when the OTEL API is missing."""
    if trace is None:
        return None
    if _tracer_provider is None:
        return trace.get_tracer(instrumentation_name)
    return _tracer_provider.get_tracer(instrumentation_name)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def init_metrics(service_name: str = DEFAULT_SERVICE_NAME, exporter: Optional[str] = None) -> None:
    global _meter_provider

    if not _OTEL_AVAILABLE or _meter_provider is not None:
        return

    resource = _build_resource(service_name)
    if (exporter or default_exporter()) == "grpc":
        metric_exporter = OTLPGrpcMetricExporter()
    else:
        metric_exporter = OTLPHttpMetricExporter()

    reader = PeriodicExportingMetricReader(metric_exporter)
    provider = MeterProvider(resource=resource, metric_readers=[reader])

    metrics.set_meter_provider(provider)
    _meter_provider = provider


def get_meter(instrumentation_name: str = "qbelief_core.otel_runtime"):
    """Meter from our provider, the global one, or None when the OTEL API is missing."""
    if metrics is None:
        return None
    if _meter_provider is None:
        return metrics.get_meter(instrumentation_name)
    return _meter_provider.get_meter(instrumentation_name)


def shutdown() -> None:
    """Flush exporters; a CLI process exits before periodic export fires."""
    if _tracer_provider is not None:
        _tracer_provider.shutdown()
    if _meter_provider is not None:
        _meter_provider.shutdown()
