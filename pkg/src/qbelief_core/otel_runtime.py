from __future__ import annotations

import os
import time
from typing import Any, Dict, Optional

from . import otel_setup
from .classify import EXIT_INFEASIBLE, EXIT_INPUT_ERROR, EXIT_OK
from .cli import RunConfig, RunOutcome, run


# --- Helpers for env flags ----------------------------------------------------

_TRUTHY = {"1", "true", "yes", "on"}


def _otel_enabled(explicit: Optional[bool]) -> bool:
    if explicit is not None:
        return explicit
    return os.getenv("QBELIEF_OTEL_ENABLED", "").lower() in _TRUTHY


def _metrics_enabled() -> bool:
    return os.getenv("QBELIEF_OTEL_METRICS_ENABLED", "").lower() in _TRUTHY


# --- Metrics plumbing (lazy / optional) --------------------------------------

_runs_counter = None
_duration_histogram = None
_metrics_instruments_ready = False


def _ensure_metrics() -> None:
    """Create metric instruments once, if metrics are enabled and OTEL is available."""
    global _runs_counter, _duration_histogram, _metrics_instruments_ready

    if _metrics_instruments_ready or not _metrics_enabled():
        return

    meter = otel_setup.get_meter(__name__)
    if meter is None:
        return
    _runs_counter = meter.create_counter(
        "qbelief_runs_total",
        description="Total number of qbelief analysis runs.",
    )
    _duration_histogram = meter.create_histogram(
        "qbelief_run_duration_seconds",
        description="Latency of qbelief analysis runs.",
        unit="s",
    )
    _metrics_instruments_ready = True


# --- Provider setup ---------------------------------------------------------


def configure_from_env() -> bool:
    """
    Install OTLP providers when QBELIEF_OTEL_ENABLED (and, for metrics,
    QBELIEF_OTEL_METRICS_ENABLED) ask for them. Returns whether tracing is on.
    """
    if not _otel_enabled(None):
        return False
    otel_setup.init_tracer()
    if _metrics_enabled():
        otel_setup.init_metrics()
    return True


# --- Traced run ---------------------------------------------------------------

_OUTCOMES = {EXIT_OK: "success", EXIT_INPUT_ERROR: "input_error", EXIT_INFEASIBLE: "infeasible"}


def run_traced_optional(
    config: RunConfig,
    *,
    otel_enabled: Optional[bool] = None,  # None -> read env QBELIEF_OTEL_ENABLED
    span_name: str = "qbelief.run",
    base_attrs: Optional[Dict[str, Any]] = None,
) -> RunOutcome:
    """
    ``cli.run`` inside a span when OpenTelemetry is installed and enabled,
    plain ``cli.run`` otherwise.

    Every analysis stage becomes a ``qbelief.stage`` span event. With
    QBELIEF_OTEL_METRICS_ENABLED=1 the run is also counted in
    ``qbelief_runs_total`` and timed in ``qbelief_run_duration_seconds``.
    """
    if not _otel_enabled(otel_enabled):
        return run(config)

    tracer = otel_setup.get_tracer(__name__)
    if tracer is None:
        return run(config)
    from opentelemetry.trace import SpanKind, Status, StatusCode

    _ensure_metrics()
    metrics_active = _metrics_instruments_ready and _metrics_enabled()

    attrs = {
        "qbelief.subcommand": config.subcommand.value,
        "qbelief.format": config.output_format.value,
        "qbelief.precision": config.precision,
        "qbelief.inputs": [str(p) for p in config.inputs],
        "qbelief.strict": config.strict,
    }
    if base_attrs:
        attrs.update({k: v for k, v in base_attrs.items() if v is not None})

    stage_events = {"n": 0}
    start = time.perf_counter()
    outcome_label = "error"

    with tracer.start_as_current_span(span_name, kind=SpanKind.INTERNAL) as root:
        for k, v in attrs.items():
            root.set_attribute(k, v)

        def on_stage(name: str) -> None:
            stage_events["n"] += 1
            root.add_event(
                "qbelief.stage",
                {"qbelief.stage.name": name, "qbelief.stage.index": stage_events["n"]},
            )

        try:
            outcome = run(config, on_stage=on_stage)
        except BaseException as exc:
            root.record_exception(exc)
            root.set_attribute("qbelief.outcome", "error")
            root.set_status(Status(StatusCode.ERROR))
            raise
        else:
            outcome_label = _OUTCOMES.get(outcome.exit_code, "error")
            root.set_attribute("qbelief.exit_code", outcome.exit_code)
            root.set_attribute("qbelief.outcome", outcome_label)
            if outcome.error:
                root.set_status(Status(StatusCode.ERROR, outcome.error))
        finally:
            if metrics_active and _runs_counter is not None and _duration_histogram is not None:
                metric_attrs = {
                    "qbelief.subcommand": config.subcommand.value,
                    "qbelief.outcome": outcome_label,
                }
                _runs_counter.add(1, attributes=metric_attrs)
                _duration_histogram.record(time.perf_counter() - start, attributes=metric_attrs)

    return outcome
