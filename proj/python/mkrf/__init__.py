"""Modified Kaehler-Ricci flow on CP1 and F1, reduced to the moment coordinate."""

from ._core import (
    DegenerateMetric,
    FlowTrace,
    NumericalFailure,
    __version__,
    classify,
    cli,
    config_keys,
    read_trace,
    render_config,
    run,
    simulate,
    soliton,
    soliton_constant,
    state,
    trace_header,
)

__all__ = [
    "DegenerateMetric",
    "FlowTrace",
    "NumericalFailure",
    "__version__",
    "classify",
    "cli",
    "config_keys",
    "read_trace",
    "render_config",
    "run",
    "simulate",
    "soliton",
    "soliton_constant",
    "state",
    "trace_header",
]
