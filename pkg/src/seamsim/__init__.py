"""seamsim: what-if analysis of service decomposition scenarios.

Rewrites execution traces of an existing application as if service
candidates had been moved into out-of-process components, then compares the
original and rewritten traces for duration changes, consistency issues, and
committed-versus-reverted writes.
"""

from .model import (
    Component,
    ConflictBehavior,
    Connection,
    ConnectionKind,
    ConnectionView,
    DataStore,
    DeploymentModel,
    MergeError,
    ScenarioDelta,
    ServiceCandidate,
    TransactionBehavior,
    TransactionPropagation,
    UnknownComponentError,
    Violation,
    apply_delta,
    connection_for,
    microservice_groups,
    validate_model,
)
from .dsl import ParseDiagnostic, ParseResult, SourceSpan, parse_delta, parse_model, serialize_model
from .traces import (
    Event,
    FormatError,
    Span,
    Trace,
    TraceValidationError,
    build_span_tree,
    read_traces,
    validate_trace,
    write_traces,
)
from .simtypes import SimulationError
from .txsim import EntryAction, TxAnnotatedTrace, decide_entry, simulate

__version__ = "0.1.0"
