"""Exception hierarchy shared across clintext modules."""


class ClintextError(Exception):
    """Base class; `code` is the machine-readable identifier used on the wire."""

    code = "error"


# --- ingest ---------------------------------------------------------------

class MissingField(ClintextError):
    code = "missing_field"


class BadTimestamp(ClintextError):
    code = "bad_timestamp"


class EmptyText(ClintextError):
    code = "empty_text"


class NotSupported(ClintextError):
    code = "not_supported"


class CyclicGraph(ClintextError):
    code = "cyclic_graph"


class DanglingEdge(ClintextError):
    code = "dangling_edge"


class NoSource(ClintextError):
    code = "no_source"


class NoSink(ClintextError):
    code = "no_sink"


class UnknownFlow(ClintextError):
    code = "unknown_flow"


class FlowBusy(ClintextError):
    code = "flow_busy"


class SourceUnavailable(ClintextError):
    code = "source_unavailable"


# --- deid -----------------------------------------------------------------

class OverlappingSpans(ClintextError):
    code = "overlapping_spans"


class SpanOutOfBounds(ClintextError):
    code = "span_out_of_bounds"


# --- index ----------------------------------------------------------------

class QuerySyntaxError(ClintextError):
    """Carries the character offset at which parsing failed."""

    code = "query_syntax"

    def __init__(self, message, position):
        super().__init__(message)
        self.position = position


class UnknownField(ClintextError):
    code = "unknown_field"


# --- nerl -----------------------------------------------------------------

class DuplicatePreferred(ClintextError):
    code = "duplicate_preferred"


class EmptyName(ClintextError):
    code = "empty_name"


class EmptyCorpus(ClintextError):
    code = "empty_corpus"


class NoContext(ClintextError):
    code = "no_context"


class UnknownCui(ClintextError):
    code = "unknown_cui"


class SingleLabelData(ClintextError):
    code = "single_label_data"


# --- annotate -------------------------------------------------------------

class EmptyDocumentSet(ClintextError):
    code = "empty_document_set"


class UnknownBundle(ClintextError):
    code = "unknown_bundle"


class UnknownProject(ClintextError):
    code = "unknown_project"


class QueueExhausted(ClintextError):
    code = "queue_exhausted"


class UnknownDocument(ClintextError):
    code = "unknown_document"


class ValidationDocument(ClintextError):
    code = "validation_document"


class NoAnnotations(ClintextError):
    code = "no_annotations"


class TrainingBusy(ClintextError):
    code = "training_busy"


# --- cohort ---------------------------------------------------------------

class MixedPatients(ClintextError):
    code = "mixed_patients"


class EmptyManualSet(ClintextError):
    code = "empty_manual_set"
