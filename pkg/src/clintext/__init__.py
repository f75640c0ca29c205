"""clintext: desk-scale clinical free-text analytics.

Subpackages: ingest (dataflow ETL), deid (PHI redaction), index
(inverted-index search), nerl (concept recognition and linking),
annotate (active-learning projects), cohort (trial eligibility), api
(HTTP service and CLI).
"""

__version__ = "0.1.0"

from .documents import Document, DocumentStore

__all__ = ["Document", "DocumentStore", "__version__"]
