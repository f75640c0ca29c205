import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from clintext.documents import Document


def make_doc(doc_id, text, patient_id="p1", doc_type="clinical_note",
             ts="2021-06-01T00:00:00Z", source="test"):
    return Document(
        doc_id=doc_id, patient_id=patient_id, doc_type=doc_type,
        timestamp=datetime.fromisoformat(ts.replace("Z", "+00:00")),
        source=source, text=text,
    )


@pytest.fixture
def three_doc_corpus():
    return [
        make_doc("d1", "fever chills"),
        make_doc("d2", "fever fever"),
        make_doc("d3", "cough"),
    ]
