from .cdb import ConceptDatabase, build_cdb, load_ontology_tsv
from .vocab import Vocab, train_word_embeddings
from .context import compute_context_vector
from .linking import Candidate, detect_candidates, link_entities
from .training import SupervisedExample, train_self_supervised, train_supervised
from .meta import MetaModel, predict_meta, train_meta
from .docclf import DocClassifier, classify_doc, train_doc_classifier
from .evaluation import evaluate_ner
from .mentions import AnnotationStore, EntityMention
from .bundle import ModelBundle, annotate_text, mentions_to_json

__all__ = [
    "ConceptDatabase", "build_cdb", "load_ontology_tsv",
    "Vocab", "train_word_embeddings",
    "compute_context_vector",
    "Candidate", "detect_candidates", "link_entities",
    "SupervisedExample", "train_self_supervised", "train_supervised",
    "MetaModel", "predict_meta", "train_meta",
    "DocClassifier", "classify_doc", "train_doc_classifier",
    "evaluate_ner",
    "AnnotationStore", "EntityMention",
    "ModelBundle", "annotate_text", "mentions_to_json",
]
