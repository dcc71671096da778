from rlser.corpus.manifest import Corpus, ManifestError, Utterance, load_manifest, save_manifest
from rlser.corpus.split import (
    CompositionScheme,
    DomainAssignment,
    balance_classes,
    compose_domains,
    split_corpus,
)
from rlser.corpus.synthetic import DomainShift, SyntheticSpec, generate_synthetic_corpus

__all__ = [
    "CompositionScheme",
    "Corpus",
    "DomainAssignment",
    "DomainShift",
    "ManifestError",
    "SyntheticSpec",
    "Utterance",
    "balance_classes",
    "compose_domains",
    "generate_synthetic_corpus",
    "load_manifest",
    "save_manifest",
    "split_corpus",
]
