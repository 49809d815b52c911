"""Fingerprint-keyed registry of loaded artifacts.

The service and CLI load corpora, dictionaries, and models through this
registry so that each artifact is read once, addressed by content
fingerprint, and never silently replaced by different content under the
same key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    Corpus,
    DictionarySet,
    corpus_fingerprint,
    dictionaries_fingerprint,
    load_corpus,
    load_dictionaries,
)


class ArtifactConflictError(RuntimeError):
    pass


@dataclass
class ProjectStore:
    root: Path = field(default_factory=Path.cwd)
    _artifacts: dict[str, object] = field(default_factory=dict)

    def register(self, fingerprint: str, artifact: object) -> str:
        existing = self._artifacts.get(fingerprint)
        if existing is not None and existing is not artifact and existing != artifact:
            raise ArtifactConflictError(
                f"fingerprint {fingerprint[:12]} is already bound to different content"
            )
        self._artifacts[fingerprint] = artifact
        return fingerprint

    def get(self, fingerprint: str) -> object:
        try:
            return self._artifacts[fingerprint]
        except KeyError:
            raise KeyError(f"no artifact registered under {fingerprint[:12]}") from None

    def __contains__(self, fingerprint: str) -> bool:
        return fingerprint in self._artifacts

    def load_corpus(self, path: str | Path) -> tuple[str, Corpus]:
        corpus = load_corpus(self.root / path if not Path(path).is_absolute() else path)
        fingerprint = corpus_fingerprint(corpus)
        self.register(fingerprint, corpus)
        return fingerprint, corpus

    def load_dictionaries(self, path: str | Path) -> tuple[str, DictionarySet]:
        dictionaries = load_dictionaries(self.root / path if not Path(path).is_absolute() else path)
        fingerprint = dictionaries_fingerprint(dictionaries)
        self.register(fingerprint, dictionaries)
        return fingerprint, dictionaries
