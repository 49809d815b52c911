"""Data model and ingestion for labeled sentences with shallow semantic frames.

A corpus is a list of sentences, each carrying a binary label and zero or
more pre-annotated frames. A frame names the action lemma, a fixed set of
grammatical properties of the action, and argument spans (who did it, to
whom, where, when, how) pointing back into the sentence's token list.

File formats owned by this module:

* Corpus: JSON Lines, one sentence object per line::

    {"id": 17, "text": "...", "tokens": [...], "label": 1,
     "frames": [{"action_lemma": "submit",
                 "properties": {"tense": "past", ...},
                 "arguments": {"agent": [{"text": "the firm",
                                          "token_start": 0,
                                          "token_end": 2}], ...}}]}

* Dictionaries: a single JSON object mapping dictionary name to a list of
  surface strings. Entries are lowercased and deduplicated on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .fingerprint import fingerprint_obj

PROPERTY_NAMES = frozenset(
    {"tense", "aspect", "mood", "modalclass", "voice", "polarity"}
)

ARGUMENT_ROLES = (
    "agent",
    "theme",
    "object",
    "beneficiary",
    "context:temporal",
    "context:locative",
    "manner",
)

# Pseudo-role for dictionary predicates that test the action lemma itself
# rather than an argument span.
ACTION_LEMMA_ROLE = "action_lemma"


class CorpusError(ValueError):
    """Raised when a corpus file or constructed corpus breaks the contract."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DictionaryError(ValueError):
    """Raised for malformed dictionary files."""


@dataclass(frozen=True)
class ArgumentSpan:
    """A contiguous token range realizing an argument role.

    ``text`` must equal the space-joined tokens of the range, which lets
    consumers highlight the span without re-deriving offsets.
    """

    text: str
    token_start: int
    token_end: int


@dataclass(frozen=True)
class SlsFrame:
    """One shallow semantic frame: action lemma, properties, argument spans."""

    action_lemma: str
    properties: dict[str, str] = field(default_factory=dict)
    arguments: dict[str, tuple[ArgumentSpan, ...]] = field(default_factory=dict)


@dataclass
class Sentence:
    """A labeled sentence. ``id`` is dense within its corpus; ``source_id``
    preserves the identifier found in the input file."""

    id: int
    text: str
    tokens: list[str]
    frames: list[SlsFrame]
    label: int
    source_id: int


@dataclass
class Corpus:
    sentences: list[Sentence]
    positives: int
    negatives: int

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class Dictionary:
    name: str
    entries: frozenset[str]


@dataclass
class DictionarySet:
    """Named dictionaries, addressable by name."""

    dictionaries: dict[str, Dictionary]

    def __contains__(self, name: str) -> bool:
        return name in self.dictionaries

    def __getitem__(self, name: str) -> Dictionary:
        return self.dictionaries[name]

    def __len__(self) -> int:
        return len(self.dictionaries)

    def get(self, name: str) -> Dictionary | None:
        return self.dictionaries.get(name)

    def names(self) -> list[str]:
        return list(self.dictionaries)


@dataclass
class Violation:
    sentence_id: int | None
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


def corpus_from_sentences(sentences: list[Sentence]) -> Corpus:
    positives = sum(1 for s in sentences if s.label == 1)
    return Corpus(sentences, positives, len(sentences) - positives)


def sentence_violations(sentence: Sentence) -> list[str]:
    """All contract violations for one sentence, empty when clean."""
    problems: list[str] = []
    if sentence.label not in (0, 1):
        problems.append(f"label must be 0 or 1, got {sentence.label!r}")
    if sentence.text and not sentence.tokens:
        problems.append("non-empty text requires a non-empty token list")
    for fi, frame in enumerate(sentence.frames):
        where = f"frame {fi}"
        if not frame.action_lemma:
            problems.append(f"{where}: empty action_lemma")
        elif frame.action_lemma != frame.action_lemma.lower():
            problems.append(f"{where}: action_lemma {frame.action_lemma!r} is not lowercase")
        for name, value in frame.properties.items():
            if name not in PROPERTY_NAMES:
                problems.append(f"{where}: unknown property {name!r}")
            if not isinstance(value, str) or not value:
                problems.append(f"{where}: property {name!r} must have a non-empty string value")
        for role, spans in frame.arguments.items():
            if role not in ARGUMENT_ROLES:
                problems.append(f"{where}: unknown argument role {role!r}")
                continue
            for span in spans:
                if not (0 <= span.token_start < span.token_end <= len(sentence.tokens)):
                    problems.append(
                        f"{where}: {role} span [{span.token_start}, {span.token_end}) "
                        f"out of range for {len(sentence.tokens)} tokens"
                    )
                    continue
                joined = " ".join(sentence.tokens[span.token_start : span.token_end])
                if span.text != joined:
                    problems.append(
                        f"{where}: {role} span text {span.text!r} does not match tokens {joined!r}"
                    )
    return problems


def validate_corpus(corpus: Corpus) -> ValidationReport:
    """Check every per-sentence invariant plus corpus-level consistency.

    The report is empty exactly when the corpus is valid; ``load_corpus``
    rejects anything this function would flag.
    """
    violations: list[Violation] = []
    seen_sources: dict[int, int] = {}
    for sentence in corpus.sentences:
        for message in sentence_violations(sentence):
            violations.append(Violation(sentence.id, message))
        prior = seen_sources.get(sentence.source_id)
        if prior is not None:
            violations.append(
                Violation(sentence.id, f"duplicate source id {sentence.source_id} (also sentence {prior})")
            )
        else:
            seen_sources[sentence.source_id] = sentence.id
    positives = sum(1 for s in corpus.sentences if s.label == 1)
    if corpus.positives != positives or corpus.negatives != len(corpus.sentences) - positives:
        violations.append(
            Violation(None, f"label counts ({corpus.positives}, {corpus.negatives}) do not match sentences")
        )
    return ValidationReport(violations)


def _require(condition: bool, message: str, line: int | None) -> None:
    if not condition:
        raise CorpusError(message, line)


def _span_from_obj(obj, line: int | None) -> ArgumentSpan:
    _require(isinstance(obj, dict), "argument span must be an object", line)
    text = obj.get("text")
    start = obj.get("token_start")
    end = obj.get("token_end")
    _require(isinstance(text, str), "span text must be a string", line)
    _require(
        isinstance(start, int) and not isinstance(start, bool), "span token_start must be an integer", line
    )
    _require(isinstance(end, int) and not isinstance(end, bool), "span token_end must be an integer", line)
    return ArgumentSpan(text, start, end)


def _frame_from_obj(obj, line: int | None) -> SlsFrame:
    _require(isinstance(obj, dict), "frame must be an object", line)
    lemma = obj.get("action_lemma")
    _require(isinstance(lemma, str), "frame action_lemma must be a string", line)
    properties = obj.get("properties", {})
    _require(isinstance(properties, dict), "frame properties must be an object", line)
    for name, value in properties.items():
        _require(isinstance(value, str), f"property {name!r} value must be a string", line)
    arguments_obj = obj.get("arguments", {})
    _require(isinstance(arguments_obj, dict), "frame arguments must be an object", line)
    arguments: dict[str, tuple[ArgumentSpan, ...]] = {}
    for role, spans in arguments_obj.items():
        _require(isinstance(spans, list), f"argument role {role!r} must map to a list of spans", line)
        arguments[role] = tuple(_span_from_obj(span, line) for span in spans)
    return SlsFrame(lemma, dict(properties), arguments)


def sentence_from_obj(obj, dense_id: int, line: int | None = None) -> Sentence:
    """Parse one sentence object, checking types and every invariant."""
    _require(isinstance(obj, dict), "sentence must be a JSON object", line)
    source_id = obj.get("id")
    _require(
        isinstance(source_id, int) and not isinstance(source_id, bool),
        "sentence id must be an integer",
        line,
    )
    text = obj.get("text")
    _require(isinstance(text, str), "sentence text must be a string", line)
    tokens = obj.get("tokens")
    _require(
        isinstance(tokens, list) and all(isinstance(t, str) for t in tokens),
        "sentence tokens must be a list of strings",
        line,
    )
    label = obj.get("label")
    _require(
        isinstance(label, int) and not isinstance(label, bool) and label in (0, 1),
        f"sentence label must be 0 or 1, got {label!r}",
        line,
    )
    frames_obj = obj.get("frames", [])
    _require(isinstance(frames_obj, list), "sentence frames must be a list", line)
    frames = [_frame_from_obj(f, line) for f in frames_obj]
    sentence = Sentence(dense_id, text, list(tokens), frames, label, source_id)
    problems = sentence_violations(sentence)
    _require(not problems, problems[0] if problems else "", line)
    return sentence


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus, renumbering sentences densely in file order.

    Any malformed line raises :class:`CorpusError` carrying the 1-based line
    number. Blank lines are skipped.
    """
    sentences: list[Sentence] = []
    seen_sources: set[int] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON: {exc.msg}", lineno) from exc
            sentence = sentence_from_obj(obj, dense_id=len(sentences), line=lineno)
            _require(
                sentence.source_id not in seen_sources,
                f"duplicate sentence id {sentence.source_id}",
                lineno,
            )
            seen_sources.add(sentence.source_id)
            sentences.append(sentence)
    return corpus_from_sentences(sentences)


def sentence_to_obj(sentence: Sentence) -> dict:
    return {
        "id": sentence.source_id,
        "text": sentence.text,
        "tokens": list(sentence.tokens),
        "label": sentence.label,
        "frames": [
            {
                "action_lemma": frame.action_lemma,
                "properties": dict(frame.properties),
                "arguments": {
                    role: [
                        {"text": s.text, "token_start": s.token_start, "token_end": s.token_end}
                        for s in spans
                    ]
                    for role, spans in frame.arguments.items()
                },
            }
            for frame in sentence.frames
        ],
    }


def corpus_to_jsonl(corpus: Corpus) -> str:
    lines = [json.dumps(sentence_to_obj(s), ensure_ascii=False) for s in corpus.sentences]
    return "\n".join(lines) + ("\n" if lines else "")


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(corpus_to_jsonl(corpus), encoding="utf-8")


def corpus_fingerprint(corpus: Corpus) -> str:
    return fingerprint_obj([sentence_to_obj(s) for s in corpus.sentences])


def _reject_duplicate_keys(pairs):
    seen = set()
    out = {}
    for key, value in pairs:
        if key in seen:
            raise DictionaryError(f"duplicate dictionary name {key!r}")
        seen.add(key)
        out[key] = value
    return out


def load_dictionaries(path: str | Path) -> DictionarySet:
    """Load a dictionary file. Entries are lowercased and deduplicated;
    an empty entry list is an error, an empty file object yields an empty set."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise DictionaryError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise DictionaryError("dictionary file must be a JSON object")
    dictionaries: dict[str, Dictionary] = {}
    for name, entries in obj.items():
        if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
            raise DictionaryError(f"dictionary {name!r} must be a list of strings")
        if not entries:
            raise DictionaryError(f"dictionary {name!r} is empty")
        folded = frozenset(e.lower() for e in entries if e)
        if not folded:
            raise DictionaryError(f"dictionary {name!r} has no usable entries")
        dictionaries[name] = Dictionary(name, folded)
    return DictionarySet(dictionaries)


def dictionaries_to_obj(dictionaries: DictionarySet) -> dict:
    return {name: sorted(d.entries) for name, d in dictionaries.dictionaries.items()}


def save_dictionaries(dictionaries: DictionarySet, path: str | Path) -> None:
    obj = dictionaries_to_obj(dictionaries)
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def dictionaries_fingerprint(dictionaries: DictionarySet) -> str:
    return fingerprint_obj(dictionaries_to_obj(dictionaries))
