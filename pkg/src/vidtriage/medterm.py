"""Medical term dictionary: cleaning, loading, and projection onto sentences.

The dictionary maps cleaned terms to coarse semantic-type categories and
replaces a full concept-mapping service: projecting its entries onto
tokenized sentences yields BIO-labeled training data for the taggers and
per-video unique-term counts for the classifiers.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

B_MED = "B-MED"
I_MED = "I-MED"
O = "O"
LABELS = (B_MED, I_MED, O)

MIN_WORD_LEN = 4  # cleaning keeps words of length strictly greater than 3


class DictionaryFormatError(ValueError):
    """Malformed dictionary row; message carries the line number."""


class DictionaryWarning(UserWarning):
    """Recoverable dictionary problem, e.g. an unknown semantic-type code."""


class SemanticType(Enum):
    """Closed set of semantic-type categories admitted into the dictionary."""

    TOPP = ("topp", "Therapeutic or Preventive Procedure")
    DSYN = ("dsyn", "Disease or Syndrome")
    PSHU = ("pshu", "Pharmacologic Substance")
    BPOC = ("bpoc", "Body Part, Organ, or Organ Component")
    NEOP = ("neop", "Neoplastic Process")
    ORCH = ("orch", "Organic Chemical")
    DIAP = ("diap", "Diagnostic Procedure")
    HLCA = ("hlca", "Health Care Activity")
    CHVF = ("chvf", "Chemical Viewed Functionally")
    PROG = ("prog", "Professional or Occupational Group")
    CHVS = ("chvs", "Chemical Viewed Structurally")
    LBPR = ("lbpr", "Laboratory Procedure")
    BLOR = ("blor", "Body Location or Region")
    INPO = ("inpo", "Injury or Poisoning")
    MOBD = ("mobd", "Mental or Behavioral Dysfunction")
    AAPP = ("aapp", "Amino Acid, Peptide, or Protein")
    HCRO = ("hcro", "Health Care Related Organization")
    BODM = ("bodm", "Biomedical or Dental Material")
    ELII = ("elii", "Element, Ion, or Isotope")
    NNON = ("nnon", "Nucleic Acid, Nucleoside, or Nucleotide")
    HOPS = ("hops", "Hazardous or Poisonous Substance")
    CGAB = ("cgab", "Congenital Abnormality")
    LBTR = ("lbtr", "Laboratory or Test Result")
    BACS = ("bacs", "Biologically Active Substance")
    DRDD = ("drdd", "Drug Delivery Device")
    ACAB = ("acab", "Acquired Abnormality")
    ENZY = ("enzy", "Enzyme")
    BDSY = ("bdsy", "Body System")
    ANTB = ("antb", "Antibiotic")
    HORM = ("horm", "Hormone")
    VITA = ("vita", "Vitamin")
    CLND = ("clnd", "Clinical Drug")
    CHEM = ("chem", "Chemical")
    MEDD = ("medd", "Medical Device")
    RESA = ("resa", "Research Activity")
    SOSY = ("sosy", "Sign or Symptom")
    INCH = ("inch", "Inorganic Chemical")
    PATF = ("patf", "Pathologic Function")

    @property
    def code(self) -> str:
        return self.value[0]

    @property
    def label(self) -> str:
        return self.value[1]

    @classmethod
    def from_code(cls, code: str) -> "SemanticType":
        try:
            return _CODE_TO_TYPE[code]
        except KeyError:
            raise KeyError(f"unknown semantic-type code {code!r}") from None


_CODE_TO_TYPE = {st.code: st for st in SemanticType}

ALL_SEMANTIC_TYPES = frozenset(SemanticType)

_NON_ALNUM_RE = re.compile(r"[^a-z0-9 ]+")


def _normalize_words(raw: str) -> list[str]:
    """Lowercase, replace punctuation and symbols with spaces, split."""
    return _NON_ALNUM_RE.sub(" ", raw.lower()).split()


def clean_terms(raw_terms: Iterable[str], stopwords: frozenset[str] | set[str]) -> set[str]:
    """Reduce raw terms to a set of cleaned single words.

    Punctuation and symbols are stripped, terms are split into words and
    lowercased, stopwords are dropped, and only words longer than three
    characters survive.
    """
    out: set[str] = set()
    for raw in raw_terms:
        for word in _normalize_words(raw):
            if len(word) >= MIN_WORD_LEN and word not in stopwords:
                out.add(word)
    return out


@dataclass(frozen=True)
class TermDictionary:
    """Cleaned terms mapped to their semantic types.

    Keys are either single cleaned words or whole multi-word phrases
    (space-joined, lowercase). Phrases are kept intact for projection even
    though cleaning splits terms into words: real entities are often
    multi-word and unique-term counting works on complete mentions.
    """

    entries: dict[str, frozenset[SemanticType]] = field(default_factory=dict)

    @property
    def word_keys(self) -> set[str]:
        return {k for k in self.entries if " " not in k}

    @property
    def phrase_keys(self) -> set[str]:
        return {k for k in self.entries if " " in k}

    @property
    def max_phrase_len(self) -> int:
        return max((len(k.split()) for k in self.entries), default=0)

    def match_keys(self, mode: str = "phrase") -> set[str]:
        """Keys eligible for projection: 'phrase' uses all, 'word' only words."""
        if mode == "word":
            return self.word_keys
        if mode == "phrase":
            return set(self.entries)
        raise ValueError(f"unknown projection mode {mode!r}")


@dataclass(frozen=True)
class TaggedSentence:
    """Token sequence with aligned BIO labels over the single class MED."""

    tokens: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.labels):
            raise ValueError(
                f"{len(self.tokens)} tokens but {len(self.labels)} labels"
            )
        prev = O
        for lab in self.labels:
            if lab not in LABELS:
                raise ValueError(f"unknown label {lab!r}")
            if lab == I_MED and prev == O:
                raise ValueError("I-MED may not follow O or start a sentence")
            prev = lab

    def spans(self) -> list[str]:
        """Surface forms of complete B/I spans, lowercased."""
        out = []
        current: list[str] = []
        for tok, lab in zip(self.tokens, self.labels):
            if lab == B_MED:
                if current:
                    out.append(" ".join(current))
                current = [tok.lower()]
            elif lab == I_MED:
                current.append(tok.lower())
            else:
                if current:
                    out.append(" ".join(current))
                current = []
        if current:
            out.append(" ".join(current))
        return out


def load_dictionary(
    path,
    allowed_types: Optional[Iterable[SemanticType]] = None,
    stopwords: Optional[frozenset[str]] = None,
) -> TermDictionary:
    """Load a term dictionary from a TSV of ``term<TAB>semantic-type code``.

    Rows with codes outside the closed set are skipped with a warning; rows
    whose code is valid but not in ``allowed_types`` are silently filtered.
    Each surviving term contributes its cleaned words, and multi-word terms
    additionally contribute the whole phrase.
    """
    if stopwords is None:
        from .data_files import data_path
        from .textfeat import load_stopwords
        stopwords = load_stopwords(data_path("stopwords.txt"))
    allowed = frozenset(allowed_types) if allowed_types is not None else ALL_SEMANTIC_TYPES

    path = Path(path)
    entries: dict[str, set[SemanticType]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DictionaryFormatError(
                f"{path}:{lineno}: expected 'term<TAB>code', got {line!r}"
            )
        term, code = parts[0].strip(), parts[1].strip()
        try:
            st = SemanticType.from_code(code)
        except KeyError:
            warnings.warn(
                f"{path}:{lineno}: unknown semantic-type code {code!r}, row skipped",
                DictionaryWarning,
                stacklevel=2,
            )
            continue
        if st not in allowed:
            continue
        for word in clean_terms([term], stopwords):
            entries.setdefault(word, set()).add(st)
        phrase_words = _normalize_words(term)
        if len(phrase_words) >= 2:
            entries.setdefault(" ".join(phrase_words), set()).add(st)
    return TermDictionary(entries={k: frozenset(v) for k, v in entries.items()})


def project_labels(
    dictionary: TermDictionary,
    sentences: Sequence[Sequence[str]],
    mode: str = "phrase",
) -> list[TaggedSentence]:
    """Mark dictionary mentions in tokenized sentences with BIO labels.

    Matching is longest-first, left-to-right, and non-overlapping, so the
    candidate "colon cancer" beats the shorter "colon" at the same position.
    """
    keys = dictionary.match_keys(mode)
    max_len = max((len(k.split()) for k in keys), default=0)
    tagged = []
    for sent in sentences:
        tokens = [t.lower() for t in sent]
        labels = [O] * len(tokens)
        i = 0
        while i < len(tokens):
            matched = 0
            for width in range(min(max_len, len(tokens) - i), 0, -1):
                if " ".join(tokens[i:i + width]) in keys:
                    matched = width
                    break
            if matched:
                labels[i] = B_MED
                for j in range(i + 1, i + matched):
                    labels[j] = I_MED
                i += matched
            else:
                i += 1
        tagged.append(TaggedSentence(tokens=tuple(tokens), labels=tuple(labels)))
    return tagged


def unique_medical_terms(tagged: Iterable[TaggedSentence]) -> int:
    """Number of distinct span surface forms across all sentences of a video."""
    forms: set[str] = set()
    for sent in tagged:
        forms.update(sent.spans())
    return len(forms)


def write_conll(tagged: Iterable[TaggedSentence], path, video_ids: Optional[Sequence[str]] = None) -> None:
    """Write sentences as token<TAB>tag lines with blank lines between them.

    When ``video_ids`` is given (one per sentence), a ``# video_id = ...``
    comment precedes each sentence so training can split at video level.
    """
    tagged = list(tagged)
    if video_ids is not None and len(video_ids) != len(tagged):
        raise ValueError("video_ids must align with sentences")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for i, sent in enumerate(tagged):
            if video_ids is not None:
                fh.write(f"# video_id = {video_ids[i]}\n")
            for tok, lab in zip(sent.tokens, sent.labels):
                fh.write(f"{tok}\t{lab}\n")
            fh.write("\n")


def read_conll(path) -> tuple[list[TaggedSentence], list[Optional[str]]]:
    """Read a CoNLL-style file back into sentences plus per-sentence video ids.

    Sentences written without video comments come back with ``None`` ids.
    """
    sentences: list[TaggedSentence] = []
    video_ids: list[Optional[str]] = []
    tokens: list[str] = []
    labels: list[str] = []
    current_vid: Optional[str] = None

    def flush():
        nonlocal tokens, labels
        if tokens:
            sentences.append(TaggedSentence(tokens=tuple(tokens), labels=tuple(labels)))
            video_ids.append(current_vid)
            tokens, labels = [], []

    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*video_id\s*=\s*(\S+)", line)
            if m:
                current_vid = m.group(1)
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DictionaryFormatError(
                f"{path}:{lineno}: expected 'token<TAB>tag', got {line!r}"
            )
        tokens.append(parts[0])
        labels.append(parts[1])
    flush()
    return sentences, video_ids
