"""Deterministic text analytics used as classifier features.

Everything here is a pure function of its inputs: tokenization, sentence
splitting, a syllable heuristic, Flesch-Kincaid grade level, and counters
over small phrase lexicons. No model downloads, no randomness.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


class UndefinedReadabilityError(ValueError):
    """Raised when a grade level is requested for text with no words or sentences."""


_WORD_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")
_VOWEL_RUN_RE = re.compile(r"[aeiouy]+")

# Titles and shorthand whose trailing period does not end a sentence.
_ABBREVIATIONS = frozenset({
    "dr", "mr", "mrs", "ms", "prof", "rev", "fr", "sr", "jr", "st",
    "vs", "etc", "fig", "al", "inc", "ltd", "dept", "est", "approx",
    "e.g", "i.e",
})

_BE_FORMS = frozenset({"am", "is", "are", "was", "were", "be", "been", "being"})


@dataclass(frozen=True)
class TokenizedText:
    """Lowercased word tokens plus sentence spans as token-index ranges.

    Sentence ranges are disjoint, ordered, and jointly cover every token.
    """

    tokens: tuple[str, ...]
    sentences: tuple[tuple[int, int], ...]
    source_len: int

    @property
    def word_count(self) -> int:
        return len(self.tokens)

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    def sentence_tokens(self) -> list[list[str]]:
        return [list(self.tokens[a:b]) for a, b in self.sentences]


@dataclass(frozen=True)
class TextFeatures:
    word_count: int
    unique_word_count: int
    sentence_count: int
    transition_word_count: int
    summary_word_count: int
    active_verb_count: int
    readability: float
    readability_defined: bool = True


@dataclass(frozen=True)
class Lexicon:
    """Named set of lowercase single- or multi-word phrases."""

    name: str
    entries: frozenset[str]

    def __post_init__(self):
        for phrase in self.entries:
            if phrase != phrase.strip() or phrase != phrase.lower():
                raise ValueError(f"lexicon {self.name!r}: bad entry {phrase!r}")

    @property
    def max_phrase_len(self) -> int:
        return max((len(p.split()) for p in self.entries), default=0)


def load_lexicon(path, name: Optional[str] = None) -> Lexicon:
    """Load a lexicon file: one phrase per line, '#' starts a comment."""
    path = Path(path)
    entries = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        phrase = line.split("#", 1)[0].strip().lower()
        if phrase:
            entries.add(" ".join(phrase.split()))
    return Lexicon(name=name or path.stem, entries=frozenset(entries))


def _is_sentence_break(text: str, i: int) -> bool:
    """Decide whether the terminator at position i ends a sentence."""
    ch = text[i]
    if ch == "\n":
        return True
    # Require whitespace or end-of-text after the terminator run.
    j = i
    while j + 1 < len(text) and text[j + 1] in ".!?":
        j += 1
    if j + 1 < len(text) and not text[j + 1].isspace():
        return False
    if ch in "!?":
        return True
    # Period: guard abbreviations and single-letter initials.
    k = i - 1
    word_chars = []
    while k >= 0 and (text[k].isalnum() or text[k] in ".'"):
        word_chars.append(text[k])
        k -= 1
    word = "".join(reversed(word_chars)).lower().rstrip(".")
    if not word:
        return True
    if word in _ABBREVIATIONS or (len(word) == 1 and word.isalpha()):
        return False
    return True


def tokenize(text: str) -> TokenizedText:
    """Split text into lowercase word tokens grouped into sentences.

    Sentence boundaries sit at '.', '!', '?' followed by whitespace or
    end-of-text (with an abbreviation guard) and at newlines. Chunks that
    contain no word tokens are dropped.
    """
    chunks: list[str] = []
    start = 0
    for i, ch in enumerate(text):
        if ch in ".!?\n" and _is_sentence_break(text, i):
            chunks.append(text[start:i + 1])
            start = i + 1
    chunks.append(text[start:])

    tokens: list[str] = []
    sentences: list[tuple[int, int]] = []
    for chunk in chunks:
        words = _WORD_RE.findall(chunk.lower())
        if not words:
            continue
        sentences.append((len(tokens), len(tokens) + len(words)))
        tokens.extend(words)
    return TokenizedText(tokens=tuple(tokens), sentences=tuple(sentences),
                         source_len=len(text))


def count_syllables(word: str) -> int:
    """Heuristic syllable count: vowel runs with a silent-e adjustment, min 1."""
    if not word or not word.isalpha():
        raise ValueError(f"count_syllables expects an alphabetic word, got {word!r}")
    w = word.lower()
    runs = len(_VOWEL_RUN_RE.findall(w))
    if runs > 1 and w.endswith("e") and not w.endswith("le"):
        runs -= 1
    return max(runs, 1)


def _token_syllables(token: str) -> int:
    letters = "".join(c for c in token if c.isalpha())
    if not letters:
        return 1
    return count_syllables(letters)


def readability(text: str) -> float:
    """Flesch-Kincaid grade level of the text.

    grade = 0.39 * words/sentences + 11.8 * syllables/words - 15.59.
    Unpunctuated transcripts form one long sentence and thus score very
    high grades; trivial text can score below zero. Both are expected.
    """
    tok = tokenize(text)
    return readability_from_tokens(tok)


def readability_from_tokens(tok: TokenizedText) -> float:
    if tok.word_count == 0 or tok.sentence_count == 0:
        raise UndefinedReadabilityError("readability needs at least one word and sentence")
    syllables = sum(_token_syllables(t) for t in tok.tokens)
    return (0.39 * tok.word_count / tok.sentence_count
            + 11.8 * syllables / tok.word_count
            - 15.59)


def lexicon_count(tok: TokenizedText, lex: Lexicon) -> int:
    """Count lexicon phrase occurrences: longest match first, non-overlapping."""
    n = len(tok.tokens)
    max_len = lex.max_phrase_len
    if max_len == 0:
        return 0
    count = 0
    i = 0
    while i < n:
        matched = False
        for width in range(min(max_len, n - i), 0, -1):
            if " ".join(tok.tokens[i:i + width]) in lex.entries:
                count += 1
                i += width
                matched = True
                break
        if not matched:
            i += 1
    return count


def _verb_base_candidates(word: str) -> list[str]:
    """Strip common inflections so 'removes', 'removed', 'removing' hit 'remove'."""
    cands = [word]
    if word.endswith("ies") and len(word) > 4:
        cands.append(word[:-3] + "y")
    if word.endswith("es") and len(word) > 3:
        cands.append(word[:-2])
    if word.endswith("s") and len(word) > 3:
        cands.append(word[:-1])
    if word.endswith("ied") and len(word) > 4:
        cands.append(word[:-3] + "y")
    if word.endswith("ed") and len(word) > 3:
        cands.append(word[:-2])
        cands.append(word[:-1])
    if word.endswith("ing") and len(word) > 4:
        base = word[:-3]
        cands.append(base)
        cands.append(base + "e")
        if len(base) >= 3 and base[-1] == base[-2]:
            cands.append(base[:-1])
    return cands


def active_verb_count(tok: TokenizedText, verb_lex: Lexicon) -> int:
    """Count verb-lexicon tokens not immediately preceded by a be-form.

    A passive construction like "polyps are removed" puts a be-form right
    before the verb, so skipping those approximates active voice without a
    part-of-speech tagger.
    """
    count = 0
    for i, token in enumerate(tok.tokens):
        if i > 0 and tok.tokens[i - 1] in _BE_FORMS:
            continue
        if any(c in verb_lex.entries for c in _verb_base_candidates(token)):
            count += 1
    return count


def extract_text_features(
    text: str,
    transition_lex: Lexicon,
    summary_lex: Lexicon,
    verb_lex: Lexicon,
) -> TextFeatures:
    """Compute the full per-text feature block.

    Empty or speechless inputs produce all-zero counts and a readability of
    0.0 flagged undefined, so a silent video flows through the pipeline
    instead of aborting it.
    """
    tok = tokenize(text)
    if tok.word_count == 0:
        return TextFeatures(0, 0, 0, 0, 0, 0, 0.0, readability_defined=False)
    try:
        grade = readability_from_tokens(tok)
        defined = True
    except UndefinedReadabilityError:
        grade = 0.0
        defined = False
    return TextFeatures(
        word_count=tok.word_count,
        unique_word_count=len(set(tok.tokens)),
        sentence_count=tok.sentence_count,
        transition_word_count=lexicon_count(tok, transition_lex),
        summary_word_count=lexicon_count(tok, summary_lex),
        active_verb_count=active_verb_count(tok, verb_lex),
        readability=grade,
        readability_defined=defined,
    )


def load_stopwords(path) -> frozenset[str]:
    """Stopword files share the lexicon format; only single words are kept."""
    lex = load_lexicon(path, name="stopwords")
    return frozenset(w for w in lex.entries if " " not in w)
