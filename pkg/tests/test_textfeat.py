"""Text analytics: tokenization, syllables, readability, lexicon counts."""

import string

import numpy as np
import pytest

from vidtriage.data_files import data_path
from vidtriage.textfeat import (
    Lexicon,
    UndefinedReadabilityError,
    active_verb_count,
    count_syllables,
    extract_text_features,
    lexicon_count,
    load_lexicon,
    load_stopwords,
    readability,
    tokenize,
)


@pytest.fixture(scope="module")
def lexicons():
    return (
        load_lexicon(data_path("transition_words.txt"), "transition"),
        load_lexicon(data_path("summary_words.txt"), "summary"),
        load_lexicon(data_path("active_verbs.txt"), "verbs"),
    )


# ------------------------------------------------------------- tokenizer


def test_tokenize_fixtures():
    tok = tokenize("The cat sat. It ran!")
    assert list(tok.tokens) == ["the", "cat", "sat", "it", "ran"]
    assert len(tok.sentences) == 2

    empty = tokenize("")
    assert len(empty.tokens) == 0 and len(empty.sentences) == 0

    # Abbreviation guard: "Dr." does not end the sentence.
    assert len(tokenize("Dr. Smith left.").sentences) == 1


def test_tokenize_sentence_ranges_cover_tokens():
    rng = np.random.default_rng(7)
    vocab = ["alpha", "beta", "gamma", "delta", "run", "tests", "Dr."]
    enders = [". ", "! ", "? ", "\n"]
    for _ in range(200):
        parts = []
        for _ in range(int(rng.integers(1, 6))):
            words = [vocab[i] for i in rng.integers(0, len(vocab), size=rng.integers(1, 7))]
            parts.append(" ".join(words) + enders[int(rng.integers(4))])
        tok = tokenize("".join(parts))
        spans = list(tok.sentences)
        covered = [i for a, b in spans for i in range(a, b)]
        assert covered == list(range(len(tok.tokens)))
        for a, b in spans:
            assert a < b
        for tokn in tok.tokens:
            assert " " not in tokn and tokn == tokn.lower()


# ------------------------------------------------------------- syllables


def test_count_syllables_fixtures():
    assert count_syllables("cat") == 1
    assert count_syllables("cancer") == 2
    assert count_syllables("colonoscopy") == 5


def test_count_syllables_positive_and_validates():
    rng = np.random.default_rng(11)
    letters = string.ascii_lowercase
    for _ in range(500):
        n = int(rng.integers(1, 12))
        word = "".join(letters[i] for i in rng.integers(0, 26, size=n))
        assert count_syllables(word) >= 1
    with pytest.raises(ValueError):
        count_syllables("")
    with pytest.raises(ValueError):
        count_syllables("a1b")


# ----------------------------------------------------------- readability


def test_readability_fixtures():
    assert readability("The cat sat on the mat.") == pytest.approx(-1.45, abs=0.01)
    run_on = " ".join(["run"] * 100)
    assert readability(run_on) == pytest.approx(35.21, abs=0.01)
    with pytest.raises(UndefinedReadabilityError):
        readability("")


def test_readability_case_and_whitespace_invariant():
    rng = np.random.default_rng(3)
    base = "Screening finds cancer early. Talk to your doctor today."
    for _ in range(50):
        mangled = []
        for ch in base:
            if ch == " " and rng.random() < 0.4:
                mangled.append("  \t"[: int(rng.integers(1, 4))])
            elif rng.random() < 0.3:
                mangled.append(ch.upper())
            else:
                mangled.append(ch)
        assert readability("".join(mangled)) == pytest.approx(
            readability(base)
        )


# -------------------------------------------------------- lexicon counts


def test_lexicon_count_fixtures():
    lex = Lexicon(name="t",
                  entries=frozenset({"first", "then", "finally",
                                     "in addition"}))
    assert lexicon_count(tokenize("first we then finally"), lex) == 3
    assert lexicon_count(tokenize("in addition we begin"), lex) == 1
    assert lexicon_count(tokenize(""), lex) == 0


def test_lexicon_count_longest_match_non_overlapping():
    lex = Lexicon(name="t", entries=frozenset({"in", "in addition", "addition"}))
    # "in addition" must win over its two single-word members.
    assert lexicon_count(tokenize("in addition"), lex) == 1


def test_lexicon_count_bounded_by_word_count():
    rng = np.random.default_rng(5)
    words = ["first", "then", "we", "begin", "in", "addition", "overall"]
    lex = Lexicon(name="t",
                  entries=frozenset({"first", "then", "in addition",
                                     "overall"}))
    for _ in range(300):
        n = int(rng.integers(0, 15))
        text = " ".join(words[i] for i in rng.integers(0, len(words), size=n))
        tok = tokenize(text)
        assert 0 <= lexicon_count(tok, lex) <= len(tok.tokens)


def test_active_verb_count_fixtures():
    verbs = Lexicon(name="verbs", entries=frozenset({"remove", "explain"}))
    assert active_verb_count(tokenize("the doctor removes polyps"), verbs) == 1
    assert active_verb_count(tokenize("polyps are removed"), verbs) == 0
    assert active_verb_count(tokenize(""), verbs) == 0


def test_active_verb_inflections():
    verbs = Lexicon(name="verbs", entries=frozenset({"explain", "carry", "chew"}))
    assert active_verb_count(tokenize("she explained the test"), verbs) == 1
    assert active_verb_count(tokenize("he carries the chart"), verbs) == 1
    assert active_verb_count(tokenize("explaining helps"), verbs) == 1
    assert active_verb_count(tokenize("chewing was banned"), verbs) == 1


# ---------------------------------------------------------- feature rows


def test_extract_text_features_composition(lexicons):
    transition, summary, verbs = lexicons
    feats = extract_text_features("The cat sat on the mat.",
                                  transition, summary, verbs)
    assert feats.word_count == 6
    assert feats.sentence_count == 1
    assert feats.unique_word_count == 5  # "the" repeats
    assert feats.readability == pytest.approx(-1.45, abs=0.01)
    assert feats.readability_defined

    constructed = extract_text_features(
        "First we rest. Then we sip water. Overall all went well.",
        transition, summary, verbs,
    )
    assert constructed.transition_word_count == 2
    assert constructed.summary_word_count == 1


def test_extract_text_features_empty(lexicons):
    transition, summary, verbs = lexicons
    feats = extract_text_features("", transition, summary, verbs)
    assert feats.word_count == 0
    assert feats.sentence_count == 0
    assert feats.readability == 0.0
    assert not feats.readability_defined


def test_unique_word_count_bounded_random(lexicons):
    transition, summary, verbs = lexicons
    rng = np.random.default_rng(13)
    vocab = ["alpha", "beta", "gamma", "first", "overall", "rest", "the"]
    for _ in range(300):
        n = int(rng.integers(0, 30))
        text = " ".join(vocab[i] for i in rng.integers(0, len(vocab), size=n))
        feats = extract_text_features(text, transition, summary, verbs)
        assert feats.unique_word_count <= feats.word_count
        assert feats.transition_word_count <= feats.word_count
        assert feats.summary_word_count <= feats.word_count
        assert feats.active_verb_count <= feats.word_count


def test_load_lexicon_and_stopwords(tmp_path):
    path = tmp_path / "lex.txt"
    path.write_text("First\n# a comment\nin addition  # trailing\n\nTHEN\n")
    lex = load_lexicon(path, "demo")
    assert lex.entries == frozenset({"first", "in addition", "then"})
    sw = tmp_path / "stop.txt"
    sw.write_text("the\nof\nin addition\n")
    stops = load_stopwords(sw)
    assert stops == frozenset({"the", "of"})
