"""
Text statistics and lexicon features
====================================

Tokenization, syllable counting, Flesch-Kincaid grade level, and the
lexicon-based counters (transition words, summary words, active verbs)
using the word lists shipped with the package.
"""

from vidtriage.data_files import data_path
from vidtriage.textfeat import (
    active_verb_count,
    count_syllables,
    extract_text_features,
    lexicon_count,
    load_lexicon,
    readability,
    tokenize,
)

# Tokenization keeps words only and tracks sentence boundaries;
# abbreviations like "Dr." do not end a sentence.
text = "Dr. Smith explains the procedure. First we prepare, then we rest."
tokens = tokenize(text)
print("words:", tokens.word_count, "sentences:", tokens.sentence_count)
print("tokens:", list(tokens.tokens))

# Syllables drive the readability formula.
for word in ("cat", "cancer", "colonoscopy"):
    print(f"syllables({word!r}) = {count_syllables(word)}")

# Flesch-Kincaid grade level: low for short sentences of short words,
# huge for a single run-on sentence.
print("grade level:", round(readability("The cat sat on the mat."), 2))
print("run-on grade:", round(readability(" ".join(["run"] * 100) + "."), 2))

# The shipped lexicons are plain text files, one entry per line.
transition = load_lexicon(data_path("transition_words.txt"), "transition")
summary = load_lexicon(data_path("summary_words.txt"), "summary")
verbs = load_lexicon(data_path("active_verbs.txt"), "verbs")
print("lexicon sizes:", len(transition.entries), len(summary.entries),
      len(verbs.entries))

sample = "First we rest. Then we sip water. Overall all went well."
print("transition words:", lexicon_count(tokenize(sample), transition))
print("summary words:", lexicon_count(tokenize(sample), summary))

# Active verbs count only when a known verb stem acts, not in passive
# constructions.
print("active:", active_verb_count(tokenize("the doctor removes polyps"),
                                   verbs))
print("passive:", active_verb_count(tokenize("polyps are removed"), verbs))

# extract_text_features bundles all of the above for one document.
features = extract_text_features(sample, transition, summary, verbs)
print("bundle:", features)
