"""Triage pipeline for patient-education videos.

Ingests video metadata, transcripts, OCR text, and annotator labels;
extracts readability and lexicon features; recognizes medical terms with
from-scratch BLSTM and CRF sequence taggers trained on dictionary-
projected BIO labels; and classifies videos on medical-information level,
understandability, and recommendation with logistic regression.

Submodules: ``corpus`` (file loading), ``textfeat`` (text analytics),
``medterm`` (term dictionary and BIO projection), ``seqtag`` (taggers),
``classify`` (feature assembly and classifiers), ``synth`` (synthetic
corpus generator), ``cli`` (pipeline commands).
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
