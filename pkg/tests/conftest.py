"""Shared fixtures: paths to the bundled five-video corpus."""

from pathlib import Path

import pytest

from vidtriage.corpus import load_corpus

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_paths() -> dict:
    return {
        "videos": CORPUS / "videos.jsonl",
        "transcripts": CORPUS / "transcripts.jsonl",
        "ocr": CORPUS / "ocr.jsonl",
        "labels": CORPUS / "labels.jsonl",
    }


@pytest.fixture(scope="session")
def store(corpus_paths):
    return load_corpus(
        corpus_paths["videos"],
        corpus_paths["transcripts"],
        corpus_paths["ocr"],
        corpus_paths["labels"],
    )
