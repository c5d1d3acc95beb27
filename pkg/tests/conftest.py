from __future__ import annotations

from pathlib import Path

import pytest

from aeff.measures import clear_measure_caches

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


def corpus_files(*prefixes: str) -> list[Path]:
    files = sorted(CORPUS.glob("*.aeff"))
    if prefixes:
        files = [f for f in files if f.name.startswith(prefixes)]
    return files


@pytest.fixture(autouse=True, scope="module")
def _fresh_caches():
    clear_measure_caches()
    yield
