import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent

# corpus paths are relative to the repo root, and some modules load the
# lexicon at import time
os.chdir(ROOT)


@pytest.fixture(autouse=True)
def _run_from_repo_root(monkeypatch):
    monkeypatch.chdir(ROOT)
