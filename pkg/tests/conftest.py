import sys
from pathlib import Path

import pytest

from skelmad.terms import parse

DATA = Path(__file__).resolve().parent.parent / "src" / "skelmad" / "data"

# the recursive tree helpers need headroom on long environments
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@pytest.fixture
def family3_text():
    return (DATA / "family_3.lambda").read_text()


@pytest.fixture
def family3(family3_text):
    return parse(family3_text)
