"""Text preprocessing for the evaluation metrics."""

import re
from functools import lru_cache
from importlib import resources

_SPLIT = re.compile(r"[^0-9a-z]+")

STOPWORDS_RESOURCE = "stopwords_english.txt"


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """The versioned 179-word English stopword list shipped with the package."""
    resource = resources.files("threatrag").joinpath("data", STOPWORDS_RESOURCE)
    text = resource.read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def preprocess(text: str, stopword_list=None) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop stopwords; digits stay."""
    stopwords = default_stopwords() if stopword_list is None else stopword_list
    tokens = _SPLIT.split(text.lower())
    return [t for t in tokens if t and t not in stopwords]


def tokenize(text: str) -> list[str]:
    """Stopword-free variant used for token-level matching."""
    return preprocess(text, stopword_list=frozenset())
