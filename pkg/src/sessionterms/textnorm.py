"""Text normalization: HTML stripping, tokenization, stopwords, stemming.

The pipeline is tokenize -> stopword filter -> stem, producing a TermBag
(term frequency counts). All downstream analysis operates on TermBags.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources

from . import porter

_TOKEN_RE = re.compile(r"[0-9a-zÀ-￿]+", re.UNICODE)
_NUMERIC_RE = re.compile(r"^[0-9]+$")
_ASCII_WORD_RE = re.compile(r"^[a-z]+$")

_SCRIPT_STYLE_RE = re.compile(
    r"<(script|style)\b[^>]*>.*?</\1\s*>", re.IGNORECASE | re.DOTALL
)
_TAG_RE = re.compile(r"<[^>]*>")
_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)

_NAMED_ENTITIES = {
    "amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'", "nbsp": " ",
}
_ENTITY_RE = re.compile(r"&(#x?[0-9a-fA-F]+|[a-zA-Z]+);")


class TermBag:
    """Multiset of terms with strictly positive counts."""

    __slots__ = ("counts",)

    def __init__(self, counts=None):
        self.counts = {}
        if counts:
            for term, count in counts.items():
                if count > 0:
                    self.counts[term] = int(count)

    @classmethod
    def from_tokens(cls, tokens):
        bag = cls()
        bag.counts = dict(Counter(tokens))
        return bag

    @property
    def terms(self):
        """Set view of the bag."""
        return set(self.counts)

    @property
    def length(self):
        """Total token count."""
        return sum(self.counts.values())

    def add(self, other: "TermBag"):
        """Count-summed union with another bag."""
        merged = dict(self.counts)
        for term, count in other.counts.items():
            merged[term] = merged.get(term, 0) + count
        return TermBag(merged)

    def __contains__(self, term):
        return term in self.counts

    def __len__(self):
        return len(self.counts)

    def __eq__(self, other):
        return isinstance(other, TermBag) and self.counts == other.counts

    def __hash__(self):
        return hash(frozenset(self.counts.items()))

    def __repr__(self):
        return f"TermBag({self.counts!r})"


def default_stoplist():
    """Bundled English stopword list."""
    text = resources.files("sessionterms.data").joinpath("stopwords.txt").read_text()
    return parse_stoplist(text)


def parse_stoplist(text):
    """Parse a stoplist: one word per line, '#' comments allowed."""
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return words


def load_stoplist(path):
    with open(path, encoding="utf-8") as f:
        return parse_stoplist(f.read())


@dataclass(frozen=True)
class NormalizationConfig:
    stoplist: frozenset = None
    stemming_enabled: bool = True
    keep_numeric_tokens: bool = True

    def __post_init__(self):
        stoplist = self.stoplist
        if stoplist is None:
            stoplist = default_stoplist()
        object.__setattr__(self, "stoplist", frozenset(stoplist))


def _decode_entity(match):
    ref = match.group(1)
    if ref.startswith("#"):
        try:
            code = int(ref[2:], 16) if ref[1] in "xX" else int(ref[1:])
            return chr(code)
        except (ValueError, OverflowError):
            return match.group(0)
    return _NAMED_ENTITIES.get(ref.lower(), match.group(0))


def strip_html(html: str) -> str:
    """Extract visible text from HTML, best effort.

    Script/style contents are dropped, tags become single spaces, the
    common named entities and numeric character references are decoded.
    """
    text = _COMMENT_RE.sub(" ", html)
    text = _SCRIPT_STYLE_RE.sub(" ", text)
    text = _TAG_RE.sub(" ", text)
    text = _ENTITY_RE.sub(_decode_entity, text)
    return " ".join(text.split())


def tokenize(text: str, keep_numeric_tokens: bool = True):
    """Lowercase tokens split on any non-alphanumeric character."""
    tokens = _TOKEN_RE.findall(text.lower())
    if not keep_numeric_tokens:
        tokens = [t for t in tokens if not _NUMERIC_RE.match(t)]
    return tokens


def stem(token: str) -> str:
    """Porter-stem an ASCII token; non-ASCII tokens pass through."""
    if _ASCII_WORD_RE.match(token):
        return porter.stem(token)
    return token


def normalize(text: str, config: NormalizationConfig) -> TermBag:
    """Full pipeline: tokenize, remove stopwords, stem, count."""
    tokens = tokenize(text, config.keep_numeric_tokens)
    tokens = [t for t in tokens if t not in config.stoplist]
    if config.stemming_enabled:
        tokens = [stem(t) for t in tokens]
    return TermBag.from_tokens(tokens)
