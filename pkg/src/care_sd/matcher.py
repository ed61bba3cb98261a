"""Word-boundary-aware multi-pattern matcher.

Active lexicon terms are inserted into a character trie, and the trie is
emitted as one nested regular expression so the scan runs inside the C regex
engine: at each text position the engine walks a single trie path, so the
cost does not grow with the number of terms.  Branches at a terminal node are
optional and greedy, which gives leftmost-longest, non-overlapping matches
that satisfy the boundary rule on both sides.

A word character is a letter, a digit, ``-``, ``'`` or ``/``.  A term only
matches where the characters immediately outside it are not word characters.
A space inside a multi-word term matches any run of whitespace.

For ASCII text a cheap prefilter runs first: a term can only match where its
leading word run appears as a whole word run of the text, so a set test on
the text's runs discards most sentences before the regex is tried.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

WORD_CHARS = r"[^\W_]|[-'/]"
LEFT_BOUNDARY = r"(?<![^\W_])(?<![-'/])"
RIGHT_BOUNDARY = r"(?![^\W_]|[-'/])"

_ASCII_WORD = frozenset(b"abcdefghijklmnopqrstuvwxyz0123456789-'/")
# lowercases ASCII letters and blanks every non-word byte
_FOLD = bytes(c | 0x20 if 65 <= c <= 90 else (c if c in _ASCII_WORD else 32) for c in range(256))


@dataclass(frozen=True)
class Match:
    term: str
    start: int
    end: int


def _trie(terms: Iterable[str]) -> dict:
    root: dict = {}
    for term in terms:
        node = root
        for ch in term:
            node = node.setdefault(ch, {})
        node[""] = True
    return root


def _emit(node: dict) -> str:
    branches = []
    for ch in sorted(k for k in node if k):
        piece = r"\s+" if ch == " " else re.escape(ch)
        branches.append(piece + _emit(node[ch]))
    if not branches:
        return ""
    body = branches[0] if len(branches) == 1 else "(?:" + "|".join(branches) + ")"
    if "" in node:
        body = "(?:" + body + ")?"
    return body


def _heads(terms: Iterable[str]) -> frozenset[bytes] | None:
    heads = set()
    for t in terms:
        if not t.isascii():
            return None
        runs = t.encode("ascii").translate(_FOLD).split()
        if not runs or not t.encode("ascii").lower().startswith(runs[0]):
            return None
        heads.add(runs[0])
    return frozenset(heads)


def term_pattern(term: str) -> str:
    """Regex for a single term under the same boundary rule (no trie)."""
    return LEFT_BOUNDARY + r"\s+".join(re.escape(w) for w in term.split(" ")) + RIGHT_BOUNDARY


class CompiledMatcher:
    """Read-only matcher over a fixed term set; safe to share between threads."""

    def __init__(self, terms: Iterable[str]):
        self.terms = tuple(sorted(set(terms)))
        if not self.terms:
            raise ValueError("cannot compile a matcher with no terms")
        self._by_key = {self._key(t): t for t in self.terms}
        self._regex = re.compile(LEFT_BOUNDARY + _emit(_trie(self.terms)) + RIGHT_BOUNDARY, re.IGNORECASE)
        self.search = self._regex.search
        self._heads = _heads(self.terms)

    @staticmethod
    def _key(surface: str) -> str:
        return " ".join(surface.split()).casefold()

    def __len__(self) -> int:
        return len(self.terms)

    def may_match(self, text: str) -> bool:
        """False only when no term can match; True means the regex has to decide."""
        if self._heads is None or not text.isascii():
            return True
        return not self._heads.isdisjoint(text.encode("ascii").translate(_FOLD).split())

    def contains(self, text: str) -> bool:
        return self.may_match(text) and self._regex.search(text) is not None

    def finditer(self, text: str) -> list[Match]:
        if not self.contains(text):
            return []
        return [Match(self._by_key[self._key(m.group())], m.start(), m.end()) for m in self._regex.finditer(text)]

    @property
    def pattern(self) -> str:
        return self._regex.pattern
