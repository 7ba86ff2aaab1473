"""Keyword to article-title mapping and dump-title decoding.

Dump titles are the percent-encoded request paths seen by the servers, so
matching is done on the encoded form.  Keywords are normalized the way
MediaWiki builds a page URL: spaces become underscores, the first letter is
uppercased, and the UTF-8 bytes are percent-encoded.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping
from urllib.parse import quote, unquote_to_bytes

from .errors import InvalidKeywordError, KeywordListError

log = logging.getLogger(__name__)

# Characters MediaWiki leaves unescaped in page URLs, on top of the RFC 3986
# unreserved set (letters, digits, "-._~") that quote() always keeps.
TITLE_SAFE_CHARS = ";@$!*(),/~:"


def _upper_first(text: str) -> str:
    head = text[0].upper()
    # 'ß'.upper() == 'SS'; multi-character mappings are left alone.
    if len(head) != 1:
        return text
    return head + text[1:]


def normalize_keyword(raw: str, capitalize_first: bool = True) -> str:
    """Return the encoded dump title for a user keyword.

    >>> normalize_keyword("Anne Hathaway")
    'Anne_Hathaway'
    >>> normalize_keyword("東京")
    '%E6%9D%B1%E4%BA%AC'
    """
    text = raw.strip()
    if not text:
        raise InvalidKeywordError(f"empty keyword: {raw!r}")
    text = text.replace(" ", "_")
    if capitalize_first:
        text = _upper_first(text)
    return quote(text, safe=TITLE_SAFE_CHARS)


def title_is_decodable(encoded: str) -> bool:
    try:
        unquote_to_bytes(encoded).decode("utf-8")
    except UnicodeDecodeError:
        return False
    return True


def decode_title(encoded: str) -> str:
    """Percent-decode a dump title for display.

    Broken escapes such as ``50%_off`` pass through literally.  When the
    decoded bytes are not UTF-8 the encoded form is returned unchanged; use
    :func:`title_is_decodable` to tell the two cases apart.
    """
    try:
        return unquote_to_bytes(encoded).decode("utf-8")
    except UnicodeDecodeError:
        return encoded


def title_to_filename(encoded: str) -> str:
    """File name stem for an encoded title; only ``/`` needs escaping."""
    return encoded.replace("/", "%2F")


def filename_to_title(stem: str) -> str:
    return stem.replace("%2F", "/")


@dataclass(frozen=True)
class Keyword:
    raw: str
    normalized_title: str

    @property
    def display(self) -> str:
        return decode_title(self.normalized_title)


@dataclass(frozen=True)
class KeywordIndex:
    entries: tuple[Keyword, ...]
    lookup: Mapping[str, Keyword]
    # (dropped keyword, keyword that kept the title)
    duplicates: tuple[tuple[Keyword, Keyword], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, title: object) -> bool:
        return title in self.lookup

    @property
    def titles(self) -> frozenset[str]:
        return frozenset(self.lookup)


def build_index(lines: Iterable[str], capitalize_first: bool = True) -> KeywordIndex:
    """Build a keyword index from one-keyword-per-line text.

    Blank lines are skipped.  When two keywords normalize to the same title
    only the first is kept and the collision is recorded in ``duplicates``.
    """
    entries: list[Keyword] = []
    lookup: dict[str, Keyword] = {}
    duplicates = []
    for line in lines:
        raw = line.rstrip("\r\n")
        if not raw.strip():
            continue
        title = normalize_keyword(raw, capitalize_first)
        kw = Keyword(raw.strip(), title)
        if title in lookup:
            log.warning("duplicate keyword %r maps to %s (kept %r)", kw.raw, title, lookup[title].raw)
            duplicates.append((kw, lookup[title]))
            continue
        lookup[title] = kw
        entries.append(kw)
    if not entries:
        raise KeywordListError("keyword list contains no valid keywords")
    return KeywordIndex(tuple(entries), MappingProxyType(lookup), tuple(duplicates))


def load_keywords(path, capitalize_first: bool = True) -> KeywordIndex:
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise KeywordListError(f"cannot read keyword list {path}: {exc}") from exc
    return build_index(text.split("\n"), capitalize_first)
