"""Byte-level BPE tokenizer for the text encoder.

The vocabulary and merge ranks are data, loaded from the assets directory's
gzip'd merges file (same format as the published CLIP release: a header
line, then one merge per line). The id layout is fixed by contract: 256
byte-level symbols, their word-final variants, 48,894 merge tokens, and two
specials, giving 49,408 ids with start-of-text 49406 and end-of-text 49407.

Text handling mirrors the published tokenizer: lowercase, collapse
whitespace, split into letter runs / single digits / punctuation runs and a
short list of apostrophe contractions, then greedily merge byte pairs by
rank. The splitter is hand-rolled on unicodedata categories instead of a
``\\p{L}``-style regex, with identical alternation semantics.
"""

from __future__ import annotations

import gzip
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..exceptions import AssetError, TokenizationError

CONTEXT_LENGTH = 77
MAX_PROMPT_TOKENS = CONTEXT_LENGTH - 2
EXPECTED_MERGES = 48894
VOCAB_SIZE = 49408
START_OF_TEXT_ID = 49406
END_OF_TEXT_ID = 49407
START_TOKEN = "<|startoftext|>"
END_TOKEN = "<|endoftext|>"
WORD_END = "</w>"

_CONTRACTIONS = ("'s", "'t", "'re", "'ve", "'m", "'ll", "'d")
_INF = float("inf")


@lru_cache(maxsize=1)
def byte_to_unicode() -> dict[int, str]:
    """Reversible byte -> printable-unicode-char map used by the BPE."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, (chr(c) for c in cs)))


@dataclass(frozen=True)
class TokenSequence:
    """A context-length id sequence: start token, prompt ids, end token,
    zero padding."""

    ids: tuple[int, ...]
    pad_count: int

    def __post_init__(self) -> None:
        ids = tuple(int(i) for i in self.ids)
        if len(ids) != CONTEXT_LENGTH:
            raise TokenizationError(
                f"token sequence must have length {CONTEXT_LENGTH}, got {len(ids)}"
            )
        if ids[0] != START_OF_TEXT_ID:
            raise TokenizationError("token sequence must begin with the start id")
        if ids.count(END_OF_TEXT_ID) != 1:
            raise TokenizationError("token sequence must contain exactly one end id")
        end_pos = ids.index(END_OF_TEXT_ID)
        if end_pos == 0:
            raise TokenizationError("end id cannot precede the start id")
        if any(i != 0 for i in ids[end_pos + 1 :]):
            raise TokenizationError("positions after the end id must be zero")
        if any(not 0 <= i < VOCAB_SIZE for i in ids):
            raise TokenizationError("token id out of vocabulary range")
        if self.pad_count != CONTEXT_LENGTH - 1 - end_pos:
            raise TokenizationError("pad_count inconsistent with end id position")
        object.__setattr__(self, "ids", ids)

    def to_array(self) -> np.ndarray:
        """Ids as an int64 row vector, ready to feed a text encoder graph."""
        return np.asarray(self.ids, dtype=np.int64)


def _is_letter(c: str) -> bool:
    return unicodedata.category(c).startswith("L")


def _is_number(c: str) -> bool:
    return unicodedata.category(c).startswith("N")


def split_words(text: str) -> list[str]:
    """Split cleaned text into BPE word units.

    First-match-wins per position: special literals, apostrophe
    contractions, letter runs, single digit-class characters, then runs of
    everything else that is not whitespace.
    """
    words: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        special = next(
            (s for s in (START_TOKEN, END_TOKEN) if text.startswith(s, i)), None
        )
        if special is not None:
            words.append(special)
            i += len(special)
            continue
        if c == "'":
            contraction = next(
                (s for s in _CONTRACTIONS if text.startswith(s, i)), None
            )
            if contraction is not None:
                words.append(contraction)
                i += len(contraction)
                continue
        if _is_letter(c):
            j = i + 1
            while j < n and _is_letter(text[j]):
                j += 1
            words.append(text[i:j])
            i = j
            continue
        if _is_number(c):
            words.append(c)
            i += 1
            continue
        j = i
        while (
            j < n
            and not text[j].isspace()
            and not _is_letter(text[j])
            and not _is_number(text[j])
        ):
            j += 1
        words.append(text[i:j])
        i = j
    return words


def clean_text(text: str) -> str:
    """Collapse whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())


class ClipTokenizer:
    """Tokenizer bound to one merges file."""

    def __init__(self, merges_path):
        merges_path = Path(merges_path)
        try:
            with gzip.open(merges_path, "rt", encoding="utf-8") as fh:
                lines = fh.read().split("\n")
        except (OSError, UnicodeDecodeError) as exc:
            raise AssetError(f"cannot read merges file {merges_path}: {exc}") from exc
        merge_lines = lines[1 : 1 + EXPECTED_MERGES]
        if len(merge_lines) < EXPECTED_MERGES:
            raise AssetError(
                f"merges file {merges_path} has {len(merge_lines)} merges, "
                f"expected at least {EXPECTED_MERGES}"
            )
        merges: list[tuple[str, str]] = []
        for lineno, line in enumerate(merge_lines, start=2):
            parts = line.split()
            if len(parts) != 2:
                raise AssetError(
                    f"merges file {merges_path}:{lineno}: expected two tokens, "
                    f"got {line!r}"
                )
            merges.append((parts[0], parts[1]))

        byte_chars = list(byte_to_unicode().values())
        vocab = byte_chars + [c + WORD_END for c in byte_chars]
        vocab.extend(a + b for a, b in merges)
        vocab.extend([START_TOKEN, END_TOKEN])
        self._encoder: dict[str, int] = {tok: i for i, tok in enumerate(vocab)}
        if len(self._encoder) != VOCAB_SIZE:
            raise AssetError(
                f"merges file {merges_path} yields {len(self._encoder)} distinct "
                f"tokens, expected {VOCAB_SIZE} (duplicate merges?)"
            )
        self._ranks: dict[tuple[str, str], int] = {
            pair: rank for rank, pair in enumerate(merges)
        }
        self._byte_encoder = byte_to_unicode()
        self._cache: dict[str, tuple[str, ...]] = {}

    @property
    def vocab_size(self) -> int:
        return VOCAB_SIZE

    def _bpe(self, token: str) -> tuple[str, ...]:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        if len(token) == 1:
            parts = (token + WORD_END,)
            self._cache[token] = parts
            return parts
        word = list(token[:-1]) + [token[-1] + WORD_END]
        while len(word) > 1:
            ranks = [
                self._ranks.get((word[i], word[i + 1]), _INF)
                for i in range(len(word) - 1)
            ]
            best = min(range(len(ranks)), key=ranks.__getitem__)
            if ranks[best] == _INF:
                break
            pair = (word[best], word[best + 1])
            merged: list[str] = []
            i = 0
            while i < len(word):
                if i + 1 < len(word) and (word[i], word[i + 1]) == pair:
                    merged.append(word[i] + word[i + 1])
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            word = merged
        parts = tuple(word)
        self._cache[token] = parts
        return parts

    def encode_ids(self, text: str) -> list[int]:
        """Raw BPE ids for cleaned, lowercased text (no specials, no pad)."""
        cleaned = clean_text(text)
        if not cleaned:
            raise TokenizationError("text is empty after whitespace trimming")
        ids: list[int] = []
        for word in split_words(cleaned.lower()):
            if word in (START_TOKEN, END_TOKEN):
                ids.append(self._encoder[word])
                continue
            mapped = "".join(self._byte_encoder[b] for b in word.encode("utf-8"))
            ids.extend(self._encoder[part] for part in self._bpe(mapped))
        return ids

    def tokenize(self, text: str) -> TokenSequence:
        """Encode text into a full context-length sequence.

        Raises TokenizationError if the text is empty or needs more than 75
        BPE tokens; over-length text is never silently truncated.
        """
        ids = self.encode_ids(text)
        if len(ids) > MAX_PROMPT_TOKENS:
            raise TokenizationError(
                f"text encodes to {len(ids)} BPE tokens, over the limit of "
                f"{MAX_PROMPT_TOKENS}; refusing to truncate"
            )
        if any(i in (START_OF_TEXT_ID, END_OF_TEXT_ID) for i in ids):
            raise TokenizationError(
                "text contains reserved start/end literals, which cannot appear "
                "inside a token sequence"
            )
        pad = CONTEXT_LENGTH - 2 - len(ids)
        full = (START_OF_TEXT_ID, *ids, END_OF_TEXT_ID, *([0] * pad))
        return TokenSequence(ids=full, pad_count=pad)
