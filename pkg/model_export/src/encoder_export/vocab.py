"""Tokenizer merges file handling.

``export`` ships the published byte-pair merges file verbatim when one is
provided. Without it (this tool may run in offline environments) a synthetic
file with the identical structure is generated: one header line, 48,894
merges, yielding 49,408 vocabulary entries with the start/end specials at
49406/49407. The learned head of the synthetic list comes from a tiny
deterministic training pass over embedded English text; the tail is padded
with merges over byte symbols that never occur in ASCII input.
"""

from __future__ import annotations

import gzip
import io
from collections import Counter
from pathlib import Path

from .errors import ExportError

EXPECTED_MERGES = 48894
VOCAB_SIZE = 49408
WORD_END = "</w>"

_CORPUS = """
photos of every quality pass through this tool on the way to a score
a clean sharp photo with real color and natural exposure scores high
a blurry noisy photo with unnatural color and bad exposure scores low
the encoder reads images and prompts and returns compact features
degradation directions come from pairs of degraded and clean prompts
blur noise color exposure and content are the degradation types used
low quality photos react weakly when more degradation is fused in
high quality photos react strongly to any added degradation signal
"""


def _ordered_symbols() -> tuple[list[str], list[str]]:
    """(all byte symbols in id order, symbols unused by ASCII text)."""
    printable = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(0xA1, 0xAC + 1))
        + list(range(0xAE, 0xFF + 1))
    )
    mapping: dict[int, str] = {b: chr(b) for b in printable}
    offset = 0
    extras: list[str] = []
    ordered: list[str] = [mapping[b] for b in printable]
    for b in range(256):
        if b not in mapping:
            ch = chr(256 + offset)
            offset += 1
            ordered.append(ch)
            extras.append(ch)
    return ordered, extras


def _trained_merges() -> list[tuple[str, str]]:
    words = Counter(_CORPUS.split())
    sequences: dict[tuple[str, ...], int] = {}
    for word, count in sorted(words.items()):
        key = tuple(word[:-1]) + (word[-1] + WORD_END,)
        sequences[key] = sequences.get(key, 0) + count
    ordered, _ = _ordered_symbols()
    taken = set(ordered) | {s + WORD_END for s in ordered}
    merges: list[tuple[str, str]] = []
    while True:
        counts: Counter = Counter()
        for symbols, count in sequences.items():
            for pair in zip(symbols, symbols[1:]):
                counts[pair] += count
        viable = [
            (n, pair)
            for pair, n in counts.items()
            if n >= 2 and pair[0] + pair[1] not in taken
        ]
        if not viable:
            return merges
        _, best = min(viable, key=lambda item: (-item[0], item[1]))
        merges.append(best)
        taken.add(best[0] + best[1])
        joined = best[0] + best[1]
        next_sequences: dict[tuple[str, ...], int] = {}
        for symbols, count in sequences.items():
            out: list[str] = []
            i = 0
            while i < len(symbols):
                if (
                    i + 1 < len(symbols)
                    and symbols[i] == best[0]
                    and symbols[i + 1] == best[1]
                ):
                    out.append(joined)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            key = tuple(out)
            next_sequences[key] = next_sequences.get(key, 0) + count
        sequences = next_sequences


def synthesize_merges_text() -> str:
    trained = _trained_merges()
    _, extras = _ordered_symbols()
    fillers: list[tuple[str, str]] = []
    grown: list[str] = []
    need = EXPECTED_MERGES - len(trained)
    for a in extras:
        for c in extras:
            if len(fillers) == need:
                break
            fillers.append((a, c))
            grown.append(a + c)
        if len(fillers) == need:
            break
    for token in grown:
        if len(fillers) == need:
            break
        for c in extras:
            if len(fillers) == need:
                break
            fillers.append((token, c))
    if len(fillers) != need:
        raise ExportError("could not synthesize enough filler merges")
    lines = ["#version: 0.2"]
    lines.extend(f"{a} {b}" for a, b in trained + fillers)
    return "\n".join(lines) + "\n"


def _deterministic_gzip(payload: bytes) -> bytes:
    buf = io.BytesIO()
    with gzip.GzipFile(fileobj=buf, mode="wb", filename="", mtime=0) as gz:
        gz.write(payload)
    return buf.getvalue()


def write_vocab(out_path: Path, published_path=None) -> str:
    """Emit bpe_vocab.txt.gz; returns 'published' or 'synthetic'."""
    out_path = Path(out_path)
    if published_path is not None:
        data = Path(published_path).read_bytes()
        try:
            lines = gzip.decompress(data).decode("utf-8").split("\n")
        except (OSError, gzip.BadGzipFile, UnicodeDecodeError) as exc:
            raise ExportError(f"bad merges file {published_path}: {exc}") from exc
        if len(lines) - 1 < EXPECTED_MERGES:
            raise ExportError(
                f"merges file {published_path} has too few merges "
                f"({len(lines) - 1} < {EXPECTED_MERGES})"
            )
        out_path.write_bytes(data)
        return "published"
    text = synthesize_merges_text()
    out_path.write_bytes(_deterministic_gzip(text.encode("utf-8")))
    return "synthetic"
