"""Model asset directory loading and verification.

An assets directory holds two serialized encoder graphs, the tokenizer
merges file, and a manifest recording identity, dimensions, and a sha256
per file. Loading verifies presence and hashes up front so failures surface
as one AssetError with full diagnostics instead of a crash mid-run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..exceptions import AssetError

IMAGE_GRAPH_FILE = "image_encoder.onnx"
TEXT_GRAPH_FILE = "text_encoder.onnx"
VOCAB_FILE = "bpe_vocab.txt.gz"
MANIFEST_FILE = "manifest.json"
REQUIRED_FILES = (IMAGE_GRAPH_FILE, TEXT_GRAPH_FILE, VOCAB_FILE)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class AssetManifest:
    """Contents of manifest.json plus the directory it came from."""

    root: Path
    model_id: str
    embedding_dim: int
    context_length: int
    file_hashes: dict[str, str]

    def path(self, filename: str) -> Path:
        return self.root / filename


def load_asset_manifest(assets_dir, verify_hashes: bool = True) -> AssetManifest:
    """Read and verify an assets directory; raises AssetError with a full
    list of problems if anything is missing or corrupt."""
    root = Path(assets_dir)
    problems: list[str] = []
    if not root.is_dir():
        raise AssetError(f"assets directory {root} does not exist")

    manifest_path = root / MANIFEST_FILE
    if not manifest_path.is_file():
        raise AssetError(f"assets directory {root} is missing {MANIFEST_FILE}")
    try:
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise AssetError(f"cannot parse {manifest_path}: {exc}") from exc

    for key in ("model_id", "embedding_dim", "context_length", "files"):
        if key not in raw:
            problems.append(f"manifest missing key {key!r}")
    if problems:
        raise AssetError(f"invalid manifest {manifest_path}: " + "; ".join(problems))

    file_hashes = {
        name: entry.get("sha256", "") for name, entry in raw["files"].items()
    }
    for name in REQUIRED_FILES:
        target = root / name
        if not target.is_file():
            problems.append(f"missing file {name}")
            continue
        if name not in file_hashes:
            problems.append(f"manifest lists no hash for {name}")
            continue
        if verify_hashes:
            actual = sha256_file(target)
            if actual != file_hashes[name]:
                problems.append(
                    f"hash mismatch for {name}: manifest {file_hashes[name][:12]}..., "
                    f"file {actual[:12]}..."
                )
    if problems:
        raise AssetError(
            f"asset verification failed for {root}: " + "; ".join(problems)
        )

    return AssetManifest(
        root=root,
        model_id=str(raw["model_id"]),
        embedding_dim=int(raw["embedding_dim"]),
        context_length=int(raw["context_length"]),
        file_hashes=file_hashes,
    )
