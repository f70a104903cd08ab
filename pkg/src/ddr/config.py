"""Run configuration: paper-default settings, YAML documents, overrides.

With no config file at all, the defaults reproduce the stock setup: the
four-type quality set with its standard prompts, weight 2.0 for the
degradation term in the restoration objective, JSON output, no parallelism.
A YAML document can override any of it, including per-type prompt text.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .exceptions import ConfigurationError
from .prompts import (
    BIQA_TYPES,
    RESTORATION_TYPES,
    DegradationType,
    PromptPair,
    default_prompt_pair,
    default_prompt_pairs,
)

ASSETS_ENV_VAR = "DDR_ASSETS_DIR"
OUTPUT_FORMATS = ("json", "csv")

_KNOWN_KEYS = {
    "model_assets_dir",
    "degradation_set",
    "lambda_d",
    "output_format",
    "parallelism",
    "seed",
}


@dataclass(frozen=True)
class Config:
    assets_dir: Path | None = None
    prompt_pairs: tuple[PromptPair, ...] = default_prompt_pairs(BIQA_TYPES)
    lambda_d: float = 2.0
    output_format: str = "json"
    parallelism: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigurationError(
                f"output_format must be one of {OUTPUT_FORMATS}, "
                f"got {self.output_format!r}"
            )
        if not math.isfinite(self.lambda_d) or self.lambda_d < 0:
            raise ConfigurationError(f"lambda_d must be >= 0, got {self.lambda_d}")
        if self.parallelism < 1:
            raise ConfigurationError(
                f"parallelism must be >= 1, got {self.parallelism}"
            )


def _parse_prompt_entries(entries) -> tuple[PromptPair, ...]:
    if not isinstance(entries, list) or not entries:
        raise ConfigurationError("degradation_set must be a non-empty list")
    pairs = []
    for entry in entries:
        if not isinstance(entry, dict) or "type" not in entry:
            raise ConfigurationError(
                f"each degradation_set entry needs a 'type' key, got {entry!r}"
            )
        unknown = set(entry) - {"type", "degraded_prompt", "clean_prompt"}
        if unknown:
            raise ConfigurationError(
                f"unknown degradation_set keys: {sorted(unknown)}"
            )
        degradation = DegradationType.parse(entry["type"])
        stock = default_prompt_pair(degradation)
        pairs.append(
            PromptPair(
                degradation=degradation,
                degraded_prompt=str(entry.get("degraded_prompt", stock.degraded_prompt)),
                clean_prompt=str(entry.get("clean_prompt", stock.clean_prompt)),
            )
        )
    return tuple(pairs)


def load_config(path) -> Config:
    """Parse a YAML config document into a Config."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid YAML in {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must be a mapping")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys in {path}: {sorted(unknown)}")
    kwargs: dict = {}
    if raw.get("model_assets_dir") is not None:
        kwargs["assets_dir"] = Path(str(raw["model_assets_dir"]))
    if raw.get("degradation_set") is not None:
        kwargs["prompt_pairs"] = _parse_prompt_entries(raw["degradation_set"])
    if raw.get("lambda_d") is not None:
        try:
            kwargs["lambda_d"] = float(raw["lambda_d"])
        except (TypeError, ValueError):
            raise ConfigurationError(f"bad lambda_d: {raw['lambda_d']!r}") from None
    if raw.get("output_format") is not None:
        kwargs["output_format"] = str(raw["output_format"])
    if raw.get("parallelism") is not None:
        try:
            kwargs["parallelism"] = int(raw["parallelism"])
        except (TypeError, ValueError):
            raise ConfigurationError(f"bad parallelism: {raw['parallelism']!r}") from None
    if raw.get("seed") is not None:
        try:
            kwargs["seed"] = int(raw["seed"])
        except (TypeError, ValueError):
            raise ConfigurationError(f"bad seed: {raw['seed']!r}") from None
    return Config(**kwargs)


def resolve_config(
    config_path=None,
    set_name: str | None = None,
    assets_dir=None,
    lambda_d: float | None = None,
    output_format: str | None = None,
    parallelism: int | None = None,
    seed: int | None = None,
) -> Config:
    """Merge config file, CLI flags, and environment into one Config.

    Precedence: CLI flag > config file > environment variable > default.
    ``set_name`` picks the degradation types: 'biqa' and 'restoration' use the
    stock prompt pairs; 'custom' requires a degradation_set in the config.
    """
    config = load_config(config_path) if config_path else Config()
    if set_name is not None:
        if set_name == "biqa":
            config = replace(config, prompt_pairs=default_prompt_pairs(BIQA_TYPES))
        elif set_name == "restoration":
            config = replace(
                config, prompt_pairs=default_prompt_pairs(RESTORATION_TYPES)
            )
        elif set_name == "custom":
            if not config_path:
                raise ConfigurationError(
                    "--set custom requires --config with a degradation_set"
                )
        else:
            raise ConfigurationError(
                f"unknown set name {set_name!r} (use biqa, restoration, or custom)"
            )
    if assets_dir is not None:
        config = replace(config, assets_dir=Path(assets_dir))
    elif config.assets_dir is None and os.environ.get(ASSETS_ENV_VAR):
        config = replace(config, assets_dir=Path(os.environ[ASSETS_ENV_VAR]))
    if lambda_d is not None:
        config = replace(config, lambda_d=float(lambda_d))
    if output_format is not None:
        config = replace(config, output_format=output_format)
    if parallelism is not None:
        config = replace(config, parallelism=int(parallelism))
    if seed is not None:
        config = replace(config, seed=int(seed))
    return config
