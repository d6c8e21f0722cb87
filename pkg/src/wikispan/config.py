"""Typed run configuration (YAML) and the provenance manifest.

An empty config file yields the documented defaults: subword length
bounds 30/158, similarity threshold 0.75, alignment threshold 0.4 and
common-word fraction 0.1.  Unknown keys are rejected with the offending
key named.  The manifest records content hashes, record counts and the
config snapshot for every stage run.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import yaml

from .annotate import DATASET_VERSION
from .errors import ConfigError, DataError
from .filtering import FilterConfig
from .pairing import MODES
from .spanpred.config import EncoderConfig, TrainConfig

MANIFEST_VERSION = 1


@dataclass
class PairingConfig:
    mode: str = "cross_lingual"
    max_pairs_per_entity: int | None = None
    english_as_target: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(
                f"pairing.mode must be one of {', '.join(MODES)}; got {self.mode!r}")
        if self.max_pairs_per_entity is not None and self.max_pairs_per_entity <= 0:
            raise ConfigError("pairing.max_pairs_per_entity must be positive")


@dataclass
class AnnotateConfig:
    common_fraction: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 <= self.common_fraction <= 1.0):
            raise ConfigError(
                f"annotate.common_fraction must be in [0, 1]; got {self.common_fraction}")


@dataclass
class AlignRunConfig:
    threshold: float = 0.4
    min_score: float = 0.0
    strategy: str = "best-span-uniform"

    def __post_init__(self) -> None:
        if not (0.0 <= self.threshold <= 1.0):
            raise ConfigError("align.threshold must be in [0, 1]")
        if self.min_score < 0:
            raise ConfigError("align.min_score must be >= 0")


@dataclass
class ModelConfig:
    """Encoder shape without the data-derived character vocabulary."""

    embed_dim: int = 64
    num_blocks: int = 2
    num_heads: int = 2
    hidden_dim: int = 128
    max_len: int = 256

    def __post_init__(self) -> None:
        for name in ("embed_dim", "num_blocks", "num_heads", "hidden_dim", "max_len"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"model.{name} must be positive")
        if self.embed_dim % self.num_heads:
            raise ConfigError("model.embed_dim must be divisible by model.num_heads")

    def to_encoder_config(self, vocab: list[str], seed: int) -> EncoderConfig:
        return EncoderConfig(vocab=vocab, embed_dim=self.embed_dim,
                             num_blocks=self.num_blocks, num_heads=self.num_heads,
                             hidden_dim=self.hidden_dim, max_len=self.max_len,
                             seed=seed)


@dataclass
class PathsConfig:
    """Input and artifact locations; stage flags override these."""

    workdir: str | None = None
    raw_docs: str | None = None
    title_map: str | None = None
    paragraphs: str | None = None
    index: str | None = None
    pairs: str | None = None
    filtered_pairs: str | None = None
    examples: str | None = None
    dataset: str | None = None
    checkpoint: str | None = None
    loss_curve: str | None = None
    alignments: str | None = None
    report: str | None = None
    sentences: str | None = None
    gold: str | None = None
    subword_counts: str | None = None
    paragraph_embeddings: str | None = None
    token_embeddings: str | None = None
    pos_tags: str | None = None
    manifest: str | None = None


@dataclass
class RunConfig:
    version: str = DATASET_VERSION
    seed: int = 0
    pairing: PairingConfig = field(default_factory=PairingConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    annotate: AnnotateConfig = field(default_factory=AnnotateConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    align: AlignRunConfig = field(default_factory=AlignRunConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)

    def __post_init__(self) -> None:
        if self.version != DATASET_VERSION:
            raise ConfigError(
                f"config version {self.version!r} does not match this build's "
                f"format version {DATASET_VERSION!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {
    "pairing": PairingConfig,
    "filter": FilterConfig,
    "annotate": AnnotateConfig,
    "model": ModelConfig,
    "train": TrainConfig,
    "align": AlignRunConfig,
    "paths": PathsConfig,
}


def _build_section(cls, data, section: str, overrides: dict | None = None):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config section {section!r} must be a mapping")
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key {section}.{unknown[0]}")
    merged = {**data, **(overrides or {})}
    return cls(**merged)


def config_from_dict(doc: dict | None) -> RunConfig:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    allowed = {"version", "seed"} | set(_SECTIONS)
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]}")
    version = doc.get("version", DATASET_VERSION)
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer; got {seed!r}")
    sections = {}
    for name, cls in _SECTIONS.items():
        overrides = None
        if name == "train" and "seed" not in (doc.get(name) or {}):
            # The training stage inherits the global seed unless pinned.
            overrides = {"seed": seed}
        sections[name] = _build_section(cls, doc.get(name), name, overrides)
    return RunConfig(version=version, seed=seed, **sections)


def load_config(path: str | None) -> RunConfig:
    """Load and validate a YAML run config; None yields pure defaults."""
    if path is None:
        return config_from_dict({})
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as err:
            raise ConfigError(f"{path}: invalid YAML: {err}") from err
    return config_from_dict(doc)


def sha256_file(path: str) -> str:
    if not os.path.exists(path):
        raise DataError(f"cannot hash missing file: {path}")
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class ManifestEntry:
    stage: str
    inputs: dict
    outputs: dict
    counts: dict
    config: dict
    wall_time_s: float
    status: str = "ok"
    error: str | None = None


def make_entry(stage: str, input_paths: list[str], output_paths: list[str],
               counts: dict, config: RunConfig, wall_time_s: float,
               status: str = "ok", error: str | None = None) -> ManifestEntry:
    return ManifestEntry(
        stage=stage,
        inputs={p: sha256_file(p) for p in sorted(input_paths)},
        outputs={p: sha256_file(p) for p in sorted(output_paths)},
        counts=dict(counts),
        config=config.to_dict(),
        wall_time_s=wall_time_s,
        status=status,
        error=error,
    )


def append_manifest(path: str, entry: ManifestEntry) -> None:
    """Append one stage entry; the file is rewritten atomically."""
    doc = {"version": MANIFEST_VERSION, "entries": []}
    if os.path.exists(path):
        doc = read_manifest(path)
    doc["entries"].append(dataclasses.asdict(entry))
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_manifest(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise DataError(f"{path}: invalid manifest JSON: {err}") from err
    if doc.get("version") != MANIFEST_VERSION:
        raise DataError(f"{path}: unsupported manifest version {doc.get('version')!r}")
    return doc
