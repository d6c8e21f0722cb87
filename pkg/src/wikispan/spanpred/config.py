"""Model and training configuration for the span predictor."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

from ..errors import ConfigError

PAD_ID = 0
UNK_ID = 1
SEP_ID = 2
NUM_SPECIALS = 3


@dataclass
class EncoderConfig:
    """Shape of the character-level encoder.

    ``vocab`` is the character inventory; ids 0..2 are reserved for the
    padding, unknown and separator symbols, characters follow in the given
    order.
    """

    vocab: list[str]
    embed_dim: int = 64
    num_blocks: int = 2
    num_heads: int = 2
    hidden_dim: int = 128
    max_len: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.vocab:
            raise ConfigError("vocab must be non-empty")
        if len(set(self.vocab)) != len(self.vocab):
            raise ConfigError("vocab contains duplicate symbols")
        for name in ("embed_dim", "num_blocks", "num_heads", "hidden_dim", "max_len"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.embed_dim % self.num_heads:
            raise ConfigError(
                f"embed_dim {self.embed_dim} not divisible by num_heads {self.num_heads}")

    @property
    def vocab_size(self) -> int:
        return len(self.vocab) + NUM_SPECIALS

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.num_heads

    def char_ids(self) -> dict[str, int]:
        return {ch: i + NUM_SPECIALS for i, ch in enumerate(self.vocab)}

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "EncoderConfig":
        return cls(**obj)

    @classmethod
    def from_texts(cls, texts, **kwargs) -> "EncoderConfig":
        chars = sorted({ch for text in texts for ch in text})
        return cls(vocab=chars, **kwargs)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    warmup_steps: int = 100
    total_steps: int = 1000
    batch_size: int = 16
    seed: int = 0
    optimizer: str = "adam"        # "adam" | "sgd"
    clamp_log_prob: bool = False   # clamp gold probability at 1e-12 instead of erroring
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.warmup_steps > self.total_steps:
            raise ConfigError(
                f"warmup_steps {self.warmup_steps} exceeds total_steps {self.total_steps}")
        if self.batch_size <= 0 or self.total_steps <= 0:
            raise ConfigError("batch_size and total_steps must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")

    def to_dict(self) -> dict:
        return asdict(self)
