"""Model configurations. Defaults are pinned here and overridable from
config files; the classifiers share the panel geometry T=24, K=16, C=2."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..data.schema import FEATURE_NAMES, PANEL_LENGTH
from ..errors import ConfigurationError

N_FEATURES = len(FEATURE_NAMES)
N_NUMERIC = N_FEATURES - 1
N_CLASSES = 2


@dataclass
class TransformerConfig:
    """Shared by the main transformer classifier and the TE baseline."""
    d_model: int = 64
    n_heads: int = 4
    n_blocks: int = 4
    ff_dim: int = 128
    dropout_rate: float = 0.1
    embed_dim: int = 8
    t_len: int = PANEL_LENGTH
    n_features: int = N_FEATURES
    n_classes: int = N_CLASSES

    def validate(self) -> None:
        if self.d_model % self.n_heads != 0:
            raise ConfigurationError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if self.n_features != N_FEATURES or self.t_len != PANEL_LENGTH:
            raise ConfigurationError("panel geometry is fixed at 24 x 16")

    @property
    def k_prime(self) -> int:
        return N_NUMERIC + self.embed_dim

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class GruConfig:
    """U-GRU / M-GRU baselines."""
    hidden: int = 64
    dropout_rate: float = 0.1
    embed_dim: int = 8
    t_len: int = PANEL_LENGTH
    n_features: int = N_FEATURES
    n_classes: int = N_CLASSES

    def validate(self) -> None:
        if self.hidden < 1:
            raise ConfigurationError("hidden size must be >= 1")

    @property
    def k_prime(self) -> int:
        return N_NUMERIC + self.embed_dim

    def to_json(self) -> dict:
        return asdict(self)


def config_from_json(model: str, obj: dict):
    cls = TransformerConfig if model in ("tmtsc", "te") else GruConfig
    cfg = cls(**obj)
    cfg.validate()
    return cfg
