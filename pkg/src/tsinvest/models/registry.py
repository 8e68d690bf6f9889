"""Model factory keyed by the CLI model tags."""

from __future__ import annotations

from ..errors import ConfigurationError
from .baselines import MGru, TransformerEncoderBaseline, UGru
from .config import GruConfig, TransformerConfig
from .tmtsc import TMTSC

MODEL_NAMES = ("tmtsc", "ugru", "mgru", "te")

_CLASSES = {"tmtsc": TMTSC, "ugru": UGru, "mgru": MGru,
            "te": TransformerEncoderBaseline}


def default_config(name: str):
    if name in ("tmtsc", "te"):
        return TransformerConfig()
    if name in ("ugru", "mgru"):
        return GruConfig()
    raise ConfigurationError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")


def build_model(name: str, config, vocab_size: int, seed: int):
    if name not in _CLASSES:
        raise ConfigurationError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
    return _CLASSES[name](config, vocab_size, seed)
