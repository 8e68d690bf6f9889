from .config import TransformerConfig, GruConfig, config_from_json, N_CLASSES
from .base import count_params, embed_inputs, split_inputs, sinusoidal_encoding
from .tmtsc import TMTSC, ForwardTrace
from .baselines import UGru, MGru, TransformerEncoderBaseline
from .registry import MODEL_NAMES, build_model, default_config
from .checkpoint import save_checkpoint, load_checkpoint
