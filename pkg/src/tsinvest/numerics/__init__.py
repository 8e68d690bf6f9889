from .tensor import Tensor, Parameter, concat, stack, no_grad
from .rng import Rng
from .functional import (dense, softmax, batch_norm, layer_norm,
                         multi_head_attention, gru_cell, bidirectional_gru,
                         embedding_lookup, dropout, relu, RunningStats,
                         NEG_INF_LOGIT)
from .gradcheck import grad_check, max_error, ParamReport

__all__ = [
    "Tensor", "Parameter", "concat", "stack", "no_grad", "Rng",
    "dense", "softmax", "batch_norm", "layer_norm", "multi_head_attention",
    "gru_cell", "bidirectional_gru", "embedding_lookup", "dropout", "relu",
    "RunningStats", "NEG_INF_LOGIT", "grad_check", "max_error", "ParamReport",
]
