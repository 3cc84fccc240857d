from .losses import (
    LOSS_KINDS,
    SampleTensors,
    cl_terms,
    instance_loss,
    loss_cl,
    loss_combined,
    loss_wce,
    temperatures,
    weighted_brier_terms,
)
from .model import (
    GraphTensors,
    ModelConfig,
    SolutionPredictor,
    flatten_params,
    load_flat_params,
    param_count,
    predict_logits,
    predict_prob,
    predict_signed,
    to_tensors,
)
from .optim import AdamState, adamw_step
from .train import (
    LAMBDA_GRID,
    Example,
    TrainConfig,
    TrainResult,
    gradient,
    load_checkpoint,
    make_examples,
    save_checkpoint,
    select_lambda,
    train,
    weighted_brier,
)
