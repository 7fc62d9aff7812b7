"""IndyLSTM sequence-recognition toolkit: python bindings over the C++ core."""

from ._indy import (
    Architecture,
    Dataset,
    Model,
    cer,
    corpus_cer,
    ctc_loss,
    evaluate,
    generate_dataset,
    greedy_decode,
    init_model,
    layer_madds,
    load_dataset,
    madds_per_step,
    model_forward,
    model_param_count,
    param_count,
    pareto_front,
    save_dataset,
    time_inference,
    train,
)

__all__ = [
    "Architecture",
    "Dataset",
    "Model",
    "cer",
    "corpus_cer",
    "ctc_loss",
    "evaluate",
    "generate_dataset",
    "greedy_decode",
    "init_model",
    "layer_madds",
    "load_dataset",
    "madds_per_step",
    "model_forward",
    "model_param_count",
    "param_count",
    "pareto_front",
    "save_dataset",
    "time_inference",
    "train",
]
