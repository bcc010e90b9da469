from .network import (
    LabelNetwork,
    QNetwork,
    clip_gradients,
    load_checkpoint,
    make_optimizer,
    predict,
    save_checkpoint,
    sgd_step,
    sync_label_network,
)

__all__ = [
    'LabelNetwork',
    'QNetwork',
    'clip_gradients',
    'load_checkpoint',
    'make_optimizer',
    'predict',
    'save_checkpoint',
    'sgd_step',
    'sync_label_network',
]
