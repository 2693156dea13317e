# This file makes the nn directory a Python package
from hydromonitor.nn.checkpoint import Checkpoint, load_checkpoint, read_header, save_checkpoint
from hydromonitor.nn.network import (
    Activation,
    ForwardCache,
    Gradients,
    Layer,
    LayerSpec,
    NetworkParams,
    backward,
    forward,
    init_network,
    mlp,
    polyak,
)
from hydromonitor.nn.optim import AdamState, adam_update
