import logging
import os
import shutil

import torch

_logger = logging.getLogger(__name__)


def save_checkpoint(state, directory, is_best=False, filename="checkpoint.pt"):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, filename)
    torch.save(state, path)
    _logger.info("Saved checkpoint to %s", path)
    if is_best:
        shutil.copyfile(path, os.path.join(directory, "best.pt"))
        _logger.info("Copied best checkpoint")


def load_checkpoint(path, model, optimizer=None):
    if not os.path.exists(path):
        _logger.error(f"Checkpoint {path} not found")
        return 0
    state = torch.load(path, map_location="cpu")
    model.load_state_dict(state["model"])
    if optimizer is not None and "optimizer" in state:
        optimizer.load_state_dict(state["optimizer"])
    else:
        _logger.warn("Optimizer state not restored")
    epoch = state.get("epoch", 0)
    _logger.info("Resuming from epoch %d", epoch)
    return epoch
