import json
import logging
from dataclasses import dataclass, field

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 10
    tags: list = field(default_factory=list)


def load_config(path):
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - set(TrainConfig.__dataclass_fields__)
    if unknown:
        log.warning("Ignoring unknown config keys: %s", sorted(unknown))
        for key in unknown:
            raw.pop(key)
    cfg = TrainConfig(**raw)
    log.debug("Loaded config %s", cfg)
    return cfg
