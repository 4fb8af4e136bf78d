import logging
import os

logger = logging.getLogger(__name__)


def setup(backend="nccl"):
    rank = int(os.environ.get("RANK", 0))
    world = int(os.environ.get("WORLD_SIZE", 1))
    if world == 1:
        logger.info("Single-process run")
        return rank, world
    import torch.distributed as dist

    try:
        dist.init_process_group(backend=backend, rank=rank, world_size=world)
    except RuntimeError as err:
        logger.critical("Process group init failed on rank %d: %s", rank, err)
        raise
    finally:
        logger.debug("Distributed setup attempted with backend %s", backend)
    logger.log(logging.INFO, "Rank %d of %d initialised", rank, world)
    return rank, world


def is_main(rank):
    return rank == 0
