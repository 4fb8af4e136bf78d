import logging
import math

LOGGER = logging.getLogger("trainer")


def run(model, batches, optimizer, max_steps=None, clip=None):
    step = 0
    while True:
        try:
            batch = next(batches)
        except StopIteration:
            LOGGER.info("Data exhausted after %d steps", step)
            break
        loss = model.loss(batch)
        if math.isnan(loss):
            LOGGER.error("NaN loss at step %d", step)
            raise FloatingPointError("nan loss")
        loss.backward()
        if clip:
            norm = model.clip_grad(clip)
            LOGGER.debug("grad norm %.3f", norm)
        optimizer.step()
        step += 1
        if max_steps is not None and step >= max_steps:
            LOGGER.info("Reached max_steps=%d", max_steps)
            break
    return step


def schedule(step, warmup, base_lr):
    if step < warmup:
        return base_lr * (step + 1) / warmup
    return base_lr * 0.5 * (1 + math.cos(math.pi * step / (10 * warmup)))
