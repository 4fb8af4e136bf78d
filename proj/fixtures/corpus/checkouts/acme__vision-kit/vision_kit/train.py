import logging
import time

import torch
from torch import nn

logger = logging.getLogger(__name__)


class Trainer:
    """Runs supervised training for an image classifier."""

    def __init__(self, model, optimizer, device="cpu", log_every=50):
        self.model = model.to(device)
        self.optimizer = optimizer
        self.device = device
        self.log_every = log_every
        self.criterion = nn.CrossEntropyLoss()
        logger.info("Trainer ready on %s", device)

    def train_epoch(self, loader, epoch):
        self.model.train()
        total = 0.0
        start = time.time()
        for step, (images, labels) in enumerate(loader):
            images = images.to(self.device)
            labels = labels.to(self.device)
            self.optimizer.zero_grad()
            loss = self.criterion(self.model(images), labels)
            loss.backward()
            self.optimizer.step()
            total += loss.item()
            if step % self.log_every == 0:
                logger.debug(f"epoch {epoch} step {step} loss {loss.item():.4f}")
        elapsed = time.time() - start
        logger.info("Epoch %d finished in %.1fs, mean loss %.4f", epoch, elapsed, total / max(1, len(loader)))
        return total

    def evaluate(self, loader):
        self.model.eval()
        correct = 0
        seen = 0
        with torch.no_grad():
            for images, labels in loader:
                preds = self.model(images.to(self.device)).argmax(dim=1)
                correct += (preds == labels.to(self.device)).sum().item()
                seen += labels.size(0)
        if seen == 0:
            logger.warning("Evaluation loader was empty")
            return 0.0
        accuracy = correct / seen
        logger.info("Validation accuracy: {:.2%}".format(accuracy))
        return accuracy

    def fit(self, train_loader, val_loader, epochs):
        best = 0.0
        for epoch in range(epochs):
            self.train_epoch(train_loader, epoch)
            acc = self.evaluate(val_loader)
            if acc > best:
                best = acc
                logger.info("New best accuracy %.4f at epoch %d", best, epoch)
        return best
