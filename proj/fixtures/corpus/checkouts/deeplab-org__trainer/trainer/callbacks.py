import logging

logger = logging.getLogger(__name__)


class Callback:
    def on_epoch_end(self, epoch, metrics):
        pass


class EarlyStopping(Callback):
    def __init__(self, patience=3, monitor="val_loss"):
        self.patience = patience
        self.monitor = monitor
        self.best = None
        self.waited = 0

    def on_epoch_end(self, epoch, metrics):
        value = metrics.get(self.monitor)
        if value is None:
            logger.warning("Metric %s missing at epoch %d", self.monitor, epoch)
            return False
        if self.best is None or value < self.best:
            self.best = value
            self.waited = 0
        else:
            self.waited += 1
            if self.waited >= self.patience:
                logger.info("Early stopping: %s did not improve for %d epochs", self.monitor, self.patience)
                return True
        return False


class MetricsPrinter(Callback):
    def on_epoch_end(self, epoch, metrics):
        for name, value in sorted(metrics.items()):
            logger.info("epoch=%d %s=%.4f", epoch, name, value)
        return False
