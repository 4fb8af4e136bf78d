"""Vision kit package."""
from .train import Trainer

__all__ = ["Trainer"]
__version__ = "0.4.1"
