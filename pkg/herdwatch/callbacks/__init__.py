from herdwatch.callbacks.base_callback import BaseCallback
from herdwatch.callbacks.checkpoint_callback import CheckpointCallback

__all__ = ["BaseCallback", "CheckpointCallback"]
