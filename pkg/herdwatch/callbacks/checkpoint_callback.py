import os
from typing import Optional

from herdwatch.callbacks.base_callback import BaseCallback
from herdwatch.common.logging_ import Logger
from herdwatch.reid.bank import load_banks, save_banks
from herdwatch.reid.engine import EmbeddingPool


class CheckpointCallback(BaseCallback):
    """
    Write the pool's embedding banks to disk every `save_freq` frames.

    :param logger: the logger
    :param pool: the embedding pool, bound by the harness if not given
    :param save_freq: number of frames between checkpoints
    :param save_path: directory of the checkpoints
    :param name_prefix: checkpoint directory prefix
    """

    def __init__(
        self,
        logger: Logger,
        pool: Optional[EmbeddingPool] = None,
        save_freq: int = 100,
        save_path: str = "checkpoints",
        name_prefix: str = "banks",
    ) -> None:
        super().__init__(logger, pool)
        self.save_freq = save_freq
        self.save_path = save_path
        self.name_prefix = name_prefix

        os.makedirs(save_path, exist_ok=True)

    def load(self, path: str):
        """Load the banks into the pool"""
        self.logger.info(f"Loading embedding banks from {path}")
        try:
            self.pool.banks.update(load_banks(path))
        except FileNotFoundError:
            self.logger.info("Directory not found, assuming no banks were to be loaded")

    def save(self, path: str):
        """Save the banks"""
        self.logger.info(f"Saving embedding banks to {path}")
        save_banks(self.pool.banks, path)

    def _on_step(self) -> bool:
        if self.pool is not None and self.n_calls % self.save_freq == 0:
            path = os.path.join(self.save_path, f"{self.name_prefix}_{self.step}_frames")
            self.save(path)
        return True
