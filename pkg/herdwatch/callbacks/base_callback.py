from abc import ABC, abstractmethod
from typing import Optional

from herdwatch.common.logging_ import Logger
from herdwatch.reid.engine import EmbeddingPool


class BaseCallback(ABC):
    """
    Base class for per-frame callbacks of the re-identification harness.

    :param logger: the logger
    :param pool: the embedding pool being driven, the harness binds it when the run starts
    """

    def __init__(self, logger: Logger, pool: Optional[EmbeddingPool] = None) -> None:
        self.n_calls = 0
        self.step = 0
        self.logger = logger
        self.pool = pool

    @abstractmethod
    def _on_step(self) -> bool:
        """
        :return: If the callback returns False, identity correction stops early.
        """

    def on_step(self, step: int) -> bool:
        """
        This method will be called by the harness after each processed frame.

        :param step: the frame index
        :return: If the callback returns False, identity correction stops early.
        """
        self.n_calls += 1
        self.step = step

        return self._on_step()
