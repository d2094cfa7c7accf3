from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from swankv.domain.exceptions.numerics import RejectedInputError
from swankv.domain.types import F32
from swankv.domain.value_objects.base import ValueObject
from swankv.domain.value_objects.model_config.model_config import ModelConfig


@dataclass(frozen=True, repr=False, eq=False, kw_only=True)
class CalibrationBatch(ValueObject):
    """
    Activations captured in one forward pass over the calibration stream.

    - q: (layers, n_q_heads, n, d_h), after RoPE
    - k: (layers, n_kv_heads, n, d_h), after RoPE
    - v: (layers, n_kv_heads, n, d_h)
    - w_o: (layers, n_q_heads, d_h, d), per-head slices of the output weights

    raises RejectedInputError
    """

    config: ModelConfig
    q: npt.NDArray[np.float32]
    k: npt.NDArray[np.float32]
    v: npt.NDArray[np.float32]
    w_o: npt.NDArray[np.float32]

    def __post_init__(self) -> None:
        """
        :raises RejectedInputError:
        """
        super().__post_init__()

        cfg = self.config
        n = np.shape(self.q)[2] if np.ndim(self.q) == 4 else -1
        expected = {
            "q": (cfg.num_layers, cfg.n_q_heads, n, cfg.d_h),
            "k": (cfg.num_layers, cfg.n_kv_heads, n, cfg.d_h),
            "v": (cfg.num_layers, cfg.n_kv_heads, n, cfg.d_h),
            "w_o": (cfg.num_layers, cfg.n_q_heads, cfg.d_h, cfg.d),
        }
        if n < 1:
            raise RejectedInputError("Calibration batch needs at least one token.")
        for name, shape in expected.items():
            arr = np.asarray(getattr(self, name), dtype=F32)
            if arr.shape != shape:
                raise RejectedInputError(
                    f"Calibration {name} must have shape {shape}, got {arr.shape}.",
                )
            self._freeze(name, arr.copy())

    @property
    def token_count(self) -> int:
        return int(self.q.shape[2])
