from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt

from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.types import F32, Matrix
from swankv.domain.value_objects.base import ValueObject
from swankv.domain.value_objects.model_config.model_config import ModelConfig

ORTHOGONALITY_TOLERANCE: Final[float] = 1e-5


@dataclass(frozen=True, repr=False)
class CalibrationMetadata(ValueObject):
    seed: int
    token_count: int
    corpus_id: str

    def __post_init__(self) -> None:
        super().__post_init__()

        if not 0 <= self.seed < 2**64:
            raise DomainFieldError(f"Seed must fit in u64, got {self.seed}.")
        if self.token_count < 0:
            raise DomainFieldError("Token count must be >= 0.")


@dataclass(frozen=True, repr=False, eq=False, kw_only=True)
class ProjectionSet(ValueObject):
    """
    Orthogonal bases per (layer, KV-head): `p_qk` and `p_vo` are stacked
    into arrays of shape (num_layers, n_kv_heads, d_h, d_h).

    raises DomainFieldError
    """

    config: ModelConfig
    p_qk: npt.NDArray[np.float32]
    p_vo: npt.NDArray[np.float32]
    variant: ProjectionVariant
    metadata: CalibrationMetadata

    def __post_init__(self) -> None:
        """
        :raises DomainFieldError:
        """
        super().__post_init__()

        cfg = self.config
        shape = (cfg.num_layers, cfg.n_kv_heads, cfg.d_h, cfg.d_h)
        p_qk = np.asarray(self.p_qk, dtype=F32)
        p_vo = np.asarray(self.p_vo, dtype=F32)
        for name, stack in (("P_QK", p_qk), ("P_VO", p_vo)):
            if stack.shape != shape:
                raise DomainFieldError(
                    f"{name} stack must have shape {shape}, got {stack.shape}.",
                )
            if not np.isfinite(stack).all():
                raise DomainFieldError(f"{name} stack contains non-finite entries.")
            residual = stacked_orthogonality_residual(stack)
            if residual >= ORTHOGONALITY_TOLERANCE:
                raise DomainFieldError(
                    f"{name} stack is not orthogonal (residual {residual:.3e}).",
                )
        self._freeze("p_qk", p_qk.copy())
        self._freeze("p_vo", p_vo.copy())

    def qk(self, layer: int, kv_head: int) -> Matrix:
        return self.p_qk[layer, kv_head]

    def vo(self, layer: int, kv_head: int) -> Matrix:
        return self.p_vo[layer, kv_head]

    def matches(self, config: ModelConfig) -> bool:
        return self.config == config


def stacked_orthogonality_residual(stack: npt.ArrayLike) -> float:
    """max-abs(P·Pᵀ − I) over a stack of square matrices, in f64."""
    p = np.asarray(stack, dtype=np.float64)
    if p.size == 0:
        return 0.0
    eye = np.eye(p.shape[-1])
    return float(np.abs(p @ np.swapaxes(p, -1, -2) - eye).max())
