from dataclasses import dataclass, field, fields

import numpy as np
import numpy.typing as npt

from swankv.domain.entities.base import Entity
from swankv.domain.value_objects.model_config.model_config import ModelConfig
from swankv.domain.value_objects.model_id import ModelId
from swankv.domain.value_objects.projection_set import ProjectionSet

Weights = npt.NDArray[np.float32]


@dataclass(frozen=True, slots=True, kw_only=True, eq=False)
class LayerWeights:
    """
    Per-layer parameters of a pre-norm block. Attention weights are kept
    per head so every head is computed with the same kernel shape:

    - w_q: (n_q_heads, d, d_h)
    - w_k, w_v: (n_kv_heads, d, d_h)
    - w_o: (n_q_heads, d_h, d)
    - w_v_hat, w_o_hat: absorbed counterparts, present once projections
      are attached
    """

    ln1_gain: Weights
    ln1_bias: Weights
    w_q: Weights
    w_k: Weights
    w_v: Weights
    w_o: Weights
    ln2_gain: Weights
    ln2_bias: Weights
    w_1: Weights
    b_1: Weights
    w_2: Weights
    b_2: Weights
    w_v_hat: Weights | None = None
    w_o_hat: Weights | None = None

    def named(self) -> dict[str, Weights]:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if getattr(self, f.name) is not None
        }


@dataclass(eq=False, kw_only=True)
class ToyModel(Entity[ModelId]):
    """
    Seeded decoder-only transformer over a byte vocabulary. Identity is
    (config, seed); attaching a `ProjectionSet` adds absorbed value/output
    weights and enables the SWAN decode path.
    """

    embedding: Weights
    layers: tuple[LayerWeights, ...]
    ln_f_gain: Weights
    ln_f_bias: Weights
    unembedding: Weights
    projections: ProjectionSet | None = field(default=None)

    @property
    def config(self) -> ModelConfig:
        return self.id_.config

    @property
    def seed(self) -> int:
        return self.id_.seed

    @property
    def is_absorbed(self) -> bool:
        return self.projections is not None

    def tensors(self) -> dict[str, Weights]:
        """Flat name -> array view used by the weight file."""
        named = {
            "embedding": self.embedding,
            "ln_f_gain": self.ln_f_gain,
            "ln_f_bias": self.ln_f_bias,
            "unembedding": self.unembedding,
        }
        for i, layer in enumerate(self.layers):
            named.update({f"layers.{i}.{k}": v for k, v in layer.named().items()})
        return named
