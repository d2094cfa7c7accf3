"""
Folding P_VO into the value and output weights: Ŵ_V = W_V·P_VO and, per
query head j, Ŵ_O slice j = P_VO(kv(j))ᵀ · W_O slice j.
"""

import numpy as np
import numpy.typing as npt

from swankv.domain.exceptions.numerics import (
    RejectedConfigurationError,
    ShapeMismatchError,
)
from swankv.domain.services.tensor import as_matrix
from swankv.domain.types import F32, Matrix
from swankv.domain.value_objects.projection_set import ProjectionSet


def absorb_value_projection(w_v: npt.ArrayLike, p_vo: npt.ArrayLike) -> Matrix:
    """
    :raises RejectedInputError:
    """
    w = as_matrix(w_v, "W_V")
    p = as_matrix(p_vo, "P_VO")
    if p.shape[0] != p.shape[1] or w.shape[1] != p.shape[0]:
        raise ShapeMismatchError("P_VO", (w.shape[1], w.shape[1]), p.shape)
    return (w @ p).astype(F32)


def absorb_output_projection(
    w_o: npt.ArrayLike,
    projections: ProjectionSet,
    layer: int,
) -> Matrix:
    """
    `w_o` is the full (n_q_heads·d_h) x d output matrix; each d_h-row band
    belongs to one query head and is rotated by the P_VO of its KV group.

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    cfg = projections.config
    w = as_matrix(w_o, "W_O")
    if not 0 <= layer < cfg.num_layers:
        raise RejectedConfigurationError(
            f"No projections for layer {layer} ({cfg.num_layers} calibrated).",
        )
    if w.shape[0] % cfg.d_h:
        raise ShapeMismatchError("W_O", f"(n * {cfg.d_h}, d)", w.shape)
    n_heads = w.shape[0] // cfg.d_h
    if n_heads != cfg.n_q_heads:
        raise RejectedConfigurationError(
            f"W_O holds {n_heads} head slices; projections cover "
            f"{cfg.n_q_heads} query heads.",
        )
    slices = w.reshape(n_heads, cfg.d_h, w.shape[1])
    absorbed = np.empty_like(slices)
    for j in range(n_heads):
        p_vo = projections.vo(layer, cfg.kv_head_of(j))
        absorbed[j] = p_vo.T @ slices[j]
    return absorbed.reshape(w.shape).astype(F32)
