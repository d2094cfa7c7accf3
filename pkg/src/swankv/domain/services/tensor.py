"""
Dense f32 kernels: matmul, one-sided Jacobi SVD, RoPE, softmax and seeded
random orthogonal draws.

All functions are pure: they never mutate their inputs and return fresh
arrays. Inputs are normalized with `as_matrix` / `as_vector`, which also
reject non-finite entries.
"""

import logging
from collections.abc import Iterator
from typing import Final

import numpy as np
import numpy.typing as npt

from swankv.domain.exceptions.numerics import (
    NonFiniteInputError,
    RejectedConfigurationError,
    RejectedInputError,
    ShapeMismatchError,
)
from swankv.domain.types import F32, Matrix, Vector
from swankv.domain.value_objects.model_config.constants import THETA_BASE_DEFAULT
from swankv.domain.value_objects.svd_result import SvdResult

log = logging.getLogger(__name__)

SVD_TOLERANCE: Final[float] = 1e-10
SVD_MAX_SWEEPS: Final[int] = 100
POLISH_STEPS: Final[int] = 2


def as_matrix(x: npt.ArrayLike, what: str = "matrix") -> Matrix:
    """
    :raises RejectedInputError:
    """
    arr = np.asarray(x, dtype=F32)
    if arr.ndim != 2:
        raise ShapeMismatchError(what, "(rows, cols)", arr.shape)
    if not np.isfinite(arr).all():
        raise NonFiniteInputError(what)
    return arr


def as_vector(x: npt.ArrayLike, what: str = "vector") -> Vector:
    """
    :raises RejectedInputError:
    """
    arr = np.asarray(x, dtype=F32)
    if arr.ndim != 1:
        raise ShapeMismatchError(what, "(n,)", arr.shape)
    if not np.isfinite(arr).all():
        raise NonFiniteInputError(what)
    return arr


def matmul(a: npt.ArrayLike, b: npt.ArrayLike) -> Matrix:
    """
    Row-major product with a fixed accumulation order: every output element
    is summed sequentially over the shared dimension, starting from zero.

    :raises RejectedInputError:
    """
    a_ = as_matrix(a, "left operand")
    b_ = as_matrix(b, "right operand")
    if a_.shape[1] != b_.shape[0]:
        raise ShapeMismatchError("matmul right operand", (a_.shape[1], "n"), b_.shape)
    out = np.zeros((a_.shape[0], b_.shape[1]), dtype=F32)
    for k in range(a_.shape[1]):
        out += a_[:, k : k + 1] * b_[k : k + 1, :]
    return out


def sequential_dot(a: npt.ArrayLike, b: npt.ArrayLike) -> np.float32:
    """
    Dot product accumulated strictly left to right in f32.

    :raises RejectedInputError:
    """
    a_ = as_vector(a, "left operand")
    b_ = as_vector(b, "right operand")
    if a_.shape != b_.shape:
        raise ShapeMismatchError("dot", a_.shape, b_.shape)
    if a_.size == 0:
        return F32(0.0)
    return F32(np.cumsum(a_ * b_, dtype=F32)[-1])


def row_dots(rows: Matrix, q: Vector) -> Vector:
    """
    `sequential_dot(rows[i], q)` for every row, vectorized.
    Inputs are trusted (kernel-internal).
    """
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=F32)
    return np.cumsum(rows * q[None, :], axis=1, dtype=F32)[:, -1]


def orthogonality_residual(p: npt.ArrayLike) -> float:
    """max-abs(P·Pᵀ − I), measured in double precision."""
    p64 = np.asarray(p, dtype=np.float64)
    if p64.ndim != 2 or p64.shape[0] != p64.shape[1]:
        raise ShapeMismatchError("orthogonal matrix", "(n, n)", p64.shape)
    return float(np.abs(p64 @ p64.T - np.eye(p64.shape[0])).max())


def polish_orthogonal(v: Matrix, steps: int = POLISH_STEPS) -> Matrix:
    """Newton-Schulz refinement V <- V(1.5I - 0.5VᵀV)."""
    eye = np.eye(v.shape[1], dtype=F32)
    for _ in range(steps):
        v = v @ (F32(1.5) * eye - F32(0.5) * (v.T @ v))
    return v.astype(F32, copy=False)


def _round_robin(
    n: int,
) -> Iterator[tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]]]:
    """
    Circle-method tournament over an even number of columns: n - 1 rounds,
    each made of n / 2 disjoint pairs, every pair visited once per sweep.
    """
    players = list(range(n))
    half = n // 2
    for _ in range(n - 1):
        p = np.array([min(players[i], players[n - 1 - i]) for i in range(half)])
        q = np.array([max(players[i], players[n - 1 - i]) for i in range(half)])
        yield p, q
        players = [players[0], players[-1], *players[1:-1]]


def _jacobi_sweeps(a: Matrix) -> tuple[Matrix, Matrix, int]:
    """
    One-sided (Hestenes) Jacobi: rotates column pairs of `a` until they are
    mutually orthogonal. Returns the rotated columns, the accumulated rotation
    and the number of sweeps run.
    """
    n = a.shape[1]
    v = np.eye(n, dtype=F32)
    norm_sq = float(np.sum(a.astype(np.float64) ** 2))
    if n < 2 or norm_sq == 0.0:
        return a, v, 0
    schedule = list(_round_robin(n))

    sweeps = 0
    for sweeps in range(1, SVD_MAX_SWEEPS + 1):
        off = 0.0
        for p, q in schedule:
            ap, aq = a[:, p], a[:, q]
            alpha = np.sum(ap * ap, axis=0, dtype=F32)
            beta = np.sum(aq * aq, axis=0, dtype=F32)
            gamma = np.sum(ap * aq, axis=0, dtype=F32)
            off += float(np.sum(gamma.astype(np.float64) ** 2))

            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                zeta = (beta - alpha) / (F32(2.0) * gamma)
                sign = np.where(zeta >= 0, F32(1.0), F32(-1.0))
                t = sign / (np.abs(zeta) + np.hypot(F32(1.0), zeta))
            t = np.where(gamma == 0, F32(0.0), t).astype(F32)
            c = (F32(1.0) / np.sqrt(F32(1.0) + t * t)).astype(F32)
            s = (c * t).astype(F32)

            a[:, p], a[:, q] = c * ap - s * aq, s * ap + c * aq
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq

        if off / (norm_sq * norm_sq) < SVD_TOLERANCE:
            break
    else:
        log.warning("svd: no convergence after %d sweeps.", SVD_MAX_SWEEPS)
    return a, v, sweeps


def svd(s: npt.ArrayLike) -> SvdResult:
    """
    Thin SVD via one-sided Jacobi. Singular values come out sorted
    descending; the first nonzero entry of every right singular vector is
    positive.

    :raises RejectedInputError:
    """
    s_ = as_matrix(s, "svd input")
    rows, cols = s_.shape
    if rows < 1 or cols < 1:
        raise RejectedInputError(f"svd input must be non-empty, got {s_.shape}.")

    width = cols + cols % 2
    work = np.zeros((rows, width), dtype=F32)
    work[:, :cols] = s_
    _, v, sweeps = _jacobi_sweeps(work)
    v = polish_orthogonal(v[:cols, :cols]) if cols > 1 else v[:cols, :cols]
    log.debug("svd: %dx%d converged in %d sweeps.", rows, cols, sweeps)

    w = s_ @ v
    sigma = np.sqrt(np.sum(w.astype(np.float64) ** 2, axis=0)).astype(F32)
    order = np.argsort(-sigma, kind="stable")
    sigma, v, w = sigma[order], v[:, order], w[:, order]

    first_nonzero = np.argmax(v != 0, axis=0)
    flip = np.where(v[first_nonzero, np.arange(cols)] < 0, F32(-1.0), F32(1.0))
    v = v * flip[None, :]
    w = w * flip[None, :]

    safe = np.where(sigma > 0, sigma, F32(1.0))
    u = np.where(sigma[None, :] > 0, w / safe[None, :], F32(0.0)).astype(F32)
    return SvdResult(u=u, singular_values=sigma, v=v.astype(F32))


def _inverse_frequencies(d_h: int, theta_base: float) -> npt.NDArray[np.float64]:
    if d_h % 2:
        raise RejectedConfigurationError(
            f"RoPE needs an even head dimension, got {d_h}.",
        )
    return np.asarray(theta_base, dtype=np.float64) ** (
        -np.arange(0, d_h, 2, dtype=np.float64) / d_h
    )


def rope_sequence(
    x: npt.ArrayLike,
    start: int = 0,
    theta_base: float = THETA_BASE_DEFAULT,
) -> Matrix:
    """
    Rotates row i of `x` as the token at position `start + i`. Dimension
    pairs are interleaved: (0, 1), (2, 3), ...

    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    x_ = as_matrix(x, "rope input")
    inv_freq = _inverse_frequencies(x_.shape[1], theta_base)
    positions = np.arange(start, start + x_.shape[0], dtype=np.float64)
    angles = positions[:, None] * inv_freq[None, :]
    cos = np.cos(angles).astype(F32)
    sin = np.sin(angles).astype(F32)

    even, odd = x_[:, 0::2], x_[:, 1::2]
    out = np.empty_like(x_)
    out[:, 0::2] = even * cos - odd * sin
    out[:, 1::2] = even * sin + odd * cos
    return out


def rope(
    x: npt.ArrayLike,
    position: int,
    theta_base: float = THETA_BASE_DEFAULT,
) -> Vector:
    """
    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    x_ = as_vector(x, "rope input")
    return rope_sequence(x_[None, :], position, theta_base)[0]


def softmax(scores: npt.ArrayLike, scale: float = 1.0) -> Vector:
    """
    :raises RejectedInputError:
    """
    z = as_vector(scores, "scores")
    if z.size == 0:
        raise RejectedInputError("softmax over an empty score array.")
    z = z * F32(scale)
    e = np.exp(z - z.max())
    return (e / e.sum(dtype=F32)).astype(F32)


def random_orthogonal(dim: int, seed: int) -> Matrix:
    """
    Gaussian sample orthonormalized by QR, with the column signs fixed by
    the diagonal of R so that the draw is unique per seed.

    :raises RejectedInputError:
    """
    if dim < 1:
        raise RejectedInputError(
            f"Orthogonal matrix dimension must be >= 1, got {dim}.",
        )
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return (q * signs[None, :]).astype(F32)
