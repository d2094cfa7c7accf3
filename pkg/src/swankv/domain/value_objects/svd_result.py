from dataclasses import dataclass

import numpy as np

from swankv.domain.exceptions.base import DomainFieldError
from swankv.domain.types import F32, Matrix, Vector
from swankv.domain.value_objects.base import ValueObject


@dataclass(frozen=True, repr=False, eq=False)
class SvdResult(ValueObject):
    """raises DomainFieldError"""

    u: Matrix
    singular_values: Vector
    v: Matrix

    def __post_init__(self) -> None:
        """
        :raises DomainFieldError:
        """
        super().__post_init__()

        sigma = np.asarray(self.singular_values, dtype=F32)
        if sigma.ndim != 1 or (sigma < 0).any():
            raise DomainFieldError("Singular values must be a 1-D array of f32 >= 0.")
        if sigma.size > 1 and (np.diff(sigma) > 0).any():
            raise DomainFieldError("Singular values must be sorted descending.")
        if self.v.shape != (sigma.size, sigma.size):
            raise DomainFieldError(
                f"Right singular basis must be {sigma.size}x{sigma.size}, "
                f"got {self.v.shape}.",
            )
        if self.u.ndim != 2 or self.u.shape[1] != sigma.size:
            raise DomainFieldError(
                f"Left singular vectors must have {sigma.size} columns.",
            )
        self._freeze("u", np.array(self.u, dtype=F32))
        self._freeze("singular_values", sigma.copy())
        self._freeze("v", np.array(self.v, dtype=F32))

    def reconstruct(self) -> Matrix:
        return ((self.u * self.singular_values[None, :]) @ self.v.T).astype(F32)
