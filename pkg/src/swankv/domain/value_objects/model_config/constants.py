from typing import Final

HEAD_DIM_MAX: Final[int] = 256  # u8 indices
THETA_BASE_DEFAULT: Final[float] = 10000.0
VOCAB_SIZE_DEFAULT: Final[int] = 256  # byte-level
