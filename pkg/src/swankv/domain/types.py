from typing import Final

import numpy as np
import numpy.typing as npt

# f32 is the only arithmetic type; fp16/fp8 exist only as storage encodings.
Matrix = npt.NDArray[np.float32]
Vector = npt.NDArray[np.float32]
IndexArray = npt.NDArray[np.uint8]
Codes = npt.NDArray[np.uint8]

F32: Final = np.float32
