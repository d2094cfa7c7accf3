from enum import StrEnum


class Precision(StrEnum):
    FP16 = "fp16"
    FP8 = "fp8"
    F32 = "f32"

    @property
    def value_bytes(self) -> int:
        """Bytes per stored sparse value."""
        return _VALUE_BYTES[self]

    @property
    def dense_bytes(self) -> int:
        """Bytes per element of a dense buffer vector."""
        return 4 if self is Precision.F32 else 2


_VALUE_BYTES = {
    Precision.FP16: 2,
    Precision.FP8: 1,
    Precision.F32: 4,
}
