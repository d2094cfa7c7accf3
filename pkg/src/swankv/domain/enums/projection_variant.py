from enum import StrEnum


class ProjectionVariant(StrEnum):
    LEARNED = "learned"
    RANDOM = "random"
    LAYER_SHUFFLE = "layer_shuffle"
    KV_SHUFFLE = "kv_shuffle"
    HEAD_SHUFFLE = "head_shuffle"
    IDENTITY = "identity"

    @property
    def code(self) -> int:
        """u8 tag used by the projection file."""
        return list(ProjectionVariant).index(self)

    @classmethod
    def from_code(cls, code: int) -> "ProjectionVariant":
        members = list(cls)
        if not 0 <= code < len(members):
            raise ValueError(f"Unknown projection variant code {code}.")
        return members[code]
