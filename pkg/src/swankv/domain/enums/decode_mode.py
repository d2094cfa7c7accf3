from enum import StrEnum


class DecodeMode(StrEnum):
    BASELINE = "baseline"
    SWAN = "swan"
