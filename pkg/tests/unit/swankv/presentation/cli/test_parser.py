from pathlib import Path

import pytest

from swankv.domain.enums.decode_mode import DecodeMode
from swankv.domain.enums.precision import Precision
from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.presentation.cli.parser import build_parser
from swankv.setup.config.logs import LoggingLevel


def test_defaults_come_from_settings(small_settings):
    args = build_parser(small_settings).parse_args(["run"])

    assert args.command == "run"
    assert args.d_model == 16
    assert args.seed == 3
    assert args.tokens == 64
    assert args.buffer == 2
    assert args.prompt_length == 4
    assert args.mode is DecodeMode.SWAN
    assert args.precision is Precision.FP16
    assert args.log_level is LoggingLevel.WARNING
    assert args.projections is None


def test_flags_override_defaults(small_settings):
    args = build_parser(small_settings).parse_args([
        "--log-level",
        "DEBUG",
        "sweep",
        "--retentions",
        "1.0",
        "0.5",
        "--precisions",
        "fp8",
        "--buffers",
        "0",
        "4",
        "--split",
        "--no-iso-memory",
        "--variant",
        "random",
        "--out",
        "sweep.csv",
    ])

    assert args.log_level is LoggingLevel.DEBUG
    assert args.retentions == [1.0, 0.5]
    assert args.precisions == [Precision.FP8]
    assert args.buffers == [0, 4]
    assert args.split
    assert not args.iso_memory
    assert args.variant is ProjectionVariant.RANDOM
    assert args.out == Path("sweep.csv")


def test_breakeven_positionals(small_settings):
    args = build_parser(small_settings).parse_args([
        "breakeven",
        "128",
        "64",
        "16",
        "--validate",
    ])

    assert (args.d_h, args.k, args.b) == (128, 64, 16)
    assert args.validate
    assert args.max_length is None


@pytest.mark.parametrize(
    "argv",
    [
        pytest.param([], id="no_command"),
        pytest.param(["run", "--precision", "bf16"], id="unknown_precision"),
        pytest.param(["breakeven", "128"], id="missing_positionals"),
        pytest.param(["calibrate", "--buffer", "many"], id="not_an_int"),
    ],
)
def test_rejected_arguments(small_settings, argv):
    with pytest.raises(SystemExit) as info:
        build_parser(small_settings).parse_args(argv)

    assert info.value.code == 2
