import argparse
from pathlib import Path

from swankv.domain.enums.decode_mode import DecodeMode
from swankv.domain.enums.precision import Precision
from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.setup.config.logs import LoggingLevel
from swankv.setup.config.settings import AppSettings

PROG = "swankv"


def build_parser(settings: AppSettings) -> argparse.ArgumentParser:
    """Flag defaults come from `settings`."""
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Decompression-free KV-cache compression on a toy transformer.",
    )
    parser.add_argument(
        "--log-level",
        type=LoggingLevel,
        choices=list(LoggingLevel),
        default=settings.logs.level,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    common = _common_flags(settings)
    calibrate = commands.add_parser(
        "calibrate",
        parents=[common],
        help="derive projection bases and write a projection file",
    )
    _calibration_flags(calibrate, settings)
    calibrate.add_argument("--weights-out", type=Path)

    run = commands.add_parser(
        "run",
        parents=[common],
        help="decode a corpus prompt and write per-step metrics",
    )
    _calibration_flags(run, settings)
    _decode_flags(run, settings)
    run.add_argument(
        "--mode",
        type=DecodeMode,
        choices=list(DecodeMode),
        default=DecodeMode.SWAN,
    )
    run.add_argument("--projections", type=Path)
    run.add_argument("--weights", type=Path)
    run.add_argument("--perplexity", action="store_true")

    sweep = commands.add_parser(
        "sweep",
        parents=[common],
        help="sweep retention, precision and buffer size",
    )
    _calibration_flags(sweep, settings)
    _decode_flags(sweep, settings)
    sweep.add_argument("--projections", type=Path)
    sweep.add_argument("--seeds", type=int, default=settings.runtime.seeds)
    sweep.add_argument(
        "--retentions",
        type=float,
        nargs="+",
        default=list(settings.runtime.retentions),
    )
    sweep.add_argument(
        "--precisions",
        type=Precision,
        nargs="+",
        choices=list(Precision),
        default=[Precision.FP16, Precision.FP8],
    )
    sweep.add_argument(
        "--buffers",
        type=int,
        nargs="+",
        default=list(settings.runtime.buffers),
    )
    sweep.add_argument(
        "--split",
        action="store_true",
        help="K/V split grid with k_key + k_value = d_h",
    )
    sweep.add_argument("--no-iso-memory", dest="iso_memory", action="store_false")

    ablate = commands.add_parser(
        "ablate",
        parents=[common],
        help="compare projection variants by pruned reconstruction error",
    )
    _calibration_flags(ablate, settings)
    ablate.add_argument("--projections", type=Path)
    ablate.add_argument("--seeds", type=int, default=settings.runtime.seeds)
    ablate.add_argument("--retention", type=float, default=0.5)
    ablate.add_argument(
        "--heldout-tokens",
        type=int,
        default=settings.calibration.heldout_tokens,
    )
    ablate.add_argument("--check", action="store_true")

    breakeven = commands.add_parser(
        "breakeven",
        help="modeled (and optionally measured) FLOPs break-even length",
    )
    breakeven.add_argument("d_h", type=int)
    breakeven.add_argument("k", type=int)
    breakeven.add_argument("b", type=int)
    breakeven.add_argument("--validate", action="store_true")
    breakeven.add_argument("--max-length", type=int)
    breakeven.add_argument("--seed", type=int, default=0)
    breakeven.add_argument("--out", type=Path)
    return parser


def _common_flags(settings: AppSettings) -> argparse.ArgumentParser:
    model, cache = settings.model, settings.cache
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("model")
    group.add_argument("--d-model", type=int, default=model.d_model)
    group.add_argument("--d-head", type=int, default=model.d_head)
    group.add_argument("--layers", type=int, default=model.layers)
    group.add_argument("--q-heads", type=int, default=model.q_heads)
    group.add_argument("--kv-heads", type=int, default=model.kv_heads)
    group.add_argument("--theta-base", type=float, default=model.theta_base)
    group.add_argument("--vocab-size", type=int, default=model.vocab_size)
    group.add_argument("--seed", type=int, default=model.seed)

    group = common.add_argument_group("cache")
    group.add_argument("--k-ratio", type=float, default=cache.k_ratio)
    group.add_argument("--k-key", type=int)
    group.add_argument("--k-value", type=int)
    group.add_argument("--buffer", type=int, default=cache.buffer)
    group.add_argument(
        "--precision",
        type=Precision,
        choices=list(Precision),
        default=cache.precision,
    )

    group = common.add_argument_group("input / output")
    group.add_argument(
        "--variant",
        type=ProjectionVariant,
        choices=list(ProjectionVariant),
        default=settings.calibration.variant,
    )
    group.add_argument("--corpus", type=Path, default=settings.calibration.corpus)
    group.add_argument("--out", type=Path)
    return common


def _calibration_flags(
    parser: argparse.ArgumentParser,
    settings: AppSettings,
) -> None:
    parser.add_argument(
        "--tokens",
        type=int,
        default=settings.calibration.tokens,
        help="calibration tokens taken from the start of the corpus",
    )


def _decode_flags(parser: argparse.ArgumentParser, settings: AppSettings) -> None:
    parser.add_argument(
        "--prompt-length",
        type=int,
        default=settings.runtime.prompt_length,
    )
    parser.add_argument("--steps", type=int, default=settings.runtime.steps)
