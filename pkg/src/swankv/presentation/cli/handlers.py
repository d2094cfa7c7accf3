"""
One handler per subcommand: build the request from parsed flags, resolve
the interactor in a request scope and render its response as summary
lines.
"""

import argparse
from collections.abc import Callable, Mapping
from pathlib import Path
from types import MappingProxyType
from typing import Final

from dishka import Container

from swankv.application.commands.ablate import AblateInteractor, AblateRequest
from swankv.application.commands.breakeven import (
    BreakevenInteractor,
    BreakevenRequest,
)
from swankv.application.commands.calibrate import (
    CalibrateInteractor,
    CalibrateRequest,
)
from swankv.application.commands.run_decode import (
    RunDecodeInteractor,
    RunDecodeRequest,
)
from swankv.application.commands.sweep import SweepInteractor, SweepRequest
from swankv.application.common.services.model_provider import ModelSource
from swankv.application.common.services.projection_provider import (
    ProjectionSource,
)
from swankv.presentation.cli.run_spec import RunSpec
from swankv.setup.config.settings import AppSettings

DEFAULT_PROJECTION_PATH: Final[Path] = Path("swan_projections.bin")

CommandHandler = Callable[[argparse.Namespace, AppSettings, Container], list[str]]

_SPEC_FIELDS: Final[frozenset[str]] = frozenset(RunSpec.model_fields)


def run_spec_from_args(args: argparse.Namespace) -> RunSpec:
    """
    :raises pydantic.ValidationError:
    :raises RejectedConfigurationError:
    :raises RejectedInputError:
    """
    return RunSpec.model_validate({
        k: v for k, v in vars(args).items() if k in _SPEC_FIELDS
    })


def _model_source(spec: RunSpec, weights: Path | None = None) -> ModelSource:
    return ModelSource(config=spec.to_config(), seed=spec.seed, weights=weights)


def _projection_source(
    spec: RunSpec,
    args: argparse.Namespace,
    settings: AppSettings,
) -> ProjectionSource:
    return ProjectionSource(
        path=getattr(args, "projections", None),
        corpus=spec.corpus,
        token_count=args.tokens,
        variant=spec.variant,
        workers=settings.parallelism.threads,
    )


def handle_calibrate(
    args: argparse.Namespace,
    settings: AppSettings,
    container: Container,
) -> list[str]:
    spec = run_spec_from_args(args)
    request_data = CalibrateRequest(
        model=_model_source(spec),
        projection=_projection_source(spec, args, settings),
        out=spec.out or DEFAULT_PROJECTION_PATH,
        weights_out=args.weights_out,
    )
    with container() as request_container:
        response = request_container.get(CalibrateInteractor)(request_data)

    lines = [
        f"projection file: {response['path']}",
        f"variant: {response['variant']}",
        f"corpus: {response['corpus_id']} ({response['token_count']} tokens)",
    ]
    for layer in response["layers"]:
        energy = ", ".join(f"k={k}: {e:.4f}" for k, e in layer["energy"].items())
        lines.append(
            f"layer {layer['layer']}: residual P_QK {layer['residual_qk']:.2e}, "
            f"P_VO {layer['residual_vo']:.2e}; key energy {energy}",
        )
    return lines


def handle_run(
    args: argparse.Namespace,
    settings: AppSettings,
    container: Container,
) -> list[str]:
    spec = run_spec_from_args(args)
    request_data = RunDecodeRequest(
        model=_model_source(spec, args.weights),
        projection=_projection_source(spec, args, settings),
        mode=args.mode,
        params=spec.cache_params(),
        prompt_length=args.prompt_length,
        steps=args.steps,
        out=spec.out,
        with_perplexity=args.perplexity,
    )
    with container() as request_container:
        response = request_container.get(RunDecodeInteractor)(request_data)

    lines = [
        f"mode: {response['mode']}",
        f"generated: {' '.join(str(t) for t in response['generated'])}",
        f"max drift: {response['max_drift']:.6e}",
        f"mean drift (L2): {response['mean_drift']:.6e}",
        f"final cache bytes: {response['final_cache_bytes']}",
    ]
    if response["perplexity"] is not None:
        lines.append(f"perplexity: {response['perplexity']:.6f}")
    return lines


def handle_sweep(
    args: argparse.Namespace,
    settings: AppSettings,
    container: Container,
) -> list[str]:
    spec = run_spec_from_args(args)
    request_data = SweepRequest(
        model=_model_source(spec),
        projection=_projection_source(spec, args, settings),
        prompt_length=args.prompt_length,
        steps=args.steps,
        seeds=args.seeds,
        retentions=tuple(args.retentions),
        precisions=tuple(args.precisions),
        buffers=tuple(args.buffers),
        split=args.split,
        iso_memory=args.iso_memory,
        threads=settings.parallelism.threads,
        out=spec.out,
    )
    with container() as request_container:
        response = request_container.get(SweepInteractor)(request_data)

    lines = [f"rows: {response['rows']} over seeds {response['seeds']}"]
    lines.extend(
        f"trend seed {t['seed']} {t['precision']} b={t['buffer']}: "
        f"spearman {t['spearman']:.3f}"
        for t in response["trend"]
    )
    if response["best_split"] is not None:
        winners = ", ".join(f"{w:.1f}" for w in response["split_winners"])
        lines.append(
            f"best key share: {response['best_split']:.1f} (per seed {winners})",
        )
    return lines


def handle_breakeven(
    args: argparse.Namespace,
    _: AppSettings,
    container: Container,
) -> list[str]:
    request_data = BreakevenRequest(
        d_h=args.d_h,
        k=args.k,
        buffer=args.b,
        validate=args.validate,
        max_length=args.max_length,
        seed=args.seed,
        out=args.out,
    )
    with container() as request_container:
        response = request_container.get(BreakevenInteractor)(request_data)

    lines = [
        f"d_h={response['d_h']} k={response['k']} b={response['buffer']}: "
        f"break-even L = {response['modeled']}",
    ]
    if response["measured"] is not None:
        lines.append(f"measured crossover: {response['measured']}")
    return lines


def handle_ablate(
    args: argparse.Namespace,
    settings: AppSettings,
    container: Container,
) -> list[str]:
    spec = run_spec_from_args(args)
    request_data = AblateRequest(
        model=_model_source(spec),
        projection=_projection_source(spec, args, settings),
        seeds=args.seeds,
        retention=args.retention,
        heldout_tokens=args.heldout_tokens,
        check=args.check,
        out=spec.out,
    )
    with container() as request_container:
        response = request_container.get(AblateInteractor)(request_data)

    lines = [f"k = {response['k']}, seeds {response['seeds']}"]
    lines.extend(
        f"{v['variant']:>14}: mean error {v['error_mean']:.4f} "
        f"(best in {v['best_in_seeds']}, worst in {v['worst_in_seeds']})"
        for v in response["variants"]
    )
    return lines


COMMAND_HANDLERS: Final[Mapping[str, CommandHandler]] = MappingProxyType({
    "calibrate": handle_calibrate,
    "run": handle_run,
    "sweep": handle_sweep,
    "breakeven": handle_breakeven,
    "ablate": handle_ablate,
})
