import logging
from collections.abc import Sequence

from dishka import Provider

from swankv.presentation.cli.exit_codes import (
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    resolve_exit_code,
)
from swankv.presentation.cli.handlers import COMMAND_HANDLERS
from swankv.presentation.cli.parser import build_parser
from swankv.setup.app_factory import create_ioc_container
from swankv.setup.config.logs import configure_logging
from swankv.setup.config.settings import AppSettings, load_settings
from swankv.setup.ioc.registry import get_providers

log = logging.getLogger(__name__)


def main(
    argv: Sequence[str] | None = None,
    *di_providers: Provider,
    settings: AppSettings | None = None,
) -> int:
    """
    Parses `argv`, runs one subcommand and returns the process exit code.
    Summary lines go to stdout, diagnostics to stderr.
    """
    if settings is None:
        configure_logging()
        try:
            settings = load_settings()
        except ValueError as err:
            log.warning("Settings rejected: %s", err)
            return EXIT_INVALID

    args = build_parser(settings).parse_args(argv)
    configure_logging(level=args.log_level)

    container = create_ioc_container(
        providers=(*get_providers(), *di_providers),
        settings=settings,
    )
    try:
        lines = COMMAND_HANDLERS[args.command](args, settings, container)
    except Exception as err:  # noqa: BLE001
        code = resolve_exit_code(err)
        log_exception(err, code)
        return code
    finally:
        container.close()

    for line in lines:
        print(line)
    return EXIT_OK


def log_exception(err: Exception, code: int) -> None:
    if code >= EXIT_IO:
        log.error(
            "%s failed (exit %d): %s",
            type(err).__name__,
            code,
            err,
            exc_info=err,
        )
    else:
        log.warning("%s (exit %d): %s", type(err).__name__, code, err)
