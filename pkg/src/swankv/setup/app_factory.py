__all__ = ("create_ioc_container",)

from collections.abc import Iterable

from dishka import Container, Provider, make_container

from swankv.setup.config.settings import AppSettings


def create_ioc_container(
    providers: Iterable[Provider],
    settings: AppSettings,
) -> Container:
    return make_container(
        *providers,
        context={AppSettings: settings},
    )
