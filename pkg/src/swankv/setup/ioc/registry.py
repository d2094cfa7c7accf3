from collections.abc import Iterable

from dishka import Provider

from swankv.setup.ioc.di_providers.application import ApplicationProvider
from swankv.setup.ioc.di_providers.infrastructure import InfrastructureProvider
from swankv.setup.ioc.di_providers.settings import SettingsProvider


def get_providers() -> Iterable[Provider]:
    return (
        ApplicationProvider(),
        InfrastructureProvider(),
        SettingsProvider(),
    )
