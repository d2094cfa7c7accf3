from dishka import Provider, Scope, from_context

from swankv.setup.config.settings import AppSettings


class SettingsProvider(Provider):
    scope = Scope.APP

    settings = from_context(provides=AppSettings)
