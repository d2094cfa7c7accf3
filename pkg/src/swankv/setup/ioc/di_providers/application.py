from dishka import Provider, Scope, provide_all

from swankv.application.commands.ablate import AblateInteractor
from swankv.application.commands.breakeven import BreakevenInteractor
from swankv.application.commands.calibrate import CalibrateInteractor
from swankv.application.commands.run_decode import RunDecodeInteractor
from swankv.application.commands.sweep import SweepInteractor
from swankv.application.common.services.model_provider import ModelProvider
from swankv.application.common.services.projection_provider import (
    ProjectionProvider,
)


class ApplicationProvider(Provider):
    scope = Scope.REQUEST

    # Services
    services = provide_all(
        ModelProvider,
        ProjectionProvider,
    )

    # Commands
    commands = provide_all(
        CalibrateInteractor,
        RunDecodeInteractor,
        SweepInteractor,
        BreakevenInteractor,
        AblateInteractor,
    )
