import dishka.plotter
from dishka import Container

from swankv.setup.app_factory import create_ioc_container
from swankv.setup.config.settings import AppSettings, load_settings
from swankv.setup.ioc.registry import get_providers


def make_plot_data_container(settings: AppSettings) -> Container:
    return create_ioc_container(get_providers(), settings)


def generate_dependency_graph_d2(container: Container) -> str:
    """
    Generates a dependency graph for the container in `d2` format.
    See https://d2lang.com for rendering instructions.
    """
    return dishka.plotter.render_d2(container)


def main() -> None:
    settings: AppSettings = load_settings()
    container = make_plot_data_container(settings)
    try:
        print(generate_dependency_graph_d2(container))
    finally:
        container.close()


if __name__ == "__main__":
    main()
