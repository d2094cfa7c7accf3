from dishka import Provider, Scope, provide

from swankv.application.common.ports.corpus_reader import CorpusReader
from swankv.application.common.ports.metrics_writer import MetricsWriter
from swankv.application.common.ports.projection_store import ProjectionStore
from swankv.application.common.ports.weight_store import WeightStore
from swankv.infrastructure.adapters.corpus_bytes import ByteCorpusReader
from swankv.infrastructure.adapters.metrics_csv import CsvMetricsWriter
from swankv.infrastructure.adapters.projection_file import BinaryProjectionStore
from swankv.infrastructure.adapters.weight_file import JsonHeaderWeightStore


class InfrastructureProvider(Provider):
    scope = Scope.APP

    # Ports Storage
    projection_store = provide(
        source=BinaryProjectionStore,
        provides=ProjectionStore,
    )
    weight_store = provide(
        source=JsonHeaderWeightStore,
        provides=WeightStore,
    )

    # Ports Input / Output
    corpus_reader = provide(
        source=ByteCorpusReader,
        provides=CorpusReader,
    )
    metrics_writer = provide(
        source=CsvMetricsWriter,
        provides=MetricsWriter,
    )
