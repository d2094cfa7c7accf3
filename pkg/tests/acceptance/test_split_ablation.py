import pytest

from swankv.application.commands.sweep import SweepInteractor, SweepRequest
from swankv.application.common.services.projection_provider import ProjectionSource
from swankv.domain.enums.precision import Precision

SEEDS = 5


@pytest.mark.slow
def test_symmetric_split_has_least_drift(container, toy_source, tmp_path):
    request_data = SweepRequest(
        model=toy_source,
        projection=ProjectionSource(token_count=2048),
        prompt_length=32,
        steps=32,
        seeds=SEEDS,
        precisions=(Precision.FP16,),
        buffers=(0,),
        split=True,
        out=tmp_path / "split.csv",
    )

    with container() as request_container:
        response = request_container.get(SweepInteractor)(request_data)

    assert len(response["split_winners"]) == SEEDS
    assert sum(w == 0.5 for w in response["split_winners"]) >= SEEDS - 1
    assert response["best_split"] == 0.5
