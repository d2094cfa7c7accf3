import pytest

from swankv.domain.services.crossover import crossover_validate, instrumented_steps
from swankv.domain.services.flops import flops_standard, flops_swan


@pytest.mark.parametrize(
    ("d_h", "k", "buffer"),
    [
        pytest.param(64, 16, 0, id="d64_k16_b0"),
        pytest.param(64, 32, 16, id="d64_k32_b16"),
        pytest.param(128, 32, 0, id="d128_k32_b0", marks=pytest.mark.slow),
        pytest.param(128, 64, 128, id="d128_k64_b128", marks=pytest.mark.slow),
    ],
)
def test_measured_crossover_matches_model(d_h, k, buffer):
    report = crossover_validate(d_h, k, buffer)

    assert report.reached
    assert report.agrees
    assert abs(report.measured_length - report.modeled.length) <= 2


def test_measured_costs_follow_closed_form():
    for step in instrumented_steps(64, 16, 8, 120, seed=3):
        assert step.standard_flops == flops_standard(step.length, 64)
        assert step.swan_flops == flops_swan(step.length, 64, 16, 8)
