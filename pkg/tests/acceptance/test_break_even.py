import pytest

from swankv.domain.services.flops import break_even_length, flops_standard, flops_swan
from swankv.presentation.cli.main import main


@pytest.mark.parametrize(
    ("k", "buffer", "published"),
    [
        pytest.param(32, 0, 171, id="k32_b0"),
        pytest.param(64, 0, 256, id="k64_b0"),
        pytest.param(96, 0, 512, id="k96_b0"),
        pytest.param(32, 128, 299, id="k32_b128"),
        pytest.param(64, 128, 384, id="k64_b128"),
        pytest.param(96, 128, 640, id="k96_b128"),
    ],
)
def test_published_break_even_lengths(k, buffer, published):
    result = break_even_length(128, k, buffer)

    assert result.length is not None
    assert abs(result.length - published) <= 1
    length = result.length
    assert flops_swan(length, 128, k, buffer) < flops_standard(length, 128)
    assert flops_swan(length - 1, 128, k, buffer) >= flops_standard(length - 1, 128)


def test_break_even_from_command_line(capsys):
    assert main(["breakeven", "128", "32", "0"]) == 0

    assert "break-even L = 171" in capsys.readouterr().out
