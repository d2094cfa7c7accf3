import csv
import logging
from unittest.mock import patch

from swankv.infrastructure.adapters.projection_file import BinaryProjectionStore
from swankv.presentation.cli.exit_codes import (
    EXIT_ACCEPTANCE,
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
)
from swankv.presentation.cli.main import log_exception, main


def test_breakeven(capsys, small_settings):
    code = main(["breakeven", "128", "64", "0"], settings=small_settings)

    assert code == EXIT_OK
    assert capsys.readouterr().out == "d_h=128 k=64 b=0: break-even L = 257\n"


def test_breakeven_validate(capsys, small_settings):
    code = main(["breakeven", "16", "8", "4", "--validate"], settings=small_settings)

    assert code == EXIT_OK
    assert "measured crossover: 37" in capsys.readouterr().out


def test_breakeven_above_head_dim(capsys, small_settings, tmp_path):
    argv = ["breakeven", "8", "12", "2", "--validate", "--out", str(tmp_path / "b.csv")]

    code = main(argv, settings=small_settings)

    assert code == EXIT_OK
    assert capsys.readouterr().out == (
        "d_h=8 k=12 b=2: break-even L = never\nmeasured crossover: not reached\n"
    )


def test_failed_acceptance_check(capsys, small_settings):
    argv = ["breakeven", "16", "8", "4", "--validate", "--max-length", "10"]

    code = main(argv, settings=small_settings)

    assert code == EXIT_ACCEPTANCE
    assert capsys.readouterr().out == ""


def test_calibrate_then_run(tmp_path, small_settings):
    projections = tmp_path / "swan.bin"
    metrics = tmp_path / "run.csv"

    calibrated = main(
        ["calibrate", "--out", str(projections)],
        settings=small_settings,
    )
    ran = main(
        [
            "run",
            "--projections",
            str(projections),
            "--out",
            str(metrics),
            "--precision",
            "fp8",
        ],
        settings=small_settings,
    )

    assert calibrated == EXIT_OK
    assert BinaryProjectionStore().load(projections).metadata.seed == 3
    assert ran == EXIT_OK
    with open(metrics, encoding="utf-8", newline="") as stream:
        rows = list(csv.DictReader(stream))
    assert [int(r["L"]) for r in rows] == [1, 2, 3, 4, 5, 6]


def test_missing_projection_file(tmp_path, small_settings):
    code = main(
        ["run", "--projections", str(tmp_path / "absent.bin")],
        settings=small_settings,
    )

    assert code == EXIT_IO


def test_projection_file_for_other_model(tmp_path, small_settings):
    projections = tmp_path / "swan.bin"
    main(["calibrate", "--out", str(projections)], settings=small_settings)

    code = main(
        ["run", "--projections", str(projections), "--seed", "4", "--layers", "2"],
        settings=small_settings,
    )

    assert code == EXIT_INVALID


def test_inconsistent_flags(small_settings):
    assert main(["run", "--k-key", "9"], settings=small_settings) == EXIT_INVALID


def test_rejected_settings():
    with patch(
        "swankv.presentation.cli.main.load_settings",
        side_effect=ValueError("Invalid APP_ENV"),
    ):
        assert main(["breakeven", "8", "4", "0"]) == EXIT_INVALID


def test_log_exception_levels(caplog):
    with caplog.at_level(logging.WARNING):
        log_exception(ValueError("bad flag"), EXIT_INVALID)
        log_exception(OSError("disk"), EXIT_IO)

    levels = [record.levelno for record in caplog.records]
    assert levels == [logging.WARNING, logging.ERROR]
    assert caplog.records[1].exc_info is not None
