"""
Shared pytest fixtures for the conformal-blocks tests.
"""

import shutil
from pathlib import Path

import pytest

from app import main
from core.fusion_ring import RankCalculator
from core.voa_models import ising_model, lattice_model

SAMPLE_MODELS = Path(__file__).resolve().parent.parent / "data-sample" / "models"


@pytest.fixture
def ising():
    """
    The Ising model with labels 1, e, s.

    Returns:
        FusionModel: Ising fusion data
    """
    return ising_model()


@pytest.fixture
def ising_calc(ising):
    """
    A rank session shared by one test.

    Returns:
        RankCalculator: Calculator for the Ising model
    """
    return RankCalculator(ising)


@pytest.fixture
def lattice8():
    """Rank-1 lattice model with q(e,e) = 8."""
    return lattice_model(8)


@pytest.fixture
def model_dir(tmp_path):
    """
    Create a temporary directory holding copies of the sample model files.

    Returns:
        Path: Directory with ising.json and sl2_level1.yaml
    """
    target = tmp_path / "models"
    shutil.copytree(SAMPLE_MODELS, target)
    return target


@pytest.fixture
def run_cli(capsys):
    """
    Run the command-line tool in-process.

    Returns:
        Callable taking an argument list and returning (exit_code, stdout, stderr)
    """
    def _run(argv):
        code = main(argv)
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run
