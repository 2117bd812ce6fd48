import subprocess
import sys
from pathlib import Path

import pytest

PLOTS_DIR = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PLOTS_DIR))


def cli(*args) -> None:
    """Drive the producing CLI through its public command-line interface."""
    subprocess.run([sys.executable, "-m", "bayescub.cli", *args], check=True)


@pytest.fixture(scope="session")
def posterior_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv") / "posterior.csv"
    cli(
        "posterior", "--kernel", "gaussian", "--ell", "0.8", "--m", "3",
        "--n", "4", "--points", "grid", "--lo", "-2", "--hi", "2",
        "--integrand", "toy", "--grid-lo", "-2", "--grid-hi", "2",
        "--grid-n", "301", "--out", str(out),
    )
    return out


@pytest.fixture(scope="session")
def sweep_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv") / "sweep.csv"
    cli(
        "lengthscale-sweep", "--integrand", "toy", "--n", "10",
        "--ell-lo", "0.1", "--ell-hi", "5.0", "--ell-count", "8",
        "--m-list", "1,3", "--out", str(out),
    )
    return out


@pytest.fixture(scope="session")
def convergence_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("csv") / "toy.csv"
    cli("toy", "--n", "8,12,16", "--ell", "0.8", "--m", "3", "--seeds", "0,1", "--out", str(out))
    return out
