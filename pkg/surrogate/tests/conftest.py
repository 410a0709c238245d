import subprocess
import sys

import pytest


def generate_dataset(out_dir, family, limit, seed=7, extra=()):
    """Produce a dataset through the primary toolchain's CLI; the surrogate
    consumes it purely via the SGF1/manifest files."""
    subprocess.run(
        [sys.executable, "-m", "stressforge.cli", "generate", "--family", family,
         "--seed", str(seed), "--limit", str(limit), "--workers", "1",
         "--out", str(out_dir), *extra],
        check=True, capture_output=True, text=True,
    )
    return out_dir


def add_random_split(data_dir, name="entire", ratio=0.8, seed=3):
    subprocess.run(
        [sys.executable, "-m", "stressforge.cli", "split", "--data", str(data_dir),
         "--mode", "random", "--ratio", str(ratio), "--seed", str(seed),
         "--name", name],
        check=True, capture_output=True, text=True,
    )
    return name


@pytest.fixture(scope="session")
def coarse_dataset(tmp_path_factory):
    """48 coarse cases (m=32) with an 80/20 split named 'entire'."""
    out = tmp_path_factory.mktemp("coarse48")
    generate_dataset(out, "coarse", 48)
    add_random_split(out)
    return out


@pytest.fixture(scope="session")
def fine64_dataset(tmp_path_factory):
    """The first 64 fine-mesh cases (m=128): one geometry and BC pattern,
    8 load patterns x 8 orientations."""
    out = tmp_path_factory.mktemp("fine64")
    generate_dataset(out, "fine", 64)
    return out
