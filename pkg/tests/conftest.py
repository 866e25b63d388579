import shutil
import subprocess
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent


def _gcc_works() -> bool:
    gcc = shutil.which("gcc")
    if gcc is None:
        return False
    try:
        probe = subprocess.run(
            [gcc, "--version"], capture_output=True, timeout=30, check=False
        )
    except (OSError, subprocess.TimeoutExpired):
        return False
    return probe.returncode == 0


HAVE_GCC = _gcc_works()

needs_gcc = pytest.mark.skipif(not HAVE_GCC, reason="gcc not available")


@pytest.fixture(scope="session")
def samples_dir() -> Path:
    return REPO_ROOT / "samples"


@pytest.fixture()
def workdir(tmp_path: Path) -> Path:
    d = tmp_path / "work"
    d.mkdir()
    return d
