"""Access to the data files shipped inside the package."""

from importlib.resources import files
from pathlib import Path


def data_path(name: str) -> Path:
    """Path of a shipped data file (lexicons, keywords, sample dictionary)."""
    path = Path(str(files("vidtriage").joinpath("data", name)))
    if not path.exists():
        raise FileNotFoundError(f"no shipped data file named {name!r}")
    return path
