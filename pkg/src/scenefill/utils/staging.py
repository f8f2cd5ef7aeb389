"""Outputs are written to a sibling directory and moved into place only when the run succeeds."""

from __future__ import annotations

import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from scenefill.errors import ImageIOError
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)


def _merge_into(staging: Path, target: Path) -> None:
    target.mkdir(parents=True, exist_ok=True)
    for item in sorted(staging.iterdir()):
        destination = target / item.name
        if destination.is_dir() and not item.is_dir():
            raise ImageIOError(f"{destination} is a directory, cannot replace it with a file")
        if item.is_dir():
            _merge_into(item, destination)
        else:
            item.replace(destination)


@contextmanager
def staged_directory(target: str | Path) -> Iterator[Path]:
    """Yield a scratch directory; on success its content lands in `target`, on error nothing does.

    A missing target is created by a single rename; an existing one receives the files one by one.
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.", suffix=".staging", dir=target.parent))
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    try:
        if target.exists():
            _merge_into(staging, target)
            shutil.rmtree(staging, ignore_errors=True)
        else:
            staging.replace(target)
    except OSError as exc:
        shutil.rmtree(staging, ignore_errors=True)
        raise ImageIOError(f"cannot move outputs into {target}: {exc}") from exc
    logger.info("outputs committed to %s", target)
