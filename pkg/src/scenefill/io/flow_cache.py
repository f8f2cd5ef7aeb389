from __future__ import annotations

from pathlib import Path

from scenefill.core.types import DomainRect, Mask, WarpField
from scenefill.io.flo import read_warp_flo, write_warp_flo
from scenefill.io.images import read_mask, write_mask
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)


class FlowCache:
    """Adjacent-frame flows stored as `{i:06d}_{j:06d}.flo` plus a validity PNG."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _paths(self, i: int, j: int) -> tuple[Path, Path]:
        stem = f"{i:06d}_{j:06d}"
        return self.root / f"{stem}.flo", self.root / f"{stem}_valid.png"

    def get(self, i: int, j: int, rect: DomainRect) -> WarpField | None:
        flo_path, valid_path = self._paths(i, j)
        if not flo_path.exists():
            return None
        warp = read_warp_flo(flo_path, rect, rect)
        if valid_path.exists():
            warp = warp.with_valid(read_mask(valid_path).data)
        logger.debug("flow cache hit %s", flo_path.name)
        return warp

    def put(self, i: int, j: int, warp: WarpField) -> None:
        flo_path, valid_path = self._paths(i, j)
        write_warp_flo(flo_path, warp)
        write_mask(valid_path, Mask(warp.valid))


__all__ = ["FlowCache"]
