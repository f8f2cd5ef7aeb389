from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from conftest import box_mask
from scenefill.core.types import DomainRect, Frame, Mask
from scenefill.errors import ImageIOError, InputError
from scenefill.flow import from_displacement
from scenefill.io.flow_cache import FlowCache
from scenefill.io.images import (
    list_frames,
    load_masks,
    load_sequence,
    read_frame,
    read_mask,
    write_frame,
    write_frames,
    write_mask,
)
from scenefill.io.results_db import METRIC_KEYS, METRIC_VALUES, ResultsDB
from scenefill.utils.dates import timed
from scenefill.utils.staging import staged_directory


def write_clip(root, n=3, size=8, with_masks=True):
    frames = [Frame.from_uint8(np.full((size, size, 3), 40 * (i + 1), dtype=np.uint8)) for i in range(n)]
    write_frames(root / "frames", frames)
    if with_masks:
        for i in range(n):
            write_mask(root / "masks" / f"{i:06d}.png", box_mask(size, size, 2, 2, 3))
    return frames


def test_png_round_trip(tmp_path):
    pixels = np.arange(48, dtype=np.uint8).reshape(4, 4, 3) * 5
    frame = Frame.from_uint8(pixels)
    write_frame(tmp_path / "a.png", frame)
    assert np.array_equal(read_frame(tmp_path / "a.png").to_uint8(), pixels)
    gray = Frame.from_uint8(np.arange(16, dtype=np.uint8).reshape(4, 4))
    write_frame(tmp_path / "g.png", gray)
    assert read_frame(tmp_path / "g.png").channels == 1


def test_mask_round_trip(tmp_path):
    mask = box_mask(6, 6, 1, 1, 2)
    write_mask(tmp_path / "m.png", mask)
    assert np.array_equal(read_mask(tmp_path / "m.png").data, mask.data)


def test_unreadable_image(tmp_path):
    (tmp_path / "bad.png").write_bytes(b"not a png")
    with pytest.raises(ImageIOError):
        read_frame(tmp_path / "bad.png")


def test_list_frames_ignores_other_names(tmp_path):
    write_clip(tmp_path, with_masks=False)
    (tmp_path / "frames" / "notes.txt").write_text("x")
    (tmp_path / "frames" / "000003_est.png").write_bytes(b"")
    assert [p.name for p in list_frames(tmp_path / "frames")] == ["000000.png", "000001.png", "000002.png"]
    with pytest.raises(InputError):
        list_frames(tmp_path / "missing")


def test_load_sequence(tmp_path):
    frames = write_clip(tmp_path)
    paths, loaded, masks = load_sequence(tmp_path / "frames", tmp_path / "masks")
    assert len(paths) == len(loaded) == len(masks) == 3
    assert np.array_equal(loaded[1].data, frames[1].data)
    assert masks[0].count == 9


def test_missing_mask_is_an_input_error(tmp_path):
    write_clip(tmp_path)
    (tmp_path / "masks" / "000001.png").unlink()
    with pytest.raises(InputError, match="000001.png"):
        load_sequence(tmp_path / "frames", tmp_path / "masks")
    optional = load_masks(list_frames(tmp_path / "frames"), tmp_path / "masks", required=False)
    assert optional[1] is None and optional[0] is not None


def test_mask_size_mismatch(tmp_path):
    write_clip(tmp_path)
    write_mask(tmp_path / "masks" / "000002.png", Mask.empty(4, 4))
    with pytest.raises(InputError):
        load_sequence(tmp_path / "frames", tmp_path / "masks")


def test_flow_cache(tmp_path):
    rect = DomainRect((0, 0), 10, 6)
    warp = from_displacement(np.broadcast_to([1.0, 0.0], rect.shape + (2,)), rect)
    cache = FlowCache(tmp_path / "cache")
    assert cache.get(0, 1, rect) is None
    cache.put(0, 1, warp)
    loaded = cache.get(0, 1, rect)
    assert np.allclose(loaded.map, warp.map)
    assert np.array_equal(loaded.valid, warp.valid)
    assert cache.get(1, 0, rect) is None


def test_staged_directory_commits_on_success(tmp_path):
    target = tmp_path / "out"
    with staged_directory(target) as stage:
        (stage / "a.txt").write_text("1")
    assert (target / "a.txt").read_text() == "1"
    with staged_directory(target) as stage:
        (stage / "b.txt").write_text("2")
        (stage / "a.txt").write_text("3")
    assert (target / "a.txt").read_text() == "3"
    assert (target / "b.txt").read_text() == "2"
    assert [p.name for p in tmp_path.iterdir()] == ["out"]


def test_staged_directory_leaves_nothing_on_error(tmp_path):
    target = tmp_path / "out"
    with pytest.raises(RuntimeError):
        with staged_directory(target) as stage:
            (stage / "a.txt").write_text("1")
            raise RuntimeError("boom")
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_timed_accumulates():
    timings: dict[str, float] = {}
    with timed(timings, "stage"):
        pass
    with timed(timings, "stage"):
        pass
    assert list(timings) == ["stage"]
    assert timings["stage"] >= 0.0


def test_results_db_replaces_rows_by_key(tmp_path):
    db = ResultsDB(tmp_path / "results.duckdb")
    try:
        rows = pd.DataFrame({"frame": [0, 1], "psnr": [30.0, 31.0], "ssim": [0.9, 0.95], "masked_px": [10, 12]})
        assert db.store_metrics(rows, "r1", "pan", "full") == 2
        rows.loc[1, "psnr"] = 40.0
        rows["tpsnr"] = 33.0
        db.store_metrics(rows, "r1", "pan", "full")
        db.store_metrics(rows.iloc[:1], "r1", "pan", "sliding")
        stored = db.fetch_metrics("r1")
        assert len(stored) == 3
        full = stored[stored["mode"] == "full"].set_index("frame")
        assert full.loc[1, "psnr"] == 40.0
        assert full.loc[0, "tpsnr"] == 33.0
        assert pd.isna(full.loc[0, "tssim"])
        assert db.fetch_metrics("other").empty
    finally:
        db.close()


def test_results_db_rejects_foreign_rows():
    db = ResultsDB(":memory:")
    try:
        assert db.store_metrics(pd.DataFrame(), "r1", "pan", "full") == 0
        with pytest.raises(InputError):
            db.store_metrics(pd.DataFrame({"psnr": [30.0]}), "r1", "pan", "full")
        with pytest.raises(InputError):
            db.store_metrics(pd.DataFrame({"frame": [0], "lpips": [0.1]}), "r1", "pan", "full")
    finally:
        db.close()


def test_results_db_starts_empty():
    db = ResultsDB(":memory:")
    try:
        stored = db.fetch_metrics()
        assert stored.empty
        assert list(stored.columns) == METRIC_KEYS + METRIC_VALUES
    finally:
        db.close()
