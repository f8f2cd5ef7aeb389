from __future__ import annotations

from pathlib import Path

import duckdb
import pandas as pd

from scenefill.config import settings
from scenefill.errors import InputError
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

METRICS_TABLE = "frame_metrics"
METRIC_KEYS = ["run_id", "scenario", "mode", "frame"]
METRIC_VALUES = ["psnr", "ssim", "masked_px", "tpsnr", "tssim"]

_CREATE_METRICS = f"""
CREATE TABLE IF NOT EXISTS {METRICS_TABLE} (
    run_id VARCHAR NOT NULL,
    scenario VARCHAR NOT NULL,
    "mode" VARCHAR NOT NULL,
    frame BIGINT NOT NULL,
    psnr DOUBLE,
    ssim DOUBLE,
    masked_px BIGINT,
    tpsnr DOUBLE,
    tssim DOUBLE,
    PRIMARY KEY (run_id, scenario, "mode", frame)
)
"""

_COLUMN_LIST = ", ".join(f'"{c}"' for c in METRIC_KEYS + METRIC_VALUES)


class ResultsDB:
    """Per-frame benchmark metrics in DuckDB, keyed by run, scenario, mode and frame.

    Storing a key again replaces the earlier row, so re-running a scenario overwrites its numbers.
    """

    def __init__(self, db_path: str | Path | None = None, read_only: bool = False):
        self.db_path = str(db_path or settings.RESULTS_DB_PATH)
        if self.db_path != ":memory:":
            Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
        self._con = duckdb.connect(self.db_path, read_only=read_only)
        if not read_only:
            self._con.execute(_CREATE_METRICS)

    @property
    def con(self) -> duckdb.DuckDBPyConnection:
        return self._con

    def close(self) -> None:
        self._con.close()

    def store_metrics(self, frame_rows: pd.DataFrame, run_id: str, scenario: str, mode: str) -> int:
        """Insert or replace one row per frame; metric columns the rows lack are stored as NULL."""
        if frame_rows.empty:
            return 0
        if "frame" not in frame_rows.columns:
            raise InputError("metric rows need a 'frame' column")
        unknown = sorted(set(frame_rows.columns) - set(METRIC_KEYS) - set(METRIC_VALUES))
        if unknown:
            raise InputError(f"{METRICS_TABLE} has no columns {unknown}")

        rows = frame_rows.reindex(columns=["frame", *METRIC_VALUES])
        rows.insert(0, "mode", mode)
        rows.insert(0, "scenario", scenario)
        rows.insert(0, "run_id", run_id)
        rows["frame"] = rows["frame"].astype("int64")
        rows["masked_px"] = rows["masked_px"].astype("Int64")
        for column in ("psnr", "ssim", "tpsnr", "tssim"):
            rows[column] = rows[column].astype("float64")

        self._con.register("incoming", rows)
        try:
            self._con.execute(
                f"INSERT OR REPLACE INTO {METRICS_TABLE} ({_COLUMN_LIST}) SELECT {_COLUMN_LIST} FROM incoming"
            )
        finally:
            self._con.unregister("incoming")
        logger.debug("stored %d frame rows for %s/%s/%s", len(rows), run_id, scenario, mode)
        return len(rows)

    def fetch_metrics(self, run_id: str | None = None) -> pd.DataFrame:
        exists = self._con.execute(
            "SELECT 1 FROM information_schema.tables WHERE table_name = ?", [METRICS_TABLE]
        ).fetchone()
        if not exists:
            return pd.DataFrame(columns=METRIC_KEYS + METRIC_VALUES)
        query = f"SELECT {_COLUMN_LIST} FROM {METRICS_TABLE}"
        if run_id is None:
            return self._con.execute(f'{query} ORDER BY run_id, scenario, "mode", frame').df()
        return self._con.execute(f'{query} WHERE run_id = ? ORDER BY scenario, "mode", frame', [run_id]).df()


__all__ = ["METRICS_TABLE", "METRIC_KEYS", "METRIC_VALUES", "ResultsDB"]
