from __future__ import annotations

from pathlib import Path

import pandas as pd
from prefect import flow, task

from scenefill.io.results_db import ResultsDB
from scenefill.metrics import MetricReport
from scenefill.pipeline import RunConfig, run_eval, run_inpaint, run_synth
from scenefill.synth.specs import MaskSpec, SynthManifest, WarpSpec, save_manifest
from scenefill.utils.dates import utc_now
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

SCENARIOS: dict[str, SynthManifest] = {
    "pan": SynthManifest(
        warp=WarpSpec(kind="translation", velocity=(1.5, 0.0)),
        mask=MaskSpec(start=(40.0, 64.0), velocity=(3.0, 0.0), size=24),
        frames=7,
        noise_sigma=0.01,
    ),
    "rotation": SynthManifest(
        warp=WarpSpec(kind="rotation", angular_rate=0.02),
        mask=MaskSpec(shape="disk", start=(64.0, 40.0), velocity=(0.0, 3.0), size=24),
        frames=7,
        noise_sigma=0.01,
    ),
    "zoom": SynthManifest(
        warp=WarpSpec(kind="zoom", scale_rate=0.01),
        mask=MaskSpec(start=(40.0, 40.0), velocity=(3.0, 3.0), size=20),
        frames=7,
        noise_sigma=0.01,
    ),
}


@task(retries=2, retry_delay_seconds=5, name="synthesize_scenario")
def synthesize_task(name: str, root: Path) -> Path:
    manifest_path = save_manifest(SCENARIOS[name], root / "manifests" / f"{name}.json")
    return run_synth(manifest_path, root / "sequences" / name)


@task(name="inpaint_scenario")
def inpaint_task(seq_dir: Path, mode: str, out_dir: Path) -> Path:
    config = RunConfig(input_dir=seq_dir / "frames", mask_dir=seq_dir / "masks", output_dir=out_dir, mode=mode)
    run_inpaint(config)
    return out_dir


@task(name="evaluate_scenario")
def evaluate_task(result_dir: Path, seq_dir: Path) -> MetricReport:
    return run_eval(result_dir, seq_dir / "gt", seq_dir / "masks", seq_dir / "flows")


@task(name="store_metrics")
def store_task(report: MetricReport, run_id: str, scenario: str, mode: str, db_path: str | None) -> int:
    db = ResultsDB(db_path)
    try:
        rows = report.to_frame()
        aggregate = report.aggregate
        for column in ("tpsnr", "tssim"):
            rows[column] = float("nan") if aggregate[column] is None else float(aggregate[column])
        return db.store_metrics(rows, run_id, scenario, mode)
    finally:
        db.close()


@flow(name="benchmark")
def benchmark(
    scenarios: list[str] | None = None,
    modes: list[str] | None = None,
    root: str = "output/benchmark",
    db_path: str | None = None,
    run_id: str | None = None,
) -> pd.DataFrame:
    scenarios = scenarios or list(SCENARIOS)
    modes = modes or ["full", "sliding"]
    unknown = [s for s in scenarios if s not in SCENARIOS]
    if unknown:
        raise ValueError(f"unknown scenarios: {unknown}")
    run_id = run_id or utc_now().strftime("%Y%m%dT%H%M%SZ")
    base = Path(root) / run_id

    for name in scenarios:
        seq_dir = synthesize_task(name, base)
        for mode in modes:
            result_dir = inpaint_task(seq_dir, mode, base / "results" / name / mode)
            report = evaluate_task(result_dir, seq_dir)
            store_task(report, run_id, name, mode, db_path)
            logger.info("%s/%s: %s", name, mode, report.aggregate)

    db = ResultsDB(db_path, read_only=False)
    try:
        return db.fetch_metrics(run_id)
    finally:
        db.close()


if __name__ == "__main__":
    benchmark()
