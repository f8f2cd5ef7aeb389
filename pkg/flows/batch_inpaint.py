from __future__ import annotations

from pathlib import Path

from prefect import flow, task

from scenefill.pipeline import RunConfig, run_inpaint
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)


def find_sequences(root: Path) -> list[Path]:
    """Directories under root holding a frames/ and a masks/ subdirectory."""
    return sorted(p for p in root.iterdir() if (p / "frames").is_dir() and (p / "masks").is_dir())


@task(name="inpaint_sequence")
def inpaint_sequence_task(seq_dir: Path, out_dir: Path, mode: str, threads: int) -> dict:
    config = RunConfig(
        input_dir=seq_dir / "frames",
        mask_dir=seq_dir / "masks",
        output_dir=out_dir,
        mode=mode,
        threads=threads,
        flow_cache_dir=seq_dir / "flow_cache",
    )
    record = run_inpaint(config)
    return {"sequence": seq_dir.name, "frames": len(record["frames"]), "timings": record["timings"]}


@flow(name="batch_inpaint")
def batch_inpaint(root: str, output_root: str, mode: str = "full", threads: int = 1) -> list[dict]:
    sequences = find_sequences(Path(root))
    if not sequences:
        logger.info("no sequences under %s", root)
        return []
    futures = [inpaint_sequence_task.submit(seq, Path(output_root) / seq.name, mode, threads) for seq in sequences]
    return [f.result() for f in futures]


if __name__ == "__main__":
    import sys

    batch_inpaint(sys.argv[1], sys.argv[2])
