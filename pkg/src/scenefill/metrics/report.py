from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd

from scenefill.core.types import Frame, Mask, WarpField
from scenefill.errors import InputError
from scenefill.flow import FlowParams, compute_flow
from scenefill.metrics.quality import SSIM_WINDOW, mean_db, psnr, ssim
from scenefill.metrics.temporal import TemporalScores, temporal_consistency
from scenefill.utils.logging import get_logger


logger = get_logger(__name__)

FRAME_COLUMNS = ["frame", "psnr", "ssim", "masked_px"]


@dataclass(frozen=True)
class FrameMetrics:
    frame: int
    psnr: float | None
    ssim: float | None
    masked_px: int


@dataclass
class MetricReport:
    per_frame: list[FrameMetrics]
    temporal: TemporalScores | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def aggregate(self) -> dict[str, float | None]:
        psnrs = [m.psnr for m in self.per_frame if m.psnr is not None]
        ssims = [m.ssim for m in self.per_frame if m.ssim is not None]
        return {
            "psnr": mean_db(psnrs),
            "ssim": float(np.mean(ssims)) if ssims else None,
            "tpsnr": self.temporal.tpsnr if self.temporal else None,
            "tssim": self.temporal.tssim if self.temporal else None,
        }

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready document; infinities become the string "inf"."""
        temporal = None
        if self.temporal is not None:
            temporal = {"tpsnr": _encode(self.temporal.tpsnr), "tssim": _encode(self.temporal.tssim), "pairs": self.temporal.pairs}
        return {
            "per_frame": [
                {"frame": m.frame, "psnr": _encode(m.psnr), "ssim": _encode(m.ssim), "masked_px": m.masked_px}
                for m in self.per_frame
            ],
            "temporal": temporal,
            "aggregate": {k: _encode(v) for k, v in self.aggregate.items()},
            **self.extra,
        }

    def to_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return path

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"frame": m.frame, "psnr": m.psnr, "ssim": m.ssim, "masked_px": m.masked_px}
            for m in self.per_frame
        ]
        df = pd.DataFrame(rows, columns=FRAME_COLUMNS)
        df["frame"] = df["frame"].astype("int64")
        df["masked_px"] = df["masked_px"].astype("int64")
        df["psnr"] = df["psnr"].astype("float64")
        df["ssim"] = df["ssim"].astype("float64")
        return df

    def summary_table(self) -> str:
        agg = pd.DataFrame(
            [{"metric": k, "value": ("absent" if v is None else v)} for k, v in self.aggregate.items()]
        )
        return agg.to_string(index=False)


def _encode(value: float | None) -> float | str | None:
    if value is None:
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def _decode(value: Any) -> float | None:
    if value is None:
        return None
    return float(value)


def load_report(path: str | Path) -> MetricReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    per_frame = [
        FrameMetrics(int(r["frame"]), _decode(r["psnr"]), _decode(r["ssim"]), int(r["masked_px"]))
        for r in doc["per_frame"]
    ]
    temporal = None
    if doc.get("temporal"):
        t = doc["temporal"]
        temporal = TemporalScores(float(t["tpsnr"]), _decode(t["tssim"]), int(t["pairs"]))
    return MetricReport(per_frame, temporal)


def ground_truth_flows(ground_truth: Sequence[Frame], params: FlowParams | None = None) -> list[WarpField]:
    """Forward adjacent flows estimated on the clean sequence, for when no analytic flows exist."""
    params = params or FlowParams.from_settings()
    logger.info("estimating %d adjacent flows on the ground truth", len(ground_truth) - 1)
    return [
        compute_flow(a, b, Mask.like(a), Mask.like(b), params)
        for a, b in zip(ground_truth[:-1], ground_truth[1:])
    ]


def evaluate_sequence(
    results: Sequence[Frame],
    ground_truth: Sequence[Frame],
    masks: Sequence[Mask] | None = None,
    flows: Sequence[WarpField] | None = None,
) -> MetricReport:
    """Per-frame PSNR/SSIM over the masked region (whole frame without masks) plus TPSNR/TSSIM.

    Temporal scores need masks; adjacent flows are estimated on the ground truth when not given.
    """
    if len(results) != len(ground_truth):
        raise InputError(f"{len(results)} result frames but {len(ground_truth)} ground-truth frames")
    if masks is not None and len(masks) != len(results):
        raise InputError(f"{len(masks)} masks for {len(results)} frames")

    per_frame: list[FrameMetrics] = []
    for t, (res, gt) in enumerate(zip(results, ground_truth)):
        region = None if masks is None else masks[t]
        if region is not None and not region.any():
            per_frame.append(FrameMetrics(t, None, None, 0))
            continue
        count = res.height * res.width if region is None else region.count
        score_ssim = ssim(res, gt, region) if count >= SSIM_WINDOW * SSIM_WINDOW and min(res.shape) >= SSIM_WINDOW else None
        per_frame.append(FrameMetrics(t, psnr(res, gt, region), score_ssim, count))

    temporal = None
    if masks is not None and any(m.any() for m in masks) and len(results) > 1:
        if flows is None:
            flows = ground_truth_flows(ground_truth)
        temporal = temporal_consistency(results, masks, flows)
    return MetricReport(per_frame, temporal)


__all__ = [
    "FRAME_COLUMNS",
    "FrameMetrics",
    "MetricReport",
    "evaluate_sequence",
    "ground_truth_flows",
    "load_report",
]
